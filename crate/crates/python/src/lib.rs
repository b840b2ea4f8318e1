//! Python bindings: formulas, reduced instances, edit sets, and the
//! reduce / verify / encode / decode / solve operations.
//!
//!     import ceamp_py as ce
//!     f = ce.Formula.from_dimacs("p cnf 3 2\n1 -2 -3 0\n-1 2 3 0\n")
//!     inst = ce.reduce(f)
//!     edits = inst.solve(time_limit=60.0)
//!     assert f.is_satisfied_by(inst.decode(edits))

use std::time::Duration;

use pyo3::exceptions::{PyRuntimeError, PyTimeoutError, PyValueError};
use pyo3::prelude::*;

use ceamp::formula::{self, Assignment};
use ceamp::graph::EditSet as CoreEditSet;
use ceamp::io;
use ceamp::reduction::{self, Instance as CoreInstance};
use ceamp::solver::{brute_force_partition_solve, solve_zero_excess, SolveOutcome};
use ceamp::transform;
use ceamp::verifier;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A 3-CNF formula over variables x0..x{n-1}.
#[pyclass(frozen)]
struct Formula {
    inner: formula::Formula,
}

#[pymethods]
impl Formula {
    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        Ok(Formula { inner: formula::parse_dimacs(text).map_err(value_err)? })
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs()
    }

    #[getter]
    fn variable_count(&self) -> usize {
        self.inner.variable_count
    }

    #[getter]
    fn clause_count(&self) -> usize {
        self.inner.clauses.len()
    }

    fn is_conforming(&self) -> bool {
        self.inner.is_conforming()
    }

    fn normalize(&self) -> PyResult<Self> {
        Ok(Formula { inner: formula::normalize(&self.inner).map_err(value_err)? })
    }

    /// First satisfying assignment in lexicographic order, or None.
    fn brute_force_sat(&self) -> PyResult<Option<Vec<bool>>> {
        let a = formula::brute_force_sat(&self.inner).map_err(value_err)?;
        Ok(a.map(|a| a.values))
    }

    fn is_satisfied_by(&self, values: Vec<bool>) -> bool {
        self.inner.is_satisfied_by(&Assignment::new(values))
    }

    fn __repr__(&self) -> String {
        format!("Formula(variables={}, clauses={})", self.inner.variable_count, self.inner.clauses.len())
    }
}

/// A set of edge deletions and insertions.
#[pyclass(frozen)]
struct EditSet {
    inner: CoreEditSet,
}

#[pymethods]
impl EditSet {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(EditSet { inner: io::edits_from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        io::edits_to_json(&self.inner)
    }

    /// (u, v, kind) triples in canonical order.
    fn edits(&self) -> Vec<(String, String, String)> {
        self.inner.iter().map(|(p, k)| (p.a().to_string(), p.b().to_string(), k.to_string())).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("EditSet(len={})", self.inner.len())
    }
}

/// A graph with a modification-disjoint P3 packing and budget 0.
#[pyclass(frozen)]
struct Instance {
    inner: CoreInstance,
}

#[pymethods]
impl Instance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance { inner: io::instance_from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&self.inner)
    }

    fn to_dot(&self) -> String {
        io::instance_to_dot(&self.inner)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.graph.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.graph.edge_count()
    }

    #[getter]
    fn packing_size(&self) -> usize {
        self.inner.packing.len()
    }

    /// Instance statistics as a JSON object.
    fn stats_json(&self) -> String {
        serde_json::to_string(&reduction::instance_stats(&self.inner)).expect("serializable")
    }

    /// (passed, report JSON) for the packing and structure checks.
    fn verify(&self) -> (bool, String) {
        let r = verifier::verify_instance(&self.inner);
        (r.passed(), r.to_json())
    }

    /// (passed, report JSON) for a candidate solution.
    fn verify_solution(&self, edits: &EditSet) -> (bool, String) {
        let r = verifier::verify_solution(&self.inner, &edits.inner);
        (r.passed(), r.to_json())
    }

    fn recover_formula(&self) -> PyResult<Formula> {
        Ok(Formula { inner: transform::recover_formula(&self.inner).map_err(value_err)? })
    }

    fn encode(&self, values: Vec<bool>) -> PyResult<EditSet> {
        let s = transform::encode_solution(&self.inner, &Assignment::new(values)).map_err(value_err)?;
        Ok(EditSet { inner: s })
    }

    fn decode(&self, edits: &EditSet) -> PyResult<Vec<bool>> {
        let a = transform::decode_assignment(&self.inner, &edits.inner).map_err(value_err)?;
        Ok(a.values)
    }

    /// A zero-excess edit set, or None when none exists. Raises
    /// TimeoutError when the limit (seconds) runs out first.
    #[pyo3(signature = (time_limit=None, threads=1, oracle=false))]
    fn solve(&self, py: Python<'_>, time_limit: Option<f64>, threads: usize, oracle: bool) -> PyResult<Option<EditSet>> {
        let limit = match time_limit {
            Some(t) if !(t.is_finite() && t >= 0.0) => return Err(PyValueError::new_err(format!("bad time limit {t}"))),
            t => t.map(Duration::from_secs_f64),
        };
        let inst = &self.inner;
        let outcome = py.detach(|| {
            if oracle {
                brute_force_partition_solve(&inst.graph, &inst.packing)
                    .map(|s| s.map_or(SolveOutcome::Infeasible, SolveOutcome::Feasible))
            } else {
                solve_zero_excess(inst, limit, threads.max(1))
            }
        });
        match outcome.map_err(|e| PyRuntimeError::new_err(e.to_string()))? {
            SolveOutcome::Feasible(s) => Ok(Some(EditSet { inner: s })),
            SolveOutcome::Infeasible => Ok(None),
            SolveOutcome::Timeout => Err(PyTimeoutError::new_err("time limit exceeded")),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(vertices={}, edges={}, packing={})",
            self.inner.graph.vertex_count(),
            self.inner.graph.edge_count(),
            self.inner.packing.len()
        )
    }
}

/// Compile a conforming formula into an instance.
#[pyfunction]
fn reduce(f: &Formula) -> PyResult<Instance> {
    Ok(Instance { inner: reduction::reduce(&f.inner).map_err(value_err)? })
}

#[pymodule]
fn ceamp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Formula>()?;
    m.add_class::<EditSet>()?;
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    Ok(())
}
