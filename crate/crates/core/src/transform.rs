//! Certificate transformers: satisfying assignment to zero-excess edit set,
//! and back.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::formula::{Assignment, Clause, Formula, Literal};
use crate::graph::{apply_edits, is_cluster_graph, CliqueId, EditSet, GraphError, Role, UnionFind, VertexId};
use crate::reduction::Instance;
use crate::variable_gadget::truth_pairs;
use crate::verifier::verify_solution;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("instance does not encode a formula: {0}")]
    Structure(String),
    #[error("assignment does not satisfy the formula (clause {0} is false)")]
    Unsatisfied(usize),
    #[error("encoded edit set fails verification: {0}")]
    Encode(String),
    #[error("edit set is not a zero-excess solution: {0}")]
    NotZeroExcess(String),
    #[error("variable x{0} has neither parity class fully merged")]
    MixedParity(usize),
    #[error("decoded assignment falsifies clause {0}")]
    DecodedUnsatisfied(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Per-variable gadget size and per-clause transferring cliques by position.
struct Layout {
    formula: Formula,
    gadget_cliques: BTreeMap<usize, usize>,
    /// `transfers[d][position]` = (variable, occurrence rank).
    transfers: Vec<[(usize, usize); 3]>,
}

fn layout(inst: &Instance) -> Result<Layout, TransformError> {
    let bad = |m: String| TransformError::Structure(m);
    let blocks = inst.cliques.blocks();
    let mut gadget_cliques: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_clause: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut occurrences: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in blocks.keys() {
        match *c {
            CliqueId::Var { var, index } => {
                let e = gadget_cliques.entry(var as usize).or_default();
                *e = (*e).max(index as usize + 1);
            }
            CliqueId::Transfer { clause, var } => {
                by_clause.entry(clause as usize).or_default().push(var as usize);
                occurrences.entry(var as usize).or_default().push(clause as usize);
            }
            CliqueId::Clause { .. } => {}
            CliqueId::Plain(_) => return Err(bad("synthetic instance".into())),
        }
    }
    // sign of each occurrence from the transferring P3s through K_{4pi+1}
    let mut sign: HashMap<CliqueId, bool> = HashMap::new();
    for p in inst.packing.iter().filter(|p| p.role == Role::Tra) {
        let VertexId::Var { clique: center, .. } = p.y else { continue };
        let (t, other) = match (p.x, p.z) {
            (t @ VertexId::Transfer { .. }, o @ VertexId::Var { .. }) | (o @ VertexId::Var { .. }, t @ VertexId::Transfer { .. }) => (t, o),
            _ => continue,
        };
        let VertexId::Var { clique: far, .. } = other else { unreachable!() };
        let positive = far == center + 1;
        if !positive && far + 1 != center {
            return Err(bad(format!("transferring P3 {p} skips a clique")));
        }
        let t = t.clique().expect("structured vertex");
        if sign.insert(t, positive).is_some_and(|prev| prev != positive) {
            return Err(bad(format!("{t} has inconsistent signs")));
        }
    }
    let clause_count = by_clause.keys().next_back().map_or(0, |&d| d + 1);
    let variable_count = inst.variable_count.max(gadget_cliques.keys().next_back().map_or(0, |&v| v + 1));
    let mut clauses = Vec::with_capacity(clause_count);
    let mut transfers = Vec::with_capacity(clause_count);
    for d in 0..clause_count {
        let vars = by_clause.get(&d).ok_or_else(|| bad(format!("clause {d} has no transferring cliques")))?;
        if vars.len() != 3 {
            return Err(bad(format!("clause {d} has {} transferring cliques", vars.len())));
        }
        let mut slots: [Option<(usize, usize)>; 3] = [None; 3];
        let mut literals = [Literal::new(0, true); 3];
        for &var in vars {
            let t = CliqueId::t(d, var);
            let position = if inst.model.has_edge(t, CliqueId::q(d, 3)) {
                1
            } else if inst.model.has_edge(t, CliqueId::q(d, 1)) {
                0
            } else {
                2
            };
            if slots[position].is_some() {
                return Err(bad(format!("clause {d} has two literals at position {position}")));
            }
            let pi = occurrences[&var].iter().position(|&c| c == d).expect("listed occurrence");
            let positive = *sign.get(&t).ok_or_else(|| bad(format!("{t} is not connected to a gadget")))?;
            slots[position] = Some((var, pi));
            literals[position] = Literal::new(var, positive);
        }
        transfers.push(slots.map(|s| s.expect("three distinct positions")));
        clauses.push(Clause::new(literals.to_vec()));
    }
    Ok(Layout { formula: Formula::new(variable_count, clauses), gadget_cliques, transfers })
}

/// The normalized formula an instance was reduced from.
pub fn recover_formula(inst: &Instance) -> Result<Formula, TransformError> {
    Ok(layout(inst)?.formula)
}

fn first_false_clause(f: &Formula, a: &Assignment) -> Option<usize> {
    f.clauses.iter().position(|c| !c.eval(a))
}

/// Edit set of the cluster partition induced by a satisfying assignment.
pub fn encode_solution(inst: &Instance, a: &Assignment) -> Result<EditSet, TransformError> {
    let lay = layout(inst)?;
    if let Some(d) = first_false_clause(&lay.formula, a) {
        return Err(TransformError::Unsatisfied(d));
    }
    let blocks = inst.cliques.blocks();
    let index: HashMap<CliqueId, usize> = blocks.keys().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut uf = UnionFind::new(index.len());
    let mut merge = |a: CliqueId, b: CliqueId| {
        uf.union(index[&a], index[&b]);
    };
    for (&var, &count) in &lay.gadget_cliques {
        for (x, y) in truth_pairs(var, count, a.value(var)) {
            merge(x, y);
        }
    }
    for (d, (clause, slots)) in lay.formula.clauses.iter().zip(&lay.transfers).enumerate() {
        let chosen = clause.literals.iter().position(|l| l.eval(a)).expect("satisfied clause");
        let q = |part| CliqueId::q(d, part);
        let t = |position: usize| CliqueId::t(d, slots[position].0);
        match chosen {
            0 => {
                merge(t(0), q(1));
                merge(q(2), q(3));
                merge(q(2), q(4));
            }
            1 => {
                merge(q(1), q(2));
                merge(t(1), q(3));
                merge(t(1), q(4));
            }
            _ => {
                merge(t(2), q(4));
                merge(q(1), q(2));
                merge(q(1), q(3));
            }
        }
        for (position, &(var, pi)) in slots.iter().enumerate() {
            if position != chosen {
                // the merged consecutive pair containing K_{4pi+1}
                merge(t(position), CliqueId::k(var, 4 * pi + 1));
            }
        }
    }
    let block_of: HashMap<VertexId, usize> =
        inst.cliques.iter().map(|(v, c)| (v, uf.find(index[&c]))).collect();
    let s = EditSet::for_partition(&inst.graph, &block_of)?;
    let report = verify_solution(inst, &s);
    if !report.passed() {
        return Err(TransformError::Encode(report.failures().join(", ")));
    }
    Ok(s)
}

/// Reads the truth values off the merged/divided status of gadget cliques.
pub fn decode_assignment(inst: &Instance, s: &EditSet) -> Result<Assignment, TransformError> {
    let edited = apply_edits(&inst.graph, s)?;
    if !is_cluster_graph(&edited) {
        return Err(TransformError::NotZeroExcess("result is not a cluster graph".into()));
    }
    if s.len() != inst.packing.len() + inst.ell {
        return Err(TransformError::NotZeroExcess(format!("{} edits for {} packed P3s", s.len(), inst.packing.len())));
    }
    let lay = layout(inst)?;
    let mut cluster: HashMap<VertexId, usize> = HashMap::new();
    for (k, comp) in edited.components().into_iter().enumerate() {
        for v in comp {
            cluster.insert(v, k);
        }
    }
    let blocks = inst.cliques.blocks();
    let rep = |c: CliqueId| blocks.get(&c).and_then(|m| m.first()).map(|v| cluster[v]);
    let merged = |a: CliqueId, b: CliqueId| rep(a).is_some() && rep(a) == rep(b);
    let mut values = vec![false; lay.formula.variable_count];
    for (&var, &count) in &lay.gadget_cliques {
        let all = |value: bool| truth_pairs(var, count, value).into_iter().all(|(a, b)| merged(a, b));
        let none = |value: bool| truth_pairs(var, count, value).into_iter().all(|(a, b)| !merged(a, b));
        values[var] = match (all(false) && none(true), all(true) && none(false)) {
            (true, false) => false,
            (false, true) => true,
            _ => return Err(TransformError::MixedParity(var)),
        };
    }
    let a = Assignment::new(values);
    if let Some(d) = first_false_clause(&lay.formula, &a) {
        return Err(TransformError::DecodedUnsatisfied(d));
    }
    Ok(a)
}
