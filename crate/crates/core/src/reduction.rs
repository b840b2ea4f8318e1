//! Formula to instance: gadgets, rewiring, merging model and padding.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::clause_gadget::{build_clause_skeleton, connect_to_variable, POSITIONS};
use crate::formula::{occurrence_index, Formula, FormulaError};
use crate::graph::{CliqueId, CliquePartition, Graph, PackedP3, Role, VertexId};
use crate::merging_model::{build_merging_model, MergingModel};
use crate::padding::{pad_clique, PaddingError};
use crate::variable_gadget::{build_variable_gadget, GadgetError, VariableGadget};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("formula is not normalized: {0}")]
    NotNormalized(String),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Padding(#[from] PaddingError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

type P3Key = (VertexId, VertexId, VertexId);

/// Instance under construction.
#[derive(Clone, Debug, Default)]
pub struct Draft {
    pub graph: Graph,
    packing: BTreeMap<P3Key, PackedP3>,
    cliques: CliquePartition,
    members: BTreeMap<CliqueId, Vec<VertexId>>,
}

fn member_id(c: CliqueId, index: u32) -> VertexId {
    match c {
        CliqueId::Var { var, index: clique } => VertexId::Var { var, clique, label: index },
        CliqueId::Clause { clause, part } => VertexId::Clause { clause, part, index },
        CliqueId::Transfer { clause, var } => VertexId::Transfer { clause, var, index },
        CliqueId::Plain(_) => panic!("synthetic cliques are not grown"),
    }
}

impl Draft {
    pub fn new() -> Self {
        Draft::default()
    }

    /// Adds `v` to clique `c`, adjacent to all current members.
    pub fn add_clique_vertex(&mut self, c: CliqueId, v: VertexId) {
        self.graph.add_vertex(v);
        let members = self.members.entry(c).or_default();
        for &u in members.iter() {
            self.graph.add_edge(u, v).expect("fresh vertex");
        }
        members.push(v);
        self.cliques.assign(v, c);
    }

    pub fn grow_clique(&mut self, c: CliqueId, size: usize) {
        for index in self.clique_len(c)..size {
            self.add_clique_vertex(c, member_id(c, index as u32));
        }
    }

    pub fn members(&self, c: CliqueId) -> &[VertexId] {
        self.members.get(&c).map_or(&[], Vec::as_slice)
    }

    pub fn clique_len(&self, c: CliqueId) -> usize {
        self.members(c).len()
    }

    pub fn insert_p3(&mut self, p: PackedP3) -> Result<(), GadgetError> {
        if self.packing.insert(p.key(), p).is_some() {
            return Err(GadgetError::DuplicateP3(p.to_string()));
        }
        Ok(())
    }

    /// Adds the two edges of `p` and packs it.
    pub fn add_p3_with_edges(&mut self, p: PackedP3) -> Result<(), GadgetError> {
        if self.graph.has_edge(p.x, p.z) {
            return Err(GadgetError::NotInduced(p.to_string()));
        }
        self.graph.add_edge(p.x, p.y).map_err(|_| GadgetError::NotInduced(p.to_string()))?;
        self.graph.add_edge(p.y, p.z).map_err(|_| GadgetError::NotInduced(p.to_string()))?;
        self.insert_p3(p)
    }

    pub fn remove_p3(&mut self, p: &PackedP3) -> Option<PackedP3> {
        self.packing.remove(&p.key())
    }

    pub fn packing_len(&self) -> usize {
        self.packing.len()
    }

    pub fn packing_iter(&self) -> impl Iterator<Item = &PackedP3> {
        self.packing.values()
    }

    /// Packing in canonical order: by role, then by orientation-free key.
    pub fn packing(&self) -> Vec<PackedP3> {
        let mut out: Vec<PackedP3> = self.packing.values().copied().collect();
        out.sort_by_key(|p| (p.role, p.key()));
        out
    }

    pub fn absorb_gadget(&mut self, g: VariableGadget) -> Result<(), GadgetError> {
        for (j, clique) in g.cliques.iter().enumerate() {
            for &v in clique {
                self.graph.add_vertex(v);
                self.cliques.assign(v, CliqueId::k(g.var, j));
                self.members.entry(CliqueId::k(g.var, j)).or_default().push(v);
            }
        }
        for e in g.graph.edges() {
            self.graph.add_edge(e.a(), e.b()).expect("gadget edges are proper");
        }
        for p in g.p3s {
            self.insert_p3(p)?;
        }
        Ok(())
    }

    pub fn cliques(&self) -> &CliquePartition {
        &self.cliques
    }
}

/// A CEaMP instance (G, H, ell) with its clique partition and merging model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub packing: Vec<PackedP3>,
    pub ell: usize,
    /// Number of formula variables, including any without a gadget.
    pub variable_count: usize,
    pub cliques: CliquePartition,
    pub model: MergingModel,
}

impl Instance {
    /// Assembles an instance and derives its merging model.
    pub fn new(graph: Graph, packing: Vec<PackedP3>, cliques: CliquePartition, variable_count: usize) -> Self {
        let model = build_merging_model(&graph, &cliques);
        Instance { graph, packing, ell: 0, variable_count, cliques, model }
    }

    /// An instance over plain vertices: each proto-cluster becomes a block.
    pub fn synthetic(graph: Graph, packing: Vec<PackedP3>) -> Self {
        let mut cliques = CliquePartition::new();
        for (k, comp) in crate::graph::proto_clusters(&graph, &packing).into_iter().enumerate() {
            for v in comp {
                cliques.assign(v, CliqueId::Plain(k as u32));
            }
        }
        Instance::new(graph, packing, cliques, 0)
    }
}

/// Builds the instance for a normalized formula.
pub fn reduce(f: &Formula) -> Result<Instance, ReductionError> {
    if !f.is_conforming() {
        return Err(ReductionError::NotNormalized(
            "clauses need three distinct variables and each variable at least two occurrences".into(),
        ));
    }
    let mut draft = Draft::new();
    for (var, &m) in f.occurrence_counts().iter().enumerate() {
        if m > 0 {
            draft.absorb_gadget(build_variable_gadget(var, m)?)?;
        }
    }
    let mut skeletons = Vec::with_capacity(f.clauses.len());
    for (d, clause) in f.clauses.iter().enumerate() {
        let vars: [usize; POSITIONS] = std::array::from_fn(|k| clause.literals[k].var);
        skeletons.push(build_clause_skeleton(&mut draft, d, vars)?);
    }
    for (d, clause) in f.clauses.iter().enumerate() {
        for lit in &clause.literals {
            let pi = occurrence_index(f, lit.var, d)?;
            connect_to_variable(&mut draft, d, lit.var, pi, lit.positive)?;
        }
    }
    let model = build_merging_model(&draft.graph, draft.cliques());
    for d in 0..f.clauses.len() {
        pad_clique(&mut draft, &model, CliqueId::q(d, 3))?;
    }
    for d in 0..f.clauses.len() {
        pad_clique(&mut draft, &model, CliqueId::q(d, 2))?;
    }
    for s in &skeletons {
        for position in 0..POSITIONS {
            pad_clique(&mut draft, &model, s.transfer(position))?;
        }
    }
    let packing = draft.packing();
    let Draft { graph, cliques, .. } = draft;
    Ok(Instance { graph, packing, ell: 0, variable_count: f.variable_count, cliques, model })
}

/// Size class of a clique: K, Q1..Q4, T_outer or T_middle (the transferring
/// clique attached to Q3), or C for synthetic blocks.
pub fn clique_kind(model: &MergingModel, c: CliqueId) -> &'static str {
    match c {
        CliqueId::Var { .. } => "K",
        CliqueId::Clause { part: 1, .. } => "Q1",
        CliqueId::Clause { part: 2, .. } => "Q2",
        CliqueId::Clause { part: 3, .. } => "Q3",
        CliqueId::Clause { .. } => "Q4",
        CliqueId::Transfer { clause, .. } => {
            if model.has_edge(c, CliqueId::Clause { clause, part: 3 }) {
                "T_middle"
            } else {
                "T_outer"
            }
        }
        CliqueId::Plain(_) => "C",
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub vertices: usize,
    pub edges: usize,
    pub var_p3s: usize,
    pub tra_p3s: usize,
    pub pad_p3s: usize,
    /// Distinct sizes per clique kind.
    pub clique_sizes: BTreeMap<String, Vec<usize>>,
    pub max_incidence: usize,
    pub max_incidence_vertex: Option<String>,
}

/// Number of packed P3s containing each vertex.
pub fn incidence(packing: &[PackedP3]) -> BTreeMap<VertexId, usize> {
    let mut out = BTreeMap::new();
    for p in packing {
        for v in p.vertices() {
            *out.entry(v).or_default() += 1;
        }
    }
    out
}

pub fn instance_stats(inst: &Instance) -> Stats {
    let count = |r: Role| inst.packing.iter().filter(|p| p.role == r).count();
    let mut clique_sizes: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (c, members) in inst.cliques.blocks() {
        let sizes = clique_sizes.entry(clique_kind(&inst.model, c).to_string()).or_default();
        if !sizes.contains(&members.len()) {
            sizes.push(members.len());
            sizes.sort_unstable();
        }
    }
    // first vertex attaining the maximum, in canonical order
    let (max_incidence, max_incidence_vertex) = incidence(&inst.packing)
        .into_iter()
        .fold((0, None), |best, (v, n)| if n > best.0 { (n, Some(v.to_string())) } else { best });
    Stats {
        vertices: inst.graph.vertex_count(),
        edges: inst.graph.edge_count(),
        var_p3s: count(Role::Var),
        tra_p3s: count(Role::Tra),
        pad_p3s: count(Role::Pad),
        clique_sizes,
        max_incidence,
        max_incidence_vertex,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_dimacs, Clause, Literal};
    use crate::graph::{covered_pairs, proto_clusters};

    pub(crate) fn phi2() -> Formula {
        parse_dimacs("p cnf 3 2\n1 -2 -3 0\n-1 2 3 0\n").unwrap()
    }

    #[test]
    fn phi2_sizes_and_counts() {
        let inst = reduce(&phi2()).unwrap();
        // oracle: 3 gadgets of 40 plus per clause 1+14+4+1 and 34+46+34
        assert_eq!(3 * 40 + 2 * (1 + 14 + 4 + 1 + 34 + 46 + 34), 388);
        assert_eq!(inst.graph.vertex_count(), 388);
        let st = instance_stats(&inst);
        assert_eq!(st.tra_p3s, 36);
        // 50 per occurrence minus 2 per rewiring
        assert_eq!(st.var_p3s, 50 * 6 - 2 * 6);
        assert_eq!(st.pad_p3s, 2 * (3 + 40 + 267 + 455 + 267));
        let expected: BTreeMap<String, Vec<usize>> = [("K", 5), ("Q1", 1), ("Q2", 14), ("Q3", 4), ("Q4", 1), ("T_middle", 46), ("T_outer", 34)]
            .into_iter()
            .map(|(k, s)| (k.to_string(), vec![s]))
            .collect();
        assert_eq!(st.clique_sizes, expected);
        assert_eq!(covered_pairs(&inst.packing).unwrap().len(), 3 * inst.packing.len());
        for p in &inst.packing {
            assert!(p.is_induced_in(&inst.graph), "{p}");
        }
    }

    #[test]
    fn proto_clusters_are_the_cliques() {
        let inst = reduce(&phi2()).unwrap();
        let mut blocks: Vec<Vec<VertexId>> = inst.cliques.blocks().into_values().collect();
        blocks.sort();
        assert_eq!(proto_clusters(&inst.graph, &inst.packing), blocks);
    }

    #[test]
    fn pad_counts_per_clause() {
        let inst = reduce(&phi2()).unwrap();
        let mut per: BTreeMap<&str, usize> = BTreeMap::new();
        for p in inst.packing.iter().filter(|p| p.role == Role::Pad && p.y.clique().is_some_and(|c| matches!(c, CliqueId::Clause { clause: 0, .. } | CliqueId::Transfer { clause: 0, .. }))) {
            let c = p.y.clique().unwrap();
            let name = match (clique_kind(&inst.model, c), c) {
                ("T_outer", CliqueId::Transfer { var: 0, .. }) => "Tp",
                ("T_outer", _) => "Tr",
                (k, _) => k,
            };
            *per.entry(name).or_default() += 1;
        }
        let expected: BTreeMap<&str, usize> = [("Q3", 3), ("Q2", 40), ("Tp", 267), ("T_middle", 455), ("Tr", 267)].into_iter().collect();
        assert_eq!(per, expected);
    }

    #[test]
    fn empty_and_rejected_inputs() {
        let inst = reduce(&Formula::new(2, vec![])).unwrap();
        assert_eq!(inst.graph.vertex_count(), 0);
        assert_eq!(instance_stats(&inst).max_incidence, 0);
        let bad = Formula::new(3, vec![Clause::new(vec![Literal::new(0, true), Literal::new(1, true), Literal::new(2, true)])]);
        assert!(matches!(reduce(&bad), Err(ReductionError::NotNormalized(_))));
    }

    #[test]
    fn deterministic() {
        assert_eq!(reduce(&phi2()).unwrap(), reduce(&phi2()).unwrap());
    }
}
