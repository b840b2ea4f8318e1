//! The merging model: a graph over cliques whose edges mark the clique pairs
//! a solution may merge, stratified into levels 0..=4.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::graph::{CliqueId, CliquePartition, Graph};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MergingModel {
    adj: BTreeMap<CliqueId, BTreeSet<CliqueId>>,
}

impl MergingModel {
    pub fn new() -> Self {
        MergingModel::default()
    }

    pub fn add_node(&mut self, c: CliqueId) {
        self.adj.entry(c).or_default();
    }

    pub fn insert_edge(&mut self, a: CliqueId, b: CliqueId) {
        if a != b {
            self.adj.entry(a).or_default().insert(b);
            self.adj.entry(b).or_default().insert(a);
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = CliqueId> + '_ {
        self.adj.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, a: CliqueId, b: CliqueId) -> bool {
        self.adj.get(&a).is_some_and(|s| s.contains(&b))
    }

    pub fn neighbors(&self, c: CliqueId) -> impl Iterator<Item = CliqueId> + '_ {
        self.adj.get(&c).into_iter().flatten().copied()
    }

    /// Each edge once, as (smaller, larger).
    pub fn edges(&self) -> impl Iterator<Item = (CliqueId, CliqueId)> + '_ {
        self.adj.iter().flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Neighbors on a strictly lower level.
    pub fn out_neighbors(&self, c: CliqueId) -> Vec<CliqueId> {
        self.neighbors(c).filter(|n| n.level() < c.level()).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph merging_model {\n");
        for level in 0..=4u8 {
            let members: Vec<String> =
                self.nodes().filter(|c| c.level() == level).map(|c| format!("\"{c}\"")).collect();
            if !members.is_empty() {
                let _ = writeln!(out, "  {{ rank=same; {} }}", members.join("; "));
            }
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  \"{a}\" -- \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

/// Derives the merging model from the clique partition and the adjacency of
/// transferring cliques to clause cliques in `graph`.
pub fn build_merging_model(graph: &Graph, cliques: &CliquePartition) -> MergingModel {
    let mut mm = MergingModel::new();
    let blocks = cliques.blocks();
    let mut var_cliques: BTreeMap<u32, u32> = BTreeMap::new();
    let mut occurrences: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut clauses: BTreeSet<u32> = BTreeSet::new();
    for &c in blocks.keys() {
        mm.add_node(c);
        match c {
            CliqueId::Var { var, index } => {
                let e = var_cliques.entry(var).or_default();
                *e = (*e).max(index + 1);
            }
            CliqueId::Transfer { clause, var } => occurrences.entry(var).or_default().push(clause),
            CliqueId::Clause { clause, .. } => {
                clauses.insert(clause);
            }
            CliqueId::Plain(_) => {}
        }
    }
    for (&var, &count) in &var_cliques {
        for j in 0..count {
            let a = CliqueId::Var { var, index: j };
            let b = CliqueId::Var { var, index: (j + 1) % count };
            if blocks.contains_key(&a) && blocks.contains_key(&b) {
                mm.insert_edge(a, b);
            }
        }
    }
    for (&var, ds) in &occurrences {
        for (pi, &clause) in ds.iter().enumerate() {
            let t = CliqueId::Transfer { clause, var };
            for off in 0..3 {
                let k = CliqueId::Var { var, index: 4 * pi as u32 + off };
                if blocks.contains_key(&k) {
                    mm.insert_edge(t, k);
                }
            }
        }
    }
    for &d in &clauses {
        let q = |part| CliqueId::Clause { clause: d, part };
        for (a, b) in [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)] {
            if blocks.contains_key(&q(a)) && blocks.contains_key(&q(b)) {
                mm.insert_edge(q(a), q(b));
            }
        }
    }
    for (&t, members) in &blocks {
        let CliqueId::Transfer { clause, .. } = t else { continue };
        let touched: BTreeSet<u8> = members
            .iter()
            .flat_map(|&v| graph.neighbors(v))
            .filter_map(|n| match cliques.clique_of(n) {
                Some(CliqueId::Clause { clause: c, part }) if c == clause => Some(part),
                _ => None,
            })
            .collect();
        let q = |part| CliqueId::Clause { clause, part };
        for part in [1u8, 4] {
            if touched.contains(&part) {
                mm.insert_edge(t, q(part));
            }
        }
        if touched.contains(&3) {
            mm.insert_edge(t, q(3));
            mm.insert_edge(t, q(4));
        }
    }
    mm
}

/// Every edge outside level 0 joins distinct levels, so orienting edges
/// from higher to lower level is acyclic.
pub fn check_levels_acyclic(mm: &MergingModel) -> bool {
    mm.edges().all(|(a, b)| (a.level() == 0 && b.level() == 0) || a.level() != b.level())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_check() {
        assert!(check_levels_acyclic(&MergingModel::new()));
        let mut mm = MergingModel::new();
        mm.insert_edge(CliqueId::k(0, 0), CliqueId::k(0, 1));
        mm.insert_edge(CliqueId::q(0, 3), CliqueId::q(0, 4));
        assert!(check_levels_acyclic(&mm));
        mm.insert_edge(CliqueId::q(0, 3), CliqueId::q(1, 3));
        assert!(!check_levels_acyclic(&mm));
    }

    #[test]
    fn out_neighbors_by_level() {
        let mut mm = MergingModel::new();
        let (q1, q2, q3, q4) = (CliqueId::q(0, 1), CliqueId::q(0, 2), CliqueId::q(0, 3), CliqueId::q(0, 4));
        for (a, b) in [(q1, q2), (q1, q3), (q2, q3), (q2, q4), (q3, q4)] {
            mm.insert_edge(a, b);
        }
        assert_eq!(mm.out_neighbors(q2), vec![q1, q3, q4]);
        assert_eq!(mm.out_neighbors(q3), vec![q1, q4]);
        assert!(mm.out_neighbors(q1).is_empty());
        assert_eq!(mm.edge_count(), 5);
        assert!(mm.to_dot().contains("\"Q[0][2]\" -- \"Q[0][3]\""));
    }
}
