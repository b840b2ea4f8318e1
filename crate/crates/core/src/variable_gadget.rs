//! Cyclic variable gadget: 4m cliques of five vertices joined by
//! arithmetic-progression P3s over F_5.

use thiserror::Error;

use crate::graph::{CliqueId, Graph, PackedP3, Role, VertexId};

/// Vertices per variable clique; also the modulus of the progression labels.
pub const CLIQUE_SIZE: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("variable x{var} occurs {occurrences} time(s); at least 2 required")]
    TooFewOccurrences { var: usize, occurrences: usize },
    #[error("clause {clause} repeats variable x{var}")]
    RepeatedVariable { clause: usize, var: usize },
    #[error("expected packed P3 {0} is missing")]
    MissingP3(String),
    #[error("packed P3 {0} already present")]
    DuplicateP3(String),
    #[error("triple {0} would not be an induced P3")]
    NotInduced(String),
}

#[derive(Clone, Debug)]
pub struct VariableGadget {
    pub var: usize,
    /// `cliques[j]` lists the vertices of K_j by label.
    pub cliques: Vec<Vec<VertexId>>,
    pub graph: Graph,
    pub p3s: Vec<PackedP3>,
}

impl VariableGadget {
    pub fn clique_count(&self) -> usize {
        self.cliques.len()
    }

    pub fn vertex(&self, clique: usize, label: usize) -> VertexId {
        self.cliques[clique % self.cliques.len()][label]
    }
}

pub fn build_variable_gadget(var: usize, occurrences: usize) -> Result<VariableGadget, GadgetError> {
    if occurrences < 2 {
        return Err(GadgetError::TooFewOccurrences { var, occurrences });
    }
    let count = 4 * occurrences;
    let cliques: Vec<Vec<VertexId>> =
        (0..count).map(|j| (0..CLIQUE_SIZE).map(|p| VertexId::var(var, j, p)).collect()).collect();
    let mut graph = Graph::new();
    for clique in &cliques {
        for (a, &u) in clique.iter().enumerate() {
            graph.add_vertex(u);
            for &v in &clique[a + 1..] {
                graph.add_edge(u, v).expect("distinct labels");
            }
        }
    }
    let mut p3s = Vec::with_capacity(count / 2 * CLIQUE_SIZE * CLIQUE_SIZE);
    for j in (0..count).step_by(2) {
        let (left, mid, right) = (&cliques[j], &cliques[j + 1], &cliques[(j + 2) % count]);
        for p in 0..CLIQUE_SIZE {
            for q in 0..CLIQUE_SIZE {
                let r = (2 * q + CLIQUE_SIZE - p) % CLIQUE_SIZE;
                graph.add_edge(left[p], mid[q]).expect("distinct cliques");
                graph.add_edge(mid[q], right[r]).expect("distinct cliques");
                p3s.push(PackedP3::new(left[p], mid[q], right[r], Role::Var));
            }
        }
    }
    Ok(VariableGadget { var, cliques, graph, p3s })
}

/// Clique pairs merged under the given truth value: even pairs (K_j, K_j+1)
/// for false, odd pairs (K_j+1, K_j+2) for true, j even.
pub fn truth_pairs(var: usize, clique_count: usize, value: bool) -> Vec<(CliqueId, CliqueId)> {
    let offset = usize::from(value);
    (0..clique_count)
        .step_by(2)
        .map(|j| (CliqueId::k(var, j + offset), CliqueId::k(var, (j + offset + 1) % clique_count)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{covered_pairs, Pair};
    use std::collections::{BTreeMap, BTreeSet};

    #[test]
    fn sizes_for_two_occurrences() {
        let g = build_variable_gadget(0, 2).unwrap();
        assert_eq!(g.clique_count(), 8);
        assert_eq!(g.graph.vertex_count(), 40);
        // oracle: 4 even j times 25 label pairs
        let expected = (0..8).step_by(2).count() * 25;
        assert_eq!(expected, 100);
        assert_eq!(g.p3s.len(), 100);
        assert_eq!(build_variable_gadget(3, 3).unwrap().clique_count(), 12);
        assert_eq!(
            build_variable_gadget(1, 1).unwrap_err(),
            GadgetError::TooFewOccurrences { var: 1, occurrences: 1 }
        );
    }

    #[test]
    fn packed_triples_are_induced_and_disjoint() {
        for m in 2..=4 {
            let g = build_variable_gadget(0, m).unwrap();
            for p in &g.p3s {
                assert!(p.is_induced_in(&g.graph), "{p}");
            }
            let covered = covered_pairs(&g.p3s).unwrap();
            assert_eq!(covered.len(), 3 * g.p3s.len());
        }
    }

    #[test]
    fn pair_audit() {
        let g = build_variable_gadget(2, 2).unwrap();
        let covered = covered_pairs(&g.p3s).unwrap();
        let n = g.clique_count();
        for j in 0..n {
            for d in 1..n {
                let k = (j + d) % n;
                if j > k {
                    continue;
                }
                let dist = d.min(n - d);
                // a distance-2 pair {a, a+2} is covered only when a is even
                let left = if (j + 2) % n == k { j } else { k };
                let should_cover = dist == 1 || (dist == 2 && left % 2 == 0);
                for p in 0..5 {
                    for q in 0..5 {
                        let pair = Pair::new(g.vertex(j, p), g.vertex(k, q));
                        assert_eq!(covered.contains_key(&pair), should_cover, "K{j} K{k}");
                        if dist >= 2 {
                            assert!(!g.graph.has_pair_edge(pair));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn incidence_by_parity() {
        let g = build_variable_gadget(0, 3).unwrap();
        let mut count: BTreeMap<VertexId, usize> = BTreeMap::new();
        for p in &g.p3s {
            for v in p.vertices() {
                *count.entry(v).or_default() += 1;
            }
        }
        assert_eq!(count.len(), 60);
        // oracle: even-clique vertices are endpoints of 5 P3s on each side,
        // odd-clique vertices are centers of 5
        for (v, c) in count {
            let VertexId::Var { clique, .. } = v else { unreachable!() };
            assert_eq!(c, if clique % 2 == 0 { 10 } else { 5 }, "{v}");
        }
    }

    #[test]
    fn progressions_hold() {
        let g = build_variable_gadget(0, 2).unwrap();
        for p in &g.p3s {
            let label = |v: VertexId| match v {
                VertexId::Var { label, .. } => label as i64,
                _ => unreachable!(),
            };
            let (a, b, c) = (label(p.x), label(p.y), label(p.z));
            assert_eq!((b - a).rem_euclid(5), (c - b).rem_euclid(5));
        }
    }

    #[test]
    fn truth_pair_examples() {
        let k = CliqueId::k;
        assert_eq!(truth_pairs(0, 8, false), vec![(k(0, 0), k(0, 1)), (k(0, 2), k(0, 3)), (k(0, 4), k(0, 5)), (k(0, 6), k(0, 7))]);
        assert_eq!(truth_pairs(0, 8, true), vec![(k(0, 1), k(0, 2)), (k(0, 3), k(0, 4)), (k(0, 5), k(0, 6)), (k(0, 7), k(0, 0))]);
        let f: BTreeSet<_> = truth_pairs(0, 12, false).into_iter().collect();
        let t: BTreeSet<_> = truth_pairs(0, 12, true).into_iter().collect();
        assert_eq!((f.len(), t.len()), (6, 6));
        assert!(f.is_disjoint(&t));
    }
}
