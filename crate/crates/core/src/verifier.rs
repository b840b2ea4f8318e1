//! Independent checks of packing validity, construction structure and
//! candidate solutions. Everything is recomputed from the instance itself.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use serde_json::{json, Value};

use crate::graph::{apply_edits, is_cluster_graph, proto_clusters, CliqueId, EditSet, PackedP3, Pair, VertexId};
use crate::merging_model::check_levels_acyclic;
use crate::reduction::{clique_kind, incidence, Instance};

/// Listed witnesses are truncated to this many entries.
const WITNESS_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    pub witness: Value,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn get(&self, check: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.check.as_str()).collect()
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    fn push(&mut self, check: &str, ok: bool, witness: Value) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(CheckResult { check: check.to_string(), status, witness });
    }

    fn push_list(&mut self, check: &str, problems: Vec<String>) {
        let total = problems.len();
        let shown: Vec<String> = problems.into_iter().take(WITNESS_LIMIT).collect();
        self.push(check, total == 0, json!({ "violations": total, "examples": shown }));
    }
}

/// How many packed P3s contain each pair.
fn coverage(packing: &[PackedP3]) -> HashMap<Pair, Vec<usize>> {
    let mut out: HashMap<Pair, Vec<usize>> = HashMap::new();
    for (k, p) in packing.iter().enumerate() {
        if p.x == p.y || p.y == p.z || p.x == p.z {
            continue;
        }
        for pair in p.pairs() {
            out.entry(pair).or_default().push(k);
        }
    }
    out
}

fn times(cov: &HashMap<Pair, Vec<usize>>, pair: Pair) -> usize {
    cov.get(&pair).map_or(0, Vec::len)
}

pub fn verify_packing(inst: &Instance) -> Report {
    let mut r = Report::default();
    let not_induced: Vec<String> =
        inst.packing.iter().filter(|p| !p.is_induced_in(&inst.graph)).map(|p| format!("not induced: {p}")).collect();
    r.push_list("packing_induced", not_induced);
    let cov = coverage(&inst.packing);
    let mut shared: Vec<(Pair, Vec<usize>)> = cov.into_iter().filter(|(_, ks)| ks.len() > 1).collect();
    shared.sort();
    let shared = shared
        .into_iter()
        .map(|(pair, ks)| {
            let names: Vec<String> = ks.iter().map(|&k| inst.packing[k].to_string()).collect();
            format!("{pair} shared by {}", names.join(" and "))
        })
        .collect();
    r.push_list("packing_disjoint", shared);
    r
}

/// Occurrence rank of each transferring clique among those of its variable.
fn occurrence_ranks(blocks: &BTreeMap<CliqueId, Vec<VertexId>>) -> BTreeMap<CliqueId, u32> {
    let mut per_var: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for c in blocks.keys() {
        if let CliqueId::Transfer { clause, var } = *c {
            per_var.entry(var).or_default().push(clause);
        }
    }
    let mut out = BTreeMap::new();
    for (var, clauses) in per_var {
        for (pi, clause) in clauses.into_iter().enumerate() {
            out.insert(CliqueId::Transfer { clause, var }, pi as u32);
        }
    }
    out
}

fn expected_size(kind: &str) -> Option<usize> {
    match kind {
        "K" => Some(5),
        "Q1" | "Q4" => Some(1),
        "Q3" => Some(4),
        "Q2" => Some(14),
        "T_outer" => Some(34),
        "T_middle" => Some(46),
        _ => None,
    }
}

pub fn verify_structure(inst: &Instance) -> Report {
    let mut r = Report::default();
    let blocks = inst.cliques.blocks();
    let cov = coverage(&inst.packing);

    // 1. proto-clusters are exactly the declared cliques
    let mut declared: Vec<Vec<VertexId>> = blocks.values().cloned().collect();
    declared.sort();
    let found = proto_clusters(&inst.graph, &inst.packing);
    let missing: Vec<String> = inst.graph.vertices().filter(|v| inst.cliques.clique_of(*v).is_none()).map(|v| format!("{v} has no clique")).collect();
    let mut diff: Vec<String> = missing;
    if found != declared {
        let f: std::collections::BTreeSet<&Vec<VertexId>> = found.iter().collect();
        for b in declared.iter().filter(|b| !f.contains(b)) {
            diff.push(format!("clique starting at {} is not a proto-cluster", b[0]));
        }
    }
    r.push_list("proto_clusters", diff);

    // 2. clique sizes
    let mut bad_sizes = Vec::new();
    for (c, members) in &blocks {
        if let Some(want) = expected_size(clique_kind(&inst.model, *c)) {
            if members.len() != want {
                bad_sizes.push(format!("{c} has {} vertices, expected {want}", members.len()));
            }
        }
    }
    r.push_list("clique_sizes", bad_sizes);

    // 3. pairs between model-adjacent cliques covered exactly once
    let mut uncovered = Vec::new();
    for (a, b) in inst.model.edges() {
        for &u in blocks.get(&a).map_or(&[][..], Vec::as_slice) {
            for &v in blocks.get(&b).map_or(&[][..], Vec::as_slice) {
                let n = times(&cov, Pair::new(u, v));
                if n != 1 {
                    uncovered.push(format!("{} covered {n} times", Pair::new(u, v)));
                }
            }
        }
    }
    r.push_list("model_pairs_covered", uncovered);

    // 4. dividing non-edges: Q1 x Q4 and K_{4pi+1} x Q1
    let mut bad_dividing = Vec::new();
    let mut check_dividing = |x: &[VertexId], y: &[VertexId]| {
        for &u in x {
            for &v in y {
                let pair = Pair::new(u, v);
                if inst.graph.has_pair_edge(pair) || times(&cov, pair) > 0 {
                    bad_dividing.push(format!("{pair} is not a dividing non-edge"));
                }
            }
        }
    };
    let get = |c: CliqueId| blocks.get(&c).map_or(&[][..], Vec::as_slice);
    for c in blocks.keys() {
        if let CliqueId::Clause { clause, part: 1 } = *c {
            check_dividing(get(*c), get(CliqueId::Clause { clause, part: 4 }));
        }
    }
    for (t, pi) in occurrence_ranks(&blocks) {
        let CliqueId::Transfer { clause, var } = t else { unreachable!() };
        check_dividing(get(CliqueId::Var { var, index: 4 * pi + 1 }), get(CliqueId::Clause { clause, part: 1 }));
    }
    r.push_list("dividing_non_edges", bad_dividing);

    // 5. level discipline
    let same_level: Vec<String> = inst
        .model
        .edges()
        .filter(|(a, b)| a.level() == b.level() && a.level() != 0)
        .map(|(a, b)| format!("{a} -- {b} on level {}", a.level()))
        .collect();
    let ok = check_levels_acyclic(&inst.model);
    debug_assert_eq!(ok, same_level.is_empty());
    r.push_list("levels", same_level);

    // 6. per-vertex incidence within the structural bound: a packed P3
    // through u covers two pairs at u, each reaching u's clique or a clique
    // within model distance 2 (the non-edge spans the center's neighbors)
    let inc = incidence(&inst.packing);
    let mut reach_of: HashMap<CliqueId, usize> = HashMap::new();
    let mut over = Vec::new();
    let (mut max, mut argmax) = (0usize, None);
    for (&v, &n) in &inc {
        if n > max {
            (max, argmax) = (n, Some(v.to_string()));
        }
        let Some(c) = inst.cliques.clique_of(v) else { continue };
        let reach = *reach_of.entry(c).or_insert_with(|| {
            let mut near: std::collections::BTreeSet<CliqueId> = inst.model.neighbors(c).collect();
            for nb in near.clone() {
                near.extend(inst.model.neighbors(nb));
            }
            near.remove(&c);
            get(c).len() - 1 + near.into_iter().map(|r| get(r).len()).sum::<usize>()
        });
        if n > reach / 2 {
            over.push(format!("{v} lies in {n} packed P3s, bound {}", reach / 2));
        }
    }
    let total = over.len();
    r.push(
        "incidence",
        total == 0,
        json!({ "max_incidence": max, "vertex": argmax, "violations": total, "examples": over.into_iter().take(WITNESS_LIMIT).collect::<Vec<_>>() }),
    );

    // 7. every inter-clique edge is covered
    let loose: Vec<String> = inst
        .graph
        .edges()
        .filter(|e| inst.cliques.clique_of(e.a()) != inst.cliques.clique_of(e.b()) && times(&cov, *e) == 0)
        .map(|e| format!("edge {e} is not covered"))
        .collect();
    r.push_list("inter_clique_edges_covered", loose);
    r
}

pub fn verify_solution(inst: &Instance, s: &EditSet) -> Report {
    let mut r = Report::default();
    let edited = apply_edits(&inst.graph, s);
    match &edited {
        Ok(g) => {
            r.push("edit_tags", true, Value::Null);
            r.push("cluster_graph", is_cluster_graph(g), Value::Null);
        }
        Err(e) => {
            r.push("edit_tags", false, json!(e.to_string()));
            r.push("cluster_graph", false, json!("edit set could not be applied"));
        }
    }
    let budget = inst.packing.len() + inst.ell;
    r.push("budget", s.len() == budget, json!({ "edits": s.len(), "packing": inst.packing.len(), "ell": inst.ell }));

    let cov = coverage(&inst.packing);
    let stray: Vec<String> = s
        .iter()
        .filter(|(p, _)| times(&cov, *p) != 1)
        .map(|(p, k)| format!("{k} {p} lies in {} packed P3s", times(&cov, p)))
        .collect();
    r.push_list("edits_covered", stray);

    let wrong: Vec<String> = inst
        .packing
        .iter()
        .filter_map(|p| {
            let n = p.pairs().iter().filter(|q| s.contains(**q)).count();
            (n != 1).then(|| format!("{p} has {n} edits"))
        })
        .collect();
    r.push_list("one_edit_per_p3", wrong);

    let mut split = Vec::new();
    if let Ok(g) = &edited {
        let mut cluster: HashMap<VertexId, usize> = HashMap::new();
        for (k, comp) in g.components().into_iter().enumerate() {
            for v in comp {
                cluster.insert(v, k);
            }
        }
        for (c, members) in inst.cliques.blocks() {
            if members.iter().any(|v| cluster[v] != cluster[&members[0]]) {
                split.push(format!("clique {c} is split"));
            }
        }
    } else {
        split.push("edit set could not be applied".to_string());
    }
    r.push_list("clusters_are_unions", split);
    r
}

/// Packing and structure checks together.
pub fn verify_instance(inst: &Instance) -> Report {
    let mut r = verify_packing(inst);
    r.extend(verify_structure(inst));
    r
}
