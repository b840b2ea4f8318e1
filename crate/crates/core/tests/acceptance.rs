//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Corpora are seeded, so every run checks the same instances.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use ceamp::ffield::is_prime;
use ceamp::formula::{all_satisfying, brute_force_sat, Formula};
use ceamp::graph::{CliqueId, VertexId};
use ceamp::padding::{lemma1_pack, PaddingProblem};
use ceamp::reduction::{reduce, Instance};
use ceamp::solver::{brute_force_cluster_editing, brute_force_partition_solve, solve_zero_excess, SolveOutcome};
use ceamp::transform::{decode_assignment, encode_solution};
use ceamp::verifier::{verify_instance, verify_solution};

use common::*;

/// Per-formula wall-clock budget of the completeness round trip.
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(10);
/// Per-instance solver limit of the equivalence run.
const SOLVE_LIMIT: Duration = Duration::from_secs(120);
/// Per-configuration budget of the triangle packing suite.
const PACK_BUDGET: Duration = Duration::from_secs(1);
const ROUND_TRIP_FORMULAS: usize = 100;
const EQUIVALENCE_FORMULAS: usize = 50;
const PACK_CONFIGS: usize = 24;
const PACK_PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 23];
const SYNTHETIC_INSTANCES: usize = 100;
const MAX_PROTO_CLUSTERS: usize = 10;
const INCIDENCE_SIZES: [usize; 4] = [3, 4, 5, 6];
const INCIDENCE_PER_SIZE: usize = 4;
/// Max per-vertex packed-P3 count of every reduced instance.
const INCIDENCE_CONSTANT: usize = 49;

type Verdict = Result<String, String>;

/// Satisfiable conforming formulas with n <= 6, m <= 10.
fn round_trip_corpus() -> Vec<Formula> {
    let mut rng = rng(0x5eed_0001);
    (0..ROUND_TRIP_FORMULAS)
        .map(|_| {
            let n: usize = rng.gen_range(3..=6);
            let m = rng.gen_range(min_clauses(n)..=10);
            conforming_formula(&mut rng, n, m, Some(true))
        })
        .collect()
}

/// Fixed mix with n <= 4, m <= 8: contradictions, satisfiable formulas one
/// clause short of a contradiction, and random formulas.
fn equivalence_corpus() -> Vec<Formula> {
    let mut rng = rng(0x5eed_0003);
    let mut out = vec![complete_contradiction(3, [0, 1, 2]), complete_contradiction(4, [0, 1, 3])];
    for _ in 0..10 {
        out.push(matching_contradiction(&mut rng));
    }
    while out.len() < 20 {
        let mut f = matching_contradiction(&mut rng);
        f.clauses.pop();
        if f.is_conforming() {
            out.push(f);
        }
    }
    while out.len() < EQUIVALENCE_FORMULAS {
        let n = rng.gen_range(3..=4);
        let m = rng.gen_range(min_clauses(n)..=8);
        out.push(conforming_formula(&mut rng, n, m, None));
    }
    out
}

fn incidence_corpus() -> Vec<(usize, Formula)> {
    let mut rng = rng(0x5eed_0008);
    INCIDENCE_SIZES
        .iter()
        .flat_map(|&n| (0..INCIDENCE_PER_SIZE).map(move |k| (n, k)))
        .map(|(n, k)| {
            let m = (min_clauses(n) + k).min(10);
            (n, conforming_formula(&mut rng, n, m, None))
        })
        .collect()
}

fn failures(mut problems: Vec<String>) -> Verdict {
    let total = problems.len();
    problems.truncate(5);
    Err(format!("{total} failures, e.g. {}", problems.join("; ")))
}

fn completeness() -> Verdict {
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;
    let corpus = round_trip_corpus();
    for (k, f) in corpus.iter().enumerate() {
        let start = Instant::now();
        let a = brute_force_sat(f).unwrap().expect("corpus is satisfiable");
        let inst = reduce(f).unwrap();
        match encode_solution(&inst, &a) {
            Ok(s) => {
                let r = verify_solution(&inst, &s);
                if !r.passed() || s.len() != inst.packing.len() {
                    problems.push(format!("formula {k}: {:?}", r.failures()));
                }
            }
            Err(e) => problems.push(format!("formula {k}: {e}")),
        }
        let took = start.elapsed();
        slowest = slowest.max(took);
        if took > ROUND_TRIP_BUDGET {
            problems.push(format!("formula {k} took {took:?}"));
        }
    }
    if problems.is_empty() {
        Ok(format!("{} formulas, slowest {:.2?}", corpus.len(), slowest))
    } else {
        failures(problems)
    }
}

fn soundness() -> Verdict {
    let mut problems = Vec::new();
    let mut assignments = 0;
    for (k, f) in round_trip_corpus().iter().enumerate() {
        let inst = reduce(f).unwrap();
        for a in all_satisfying(f).unwrap() {
            assignments += 1;
            let back = encode_solution(&inst, &a).and_then(|s| decode_assignment(&inst, &s));
            match back {
                Ok(b) if b == a && f.is_satisfied_by(&b) => {}
                Ok(b) => problems.push(format!("formula {k}: {a:?} decoded to {b:?}")),
                Err(e) => problems.push(format!("formula {k}: {e}")),
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{assignments} assignments over {ROUND_TRIP_FORMULAS} formulas"))
    } else {
        failures(problems)
    }
}

fn equivalence() -> Verdict {
    let mut problems = Vec::new();
    let (mut sat, mut unsat) = (0, 0);
    let mut slowest = Duration::ZERO;
    for (k, f) in equivalence_corpus().iter().enumerate() {
        assert!(f.is_conforming() && f.variable_count <= 4 && f.clauses.len() <= 8);
        let expected = brute_force_sat(f).unwrap().is_some();
        if expected != satisfiable(f) {
            problems.push(format!("formula {k}: satisfiability oracles disagree"));
        }
        if expected {
            sat += 1;
        } else {
            unsat += 1;
        }
        let inst = reduce(f).unwrap();
        let start = Instant::now();
        let outcome = solve_zero_excess(&inst, Some(SOLVE_LIMIT), 1);
        slowest = slowest.max(start.elapsed());
        match outcome {
            Ok(SolveOutcome::Feasible(s)) => {
                if !expected {
                    problems.push(format!("formula {k}: unsatisfiable but feasible"));
                } else if !decode_assignment(&inst, &s).is_ok_and(|a| f.is_satisfied_by(&a)) {
                    problems.push(format!("formula {k}: witness does not decode to a model"));
                }
            }
            Ok(SolveOutcome::Infeasible) if expected => problems.push(format!("formula {k}: satisfiable but infeasible")),
            Ok(SolveOutcome::Infeasible) => {}
            Ok(SolveOutcome::Timeout) => problems.push(format!("formula {k}: timeout")),
            Err(e) => problems.push(format!("formula {k}: {e}")),
        }
    }
    if problems.is_empty() {
        Ok(format!("{sat} satisfiable, {unsat} unsatisfiable, slowest {slowest:.2?}"))
    } else {
        failures(problems)
    }
}

fn triangle_packings() -> Verdict {
    let mut rng = rng(0x5eed_0004);
    let mut problems = Vec::new();
    let mut configs = 0;
    let mut slowest = Duration::ZERO;
    for p in PACK_PRIMES {
        assert!(is_prime(p as u32));
        let max_c8 = p / 4;
        for k in 0..PACK_CONFIGS {
            let c8s = match k % 3 {
                0 => 0,
                1 => max_c8,
                _ => rng.gen_range(0..=max_c8),
            };
            let room = p - 4 * c8s;
            let p3s = rng.gen_range(usize::from(c8s == 0)..=room);
            let f = random_f(&mut rng, p, c8s, p3s);
            let prob = PaddingProblem { p, v_count: p, w_count: 2 * p, f: f.clone() };
            let start = Instant::now();
            let result = lemma1_pack(&prob);
            let took = start.elapsed();
            slowest = slowest.max(took);
            configs += 1;
            match result {
                Ok(tris) => {
                    let v = triangle_violations(p, 2 * p, &f, &tris);
                    if !v.is_empty() {
                        problems.push(format!("p={p} c8s={c8s} p3s={p3s}: {}", v[0]));
                    }
                }
                Err(e) => problems.push(format!("p={p} c8s={c8s} p3s={p3s}: {e}")),
            }
            if took > PACK_BUDGET {
                problems.push(format!("p={p}: took {took:?}"));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{configs} configurations over {} primes, slowest {slowest:.2?}", PACK_PRIMES.len()))
    } else {
        failures(problems)
    }
}

fn all_corpora() -> Vec<Formula> {
    let mut out = round_trip_corpus();
    out.extend(equivalence_corpus());
    out.extend(incidence_corpus().into_iter().map(|(_, f)| f));
    out
}

/// Expected size of a clique, derived from the graph rather than from the
/// construction: a transferring clique is in the middle position when it is
/// adjacent to Q3.
fn expected_size(inst: &Instance, blocks: &BTreeMap<CliqueId, Vec<VertexId>>, c: CliqueId) -> Option<usize> {
    match c {
        CliqueId::Var { .. } => Some(5),
        CliqueId::Clause { part: 1 | 4, .. } => Some(1),
        CliqueId::Clause { part: 3, .. } => Some(4),
        CliqueId::Clause { part: 2, .. } => Some(14),
        CliqueId::Transfer { clause, .. } => {
            let q3 = &blocks[&CliqueId::q(clause as usize, 3)];
            let middle = blocks[&c].iter().any(|&u| q3.iter().any(|&v| inst.graph.has_edge(u, v)));
            Some(if middle { 46 } else { 34 })
        }
        _ => None,
    }
}

fn size_table() -> Verdict {
    let mut problems = Vec::new();
    let mut counted: BTreeMap<usize, usize> = BTreeMap::new();
    let corpus = all_corpora();
    for (k, f) in corpus.iter().enumerate() {
        let inst = reduce(f).unwrap();
        let blocks = inst.cliques.blocks();
        for (&c, members) in &blocks {
            match expected_size(&inst, &blocks, c) {
                Some(want) if want == members.len() => *counted.entry(want).or_default() += 1,
                Some(want) => problems.push(format!("formula {k}: {c} has {} vertices, expected {want}", members.len())),
                None => problems.push(format!("formula {k}: unexpected clique {c}")),
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{} instances, cliques by size {counted:?}", corpus.len()))
    } else {
        failures(problems)
    }
}

fn structure() -> Verdict {
    let mut problems = Vec::new();
    let corpus = all_corpora();
    for (k, f) in corpus.iter().enumerate() {
        let inst = reduce(f).unwrap();
        let r = verify_instance(&inst);
        if !r.passed() {
            problems.push(format!("formula {k}: {:?}", r.failures()));
        }
    }
    if problems.is_empty() {
        Ok(format!("{} instances, all checks pass", corpus.len()))
    } else {
        failures(problems)
    }
}

fn oracles() -> Verdict {
    let mut rng = rng(0x5eed_0007);
    let mut problems = Vec::new();
    let mut feasible = 0;
    for k in 0..SYNTHETIC_INSTANCES {
        let n = rng.gen_range(3..=MAX_PROTO_CLUSTERS);
        let g = if k % 2 == 0 {
            {
            let flips = rng.gen_range(1..=4);
            planted_graph(&mut rng, n, flips)
        }
        } else {
            let density = rng.gen_range(0.2..0.8);
            random_graph(&mut rng, n, density)
        };
        let h = greedy_packing(&mut rng, &g);
        let inst = Instance::synthetic(g.clone(), h.clone());
        let fast = solve_zero_excess(&inst, Some(SOLVE_LIMIT), 1);
        let slow = brute_force_partition_solve(&g, &h);
        match (fast, slow) {
            (Ok(fast), Ok(slow)) => {
                if fast.is_feasible() != slow.is_some() {
                    problems.push(format!("instance {k}: solver {fast:?} vs oracle {}", slow.is_some()));
                }
                if let SolveOutcome::Feasible(s) = &fast {
                    feasible += 1;
                    if !verify_solution(&inst, s).passed() {
                        problems.push(format!("instance {k}: witness rejected"));
                    }
                }
            }
            (a, b) => problems.push(format!("instance {k}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    let mut tight = 0;
    for k in 0..SYNTHETIC_INSTANCES {
        let n = rng.gen_range(3..=10);
        let density = rng.gen_range(0.2..0.8);
        let g = random_graph(&mut rng, n, density);
        let h = greedy_packing(&mut rng, &g);
        let min = brute_force_cluster_editing(&g, usize::MAX).unwrap().expect("unbounded budget").len();
        if min < h.len() {
            problems.push(format!("graph {k}: minimum {min} below packing size {}", h.len()));
        }
        if !h.is_empty() && brute_force_cluster_editing(&g, h.len() - 1).unwrap().is_some() {
            problems.push(format!("graph {k}: edit set under the packing bound"));
        }
        tight += usize::from(min == h.len());
    }
    if problems.is_empty() {
        Ok(format!(
            "{SYNTHETIC_INSTANCES} synthetic instances ({feasible} feasible), {SYNTHETIC_INSTANCES} lower-bound graphs ({tight} tight)"
        ))
    } else {
        failures(problems)
    }
}

fn incidence() -> Verdict {
    let mut by_size: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (n, f) in incidence_corpus() {
        let inst = reduce(&f).unwrap();
        let r = verify_instance(&inst);
        let recorded = r
            .get("incidence")
            .and_then(|c| c.witness.get("max_incidence"))
            .and_then(|v| v.as_u64())
            .expect("incidence recorded") as usize;
        // recount from the packing
        let mut per_vertex: BTreeMap<_, usize> = BTreeMap::new();
        for p in &inst.packing {
            for v in [p.x, p.y, p.z] {
                *per_vertex.entry(v).or_default() += 1;
            }
        }
        let counted = per_vertex.values().copied().max().unwrap_or(0);
        if recorded != counted {
            return Err(format!("n={n}: report records {recorded}, packing has {counted}"));
        }
        *by_size.entry(n).or_default().entry(counted).or_default() += 1;
    }
    let constants: Vec<usize> = by_size.values().flat_map(|m| m.keys().copied()).collect();
    if constants.iter().all(|&c| c == INCIDENCE_CONSTANT) {
        Ok(format!("max incidence {INCIDENCE_CONSTANT} at n = {INCIDENCE_SIZES:?}"))
    } else {
        Err(format!("max incidence by n: {by_size:?}, expected {INCIDENCE_CONSTANT} throughout"))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("completeness round trip", completeness),
        ("soundness round trip", soundness),
        ("feasibility equals satisfiability", equivalence),
        ("triangle packing suite", triangle_packings),
        ("clique size table", size_table),
        ("structural invariants", structure),
        ("oracle equivalence and packing bound", oracles),
        ("constant incidence", incidence),
    ];
    let verdicts: Vec<(Verdict, Duration)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, run)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let v = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
                    (v, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });
    let mut all = true;
    for (k, ((name, _), (verdict, took))) in criteria.iter().zip(verdicts).enumerate() {
        match verdict {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {took:.1?})", k + 1),
            Err(detail) => {
                all = false;
                println!("criterion {} {name}: FAIL ({detail}; {took:.1?})", k + 1);
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
