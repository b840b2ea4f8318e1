//! Corpus generators and independent checkers shared by the integration
//! tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ceamp::formula::{brute_force_sat, Clause, Formula, Literal};
use ceamp::graph::{induced_p3s, Graph, PackedP3, Pair, Role, VertexId};
use ceamp::padding::Triangle;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One random 3-CNF with `m` clauses of three distinct variables out of `n`.
pub fn random_formula(rng: &mut impl Rng, n: usize, m: usize) -> Formula {
    let vars: Vec<usize> = (0..n).collect();
    let clauses = (0..m)
        .map(|_| {
            let picked: Vec<usize> = vars.choose_multiple(rng, 3).copied().collect();
            Clause::new(picked.into_iter().map(|v| Literal::new(v, rng.gen())).collect())
        })
        .collect();
    Formula::new(n, clauses)
}

/// Fewest clauses in which `n` variables can each occur twice.
pub fn min_clauses(n: usize) -> usize {
    (2 * n).div_ceil(3)
}

/// Rejection-samples a conforming formula with every variable occurring and
/// the requested satisfiability (`None` accepts either).
pub fn conforming_formula(rng: &mut impl Rng, n: usize, m: usize, sat: Option<bool>) -> Formula {
    assert!(m >= min_clauses(n), "{n} variables cannot all occur twice in {m} clauses");
    loop {
        let f = random_formula(rng, n, m);
        if !f.is_conforming() || f.occurrence_counts().contains(&0) {
            continue;
        }
        if sat.is_none_or(|want| brute_force_sat(&f).expect("small formula").is_some() == want) {
            return f;
        }
    }
}

/// All eight sign patterns over three variables.
pub fn complete_contradiction(n: usize, vars: [usize; 3]) -> Formula {
    let clauses = (0..8u32)
        .map(|mask| Clause::new((0..3).map(|k| Literal::new(vars[k], mask >> k & 1 == 1)).collect()))
        .collect();
    Formula::new(n, clauses)
}

/// Unsatisfiable 8-clause formula on four variables from a random perfect
/// matching of the 4-cube: each matched edge {a, b} becomes the clause that
/// is false exactly on a and b.
pub fn matching_contradiction(rng: &mut impl Rng) -> Formula {
    loop {
        let mut mate = [usize::MAX; 16];
        if !match_cube(rng, &mut mate) {
            continue;
        }
        let mut clauses = Vec::new();
        for a in 0..16 {
            let b = mate[a];
            if a < b {
                let free = (a ^ b).trailing_zeros() as usize;
                let lits = (0..4).filter(|&j| j != free).map(|j| Literal::new(j, a >> j & 1 == 0)).collect();
                clauses.push(Clause::new(lits));
            }
        }
        clauses.shuffle(rng);
        let f = Formula::new(4, clauses);
        if f.is_conforming() && !f.occurrence_counts().contains(&0) {
            return f;
        }
    }
}

fn match_cube(rng: &mut impl Rng, mate: &mut [usize; 16]) -> bool {
    let Some(a) = (0..16).find(|&v| mate[v] == usize::MAX) else {
        return true;
    };
    let mut dirs = [0, 1, 2, 3];
    dirs.shuffle(rng);
    for d in dirs {
        let b = a ^ (1 << d);
        if mate[b] == usize::MAX {
            mate[a] = b;
            mate[b] = a;
            if match_cube(rng, mate) {
                return true;
            }
            mate[a] = usize::MAX;
            mate[b] = usize::MAX;
        }
    }
    false
}

/// Independent truth-table satisfiability.
pub fn satisfiable(f: &Formula) -> bool {
    (0u64..1 << f.variable_count).any(|mask| {
        f.clauses.iter().all(|c| c.literals.iter().any(|l| (mask >> l.var & 1 == 1) == l.positive))
    })
}

/// F with `c8s` alternating 8-cycles and `p3s` paths centered in V, placed on
/// randomly chosen vertices of V = 0..p and W = 0..2p.
pub fn random_f(rng: &mut impl Rng, p: usize, c8s: usize, p3s: usize) -> Vec<(usize, usize)> {
    assert!(4 * c8s + p3s <= p);
    let mut vs: Vec<usize> = (0..p).collect();
    let mut ws: Vec<usize> = (0..2 * p).collect();
    vs.shuffle(rng);
    ws.shuffle(rng);
    let (mut vs, mut ws) = (vs.into_iter(), ws.into_iter());
    let mut f = Vec::new();
    for _ in 0..c8s {
        let v: Vec<usize> = vs.by_ref().take(4).collect();
        let w: Vec<usize> = ws.by_ref().take(4).collect();
        for k in 0..4 {
            f.push((v[k], w[k]));
            f.push((v[(k + 1) % 4], w[k]));
        }
    }
    for _ in 0..p3s {
        let v = vs.next().expect("enough V");
        f.push((v, ws.next().expect("enough W")));
        f.push((v, ws.next().expect("enough W")));
    }
    f.shuffle(rng);
    f
}

/// Exhaustive pair audit of a triangle packing of K_{V,W} plus the clique
/// on W, with V = 0..v_count and W = 0..w_count.
pub fn triangle_violations(v_count: usize, w_count: usize, f: &[(usize, usize)], tris: &[Triangle]) -> Vec<String> {
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
    enum Node {
        V(usize),
        W(usize),
    }
    let key = |a: Node, b: Node| if a < b { (a, b) } else { (b, a) };
    let mut uses: HashMap<(Node, Node), usize> = HashMap::new();
    let mut out = Vec::new();
    for t in tris {
        if t.v >= v_count || t.w1 >= w_count || t.w2 >= w_count || t.w1 == t.w2 {
            out.push(format!("malformed {t:?}"));
            continue;
        }
        let (v, a, b) = (Node::V(t.v), Node::W(t.w1), Node::W(t.w2));
        for pair in [key(v, a), key(v, b), key(a, b)] {
            *uses.entry(pair).or_default() += 1;
        }
    }
    for (pair, &n) in &uses {
        if n > 1 {
            out.push(format!("{pair:?} used by {n} triangles"));
        }
    }
    let f: BTreeSet<(usize, usize)> = f.iter().copied().collect();
    for v in 0..v_count {
        for w in 0..w_count {
            let n = uses.get(&key(Node::V(v), Node::W(w))).copied().unwrap_or(0);
            let want = usize::from(!f.contains(&(v, w)));
            if n != want {
                out.push(format!("(v{v}, w{w}) covered {n} times, expected {want}"));
            }
        }
    }
    // W stays connected through the W pairs no triangle uses
    let mut seen = vec![false; w_count];
    let mut queue = VecDeque::from([0]);
    if w_count > 0 {
        seen[0] = true;
    }
    while let Some(a) = queue.pop_front() {
        for b in 0..w_count {
            if !seen[b] && a != b && !uses.contains_key(&key(Node::W(a), Node::W(b))) {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        out.push("residual W graph disconnected".into());
    }
    out
}

pub fn x(k: usize) -> VertexId {
    VertexId::plain(k)
}

/// G(n, density) on plain vertices.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> Graph {
    let mut g = Graph::new();
    for u in 0..n {
        g.add_vertex(x(u));
        for v in 0..u {
            if rng.gen_bool(density) {
                g.add_edge(x(u), x(v)).unwrap();
            }
        }
    }
    g
}

/// A random cluster graph with `flips` random pairs toggled.
pub fn planted_graph(rng: &mut impl Rng, n: usize, flips: usize) -> Graph {
    let blocks = rng.gen_range(1..=n.max(1));
    let label: Vec<usize> = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
    let mut g = Graph::new();
    for u in 0..n {
        g.add_vertex(x(u));
        for v in 0..u {
            if label[u] == label[v] {
                g.add_edge(x(u), x(v)).unwrap();
            }
        }
    }
    for _ in 0..flips {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !g.remove_edge(x(u), x(v)) {
            g.add_edge(x(u), x(v)).unwrap();
        }
    }
    g
}

/// Greedy modification-disjoint packing of induced P3s in random order.
pub fn greedy_packing(rng: &mut impl Rng, g: &Graph) -> Vec<PackedP3> {
    let mut cands = induced_p3s(g);
    cands.shuffle(rng);
    let mut used: BTreeSet<Pair> = BTreeSet::new();
    let mut out = Vec::new();
    for (a, center, b) in cands {
        let p = PackedP3::new(a, center, b, Role::Pad);
        if p.pairs().iter().all(|q| !used.contains(q)) {
            used.extend(p.pairs());
            out.push(p);
        }
    }
    out
}
