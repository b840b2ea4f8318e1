//! Edge-disjoint triangle packings of K_{V,W} plus the W-clique over F_p
//! that avoid a prescribed pair set F, and their conversion into padding P3s.
//!
//! Problems are index based: V is `0..v_count`, W is `0..w_count`, and F
//! holds `(v, w)` index pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ffield::is_prime;
use crate::graph::{CliqueId, Graph, PackedP3, Role, VertexId};
use crate::merging_model::MergingModel;
use crate::reduction::Draft;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PaddingError {
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("|V| = {v} exceeds p = {p}")]
    TooManyV { v: usize, p: usize },
    #[error("|W| = {w} but 2p = {}", 2 * .p)]
    WrongW { w: usize, p: usize },
    #[error("F is empty")]
    EmptyF,
    #[error("F pair ({0}, {1}) is out of range or repeated")]
    BadPair(usize, usize),
    #[error("component of F is neither a P3 centered in V nor a C8: {0}")]
    BadComponent(String),
    #[error("ran out of labels")]
    LabelExhausted,
    #[error("padding conflict: {0}")]
    Conflict(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddingProblem {
    pub p: usize,
    pub v_count: usize,
    pub w_count: usize,
    pub f: Vec<(usize, usize)>,
}

/// A triangle with one V vertex, `w1` from the first half of W and `w2`
/// from the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangle {
    pub v: usize,
    pub w1: usize,
    pub w2: usize,
}

enum Component {
    Path { center: usize, ends: [usize; 2] },
    /// Alternating walk a0 b0 a1 b1 a2 b2 a3 b3 from the smallest V vertex
    /// towards its smaller W neighbor.
    Cycle([usize; 8]),
}

fn classify(prob: &PaddingProblem) -> Result<Vec<Component>, PaddingError> {
    let mut v_adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut w_adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for &(v, w) in &prob.f {
        if v >= prob.v_count || w >= prob.w_count || !seen.insert((v, w)) {
            return Err(PaddingError::BadPair(v, w));
        }
        v_adj.entry(v).or_default().push(w);
        w_adj.entry(w).or_default().push(v);
    }
    for ns in v_adj.values_mut().chain(w_adj.values_mut()) {
        ns.sort_unstable();
    }
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for (&v, ws) in &v_adj {
        if done.contains(&v) {
            continue;
        }
        let describe = || format!("at V vertex {v}");
        if ws.len() != 2 {
            return Err(PaddingError::BadComponent(describe()));
        }
        if ws.iter().all(|w| w_adj[w].len() == 1) {
            done.insert(v);
            out.push(Component::Path { center: v, ends: [ws[0], ws[1]] });
            continue;
        }
        // walk the cycle a0 b0 a1 b1 ...
        let mut walk = vec![v, ws[0]];
        let mut prev_v = v;
        loop {
            let w = *walk.last().expect("nonempty walk");
            let vs = &w_adj[&w];
            if vs.len() != 2 {
                return Err(PaddingError::BadComponent(describe()));
            }
            let next_v = if vs[0] == prev_v { vs[1] } else { vs[0] };
            if next_v == v {
                break;
            }
            let nws = &v_adj[&next_v];
            if nws.len() != 2 || walk.len() >= 8 {
                return Err(PaddingError::BadComponent(describe()));
            }
            let next_w = if nws[0] == w { nws[1] } else { nws[0] };
            walk.push(next_v);
            walk.push(next_w);
            prev_v = next_v;
        }
        if walk.len() != 8 {
            return Err(PaddingError::BadComponent(describe()));
        }
        for k in (0..8).step_by(2) {
            done.insert(walk[k]);
        }
        out.push(Component::Cycle(walk.try_into().expect("length 8")));
    }
    Ok(out)
}

/// Labels of V, W1 and W2 by F_p.
struct Labeling {
    v_at: Vec<Option<usize>>,
    w1_at: Vec<Option<usize>>,
    w2_at: Vec<Option<usize>>,
    w_used: Vec<bool>,
}

impl Labeling {
    fn new(p: usize, w_count: usize) -> Self {
        Labeling { v_at: vec![None; p], w1_at: vec![None; p], w2_at: vec![None; p], w_used: vec![false; w_count] }
    }

    fn set_w(&mut self, second: bool, label: usize, w: usize) {
        let slot = if second { &mut self.w2_at[label] } else { &mut self.w1_at[label] };
        debug_assert!(slot.is_none());
        *slot = Some(w);
        self.w_used[w] = true;
    }

    fn smallest_free_v(&self) -> Result<usize, PaddingError> {
        self.v_at.iter().position(Option::is_none).ok_or(PaddingError::LabelExhausted)
    }
}

fn label(prob: &PaddingProblem, comps: &[Component]) -> Result<Labeling, PaddingError> {
    let p = prob.p;
    let mut lab = Labeling::new(p, prob.w_count);
    let mut v_used = vec![false; prob.v_count];
    let in_f: BTreeSet<usize> = prob.f.iter().map(|&(_, w)| w).collect();
    let mut free_w = (0..prob.w_count).filter(|w| !in_f.contains(w));
    let mut h = 0;
    for comp in comps {
        if let Component::Cycle([a0, b0, a1, b1, a2, b2, a3, b3]) = *comp {
            if h + 3 >= p {
                return Err(PaddingError::LabelExhausted);
            }
            for (v, l) in [(a0, h), (a1, h + 2), (a2, h + 3), (a3, h + 1)] {
                lab.v_at[l] = Some(v);
                v_used[v] = true;
            }
            lab.set_w(true, h + 2, b0);
            lab.set_w(false, h + 2, b1);
            lab.set_w(true, h + 1, b2);
            lab.set_w(false, h + 1, b3);
            for (second, l) in [(false, h), (false, h + 3), (true, h), (true, h + 3)] {
                let w = free_w.next().ok_or(PaddingError::LabelExhausted)?;
                lab.set_w(second, l, w);
            }
            h += 4;
        }
    }
    for comp in comps {
        if let Component::Path { center, ends } = *comp {
            let l = lab.smallest_free_v()?;
            lab.v_at[l] = Some(center);
            v_used[center] = true;
            lab.set_w(false, l, ends[0]);
            lab.set_w(true, l, ends[1]);
        }
    }
    for v in (0..prob.v_count).filter(|&v| !v_used[v]) {
        let l = lab.smallest_free_v()?;
        lab.v_at[l] = Some(v);
    }
    for w in 0..prob.w_count {
        if lab.w_used[w] {
            continue;
        }
        if let Some(l) = lab.w1_at.iter().position(Option::is_none) {
            lab.set_w(false, l, w);
        } else {
            let l = lab.w2_at.iter().position(Option::is_none).ok_or(PaddingError::LabelExhausted)?;
            lab.set_w(true, l, w);
        }
    }
    Ok(lab)
}

/// Label triples (i, j, k) of the covering family: j - i = k - j over F_p
/// for odd p; for p = 2, where 2 has no inverse, the family k = i + j.
pub fn cover_triangles(p: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            let k = if p == 2 { (i + j) % 2 } else { (2 * j + p - i) % p };
            out.push((i, j, k));
        }
    }
    out
}

fn validate(prob: &PaddingProblem, exact_v: bool) -> Result<(), PaddingError> {
    if !is_prime(prob.p as u32) {
        return Err(PaddingError::NotPrime(prob.p));
    }
    if prob.v_count > prob.p || (exact_v && prob.v_count != prob.p) {
        return Err(PaddingError::TooManyV { v: prob.v_count, p: prob.p });
    }
    if prob.w_count != 2 * prob.p {
        return Err(PaddingError::WrongW { w: prob.w_count, p: prob.p });
    }
    if prob.f.is_empty() {
        return Err(PaddingError::EmptyF);
    }
    Ok(())
}

/// Packing for |V| = p.
pub fn lemma1_pack(prob: &PaddingProblem) -> Result<Vec<Triangle>, PaddingError> {
    validate(prob, true)?;
    let comps = classify(prob)?;
    let lab = label(prob, &comps)?;
    let p = prob.p;
    let labels: Vec<(usize, usize, usize)> = if p == 2 {
        // covering by progressions degenerates in characteristic 2
        let with_path: BTreeSet<usize> = comps
            .iter()
            .filter_map(|c| match *c {
                Component::Path { center, .. } => lab.v_at.iter().position(|&v| v == Some(center)),
                Component::Cycle(_) => None,
            })
            .collect();
        (0..2)
            .flat_map(|i| {
                if with_path.contains(&i) {
                    vec![(i, 1 - i, 1 - i)]
                } else {
                    vec![(i, 0, 1), (i, 1, 0)]
                }
            })
            .collect()
    } else {
        let mut excluded = BTreeSet::new();
        let mut h = 0;
        for comp in &comps {
            if let Component::Cycle(_) = comp {
                excluded.extend([(h, h + 1, h + 2), (h + 1, h + 1, h + 1), (h + 2, h + 2, h + 2), (h + 3, h + 2, h + 1)]);
                h += 4;
            }
        }
        for comp in &comps {
            if let Component::Path { center, .. } = comp {
                let l = lab.v_at.iter().position(|&v| v == Some(*center)).expect("labeled");
                excluded.insert((l, l, l));
            }
        }
        cover_triangles(p).into_iter().filter(|t| !excluded.contains(t)).collect()
    };
    let mut out: Vec<Triangle> = labels
        .into_iter()
        .map(|(i, j, k)| Triangle {
            v: lab.v_at[i].expect("bijective labels"),
            w1: lab.w1_at[j].expect("bijective labels"),
            w2: lab.w2_at[k].expect("bijective labels"),
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Packing for |V| <= p: extend V by dummies, pack, drop dummy triangles.
pub fn corollary_pack(prob: &PaddingProblem) -> Result<Vec<Triangle>, PaddingError> {
    validate(prob, false)?;
    let extended = PaddingProblem { v_count: prob.p, ..prob.clone() };
    let mut tris = lemma1_pack(&extended)?;
    tris.retain(|t| t.v < prob.v_count);
    Ok(tris)
}

/// Whether W stays connected through the W-pairs no triangle uses.
pub fn residual_connected(w_count: usize, tris: &[Triangle]) -> bool {
    let used: BTreeSet<(usize, usize)> = tris.iter().map(|t| (t.w1.min(t.w2), t.w1.max(t.w2))).collect();
    let mut seen = vec![false; w_count];
    let mut stack = vec![0];
    if w_count == 0 {
        return true;
    }
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..w_count {
            if !seen[v] && u != v && !used.contains(&(u.min(v), u.max(v))) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Turns each triangle v w1 w2 into the P3 v-w1-w2 by adding edge v w1.
/// W must already be a clique.
pub fn triangles_to_p3s(
    graph: &mut Graph,
    v_ids: &[VertexId],
    w_ids: &[VertexId],
    tris: &[Triangle],
) -> Result<Vec<PackedP3>, PaddingError> {
    let mut out = Vec::with_capacity(tris.len());
    for t in tris {
        let (v, w1, w2) = (v_ids[t.v], w_ids[t.w1], w_ids[t.w2]);
        if graph.has_edge(v, w1) || graph.has_edge(v, w2) || !graph.has_edge(w1, w2) {
            return Err(PaddingError::Conflict(format!("triangle {v} {w1} {w2}")));
        }
        graph.add_edge(v, w1).map_err(|e| PaddingError::Conflict(e.to_string()))?;
        out.push(PackedP3::new(v, w1, w2, Role::Pad));
    }
    Ok(out)
}

/// Outcome of padding one clique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadReport {
    pub clique: CliqueId,
    pub p: usize,
    pub v_count: usize,
    pub size: usize,
    pub p3_count: usize,
}

/// Grows `clique` to 2p vertices and covers every pair between it and its
/// out-neighbors that no transferring P3 covers.
pub fn pad_clique(draft: &mut Draft, mm: &MergingModel, clique: CliqueId) -> Result<PadReport, PaddingError> {
    let v_ids: Vec<VertexId> = {
        let mut ids: Vec<VertexId> =
            mm.out_neighbors(clique).into_iter().flat_map(|c| draft.members(c).to_vec()).collect();
        ids.sort_unstable();
        ids
    };
    let current = draft.clique_len(clique);
    let mut p = crate::ffield::smallest_prime_geq(v_ids.len() as u32) as usize;
    while 2 * p < current {
        p = crate::ffield::smallest_prime_geq(p as u32 + 1) as usize;
    }
    draft.grow_clique(clique, 2 * p);
    let w_ids: Vec<VertexId> = draft.members(clique).to_vec();
    let v_index: HashMap<VertexId, usize> = v_ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let w_index: HashMap<VertexId, usize> = w_ids.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    let mut f = Vec::new();
    for p3 in draft.packing_iter().filter(|p3| p3.role == Role::Tra) {
        for pair in p3.pairs() {
            let (a, b) = (pair.a(), pair.b());
            if let (Some(&v), Some(&w)) = (v_index.get(&a), w_index.get(&b)) {
                f.push((v, w));
            } else if let (Some(&v), Some(&w)) = (v_index.get(&b), w_index.get(&a)) {
                f.push((v, w));
            }
        }
    }
    f.sort_unstable();
    let prob = PaddingProblem { p, v_count: v_ids.len(), w_count: w_ids.len(), f };
    let tris = corollary_pack(&prob)?;
    let p3s = triangles_to_p3s(&mut draft.graph, &v_ids, &w_ids, &tris)?;
    let p3_count = p3s.len();
    for p3 in p3s {
        draft.insert_p3(p3).map_err(|e| PaddingError::Conflict(e.to_string()))?;
    }
    Ok(PadReport { clique, p, v_count: v_ids.len(), size: 2 * p, p3_count })
}

/// Pair-level audit of a packing against its problem. Returns a list of
/// violations; empty means the packing is valid.
pub fn audit(prob: &PaddingProblem, tris: &[Triangle], real_v: usize) -> Vec<String> {
    let mut issues = Vec::new();
    let f: BTreeSet<(usize, usize)> = prob.f.iter().copied().collect();
    let mut vw: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ww: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for t in tris {
        if t.v >= real_v || t.w1 >= prob.w_count || t.w2 >= prob.w_count || t.w1 == t.w2 {
            issues.push(format!("malformed triangle {t:?}"));
            continue;
        }
        *vw.entry((t.v, t.w1)).or_default() += 1;
        *vw.entry((t.v, t.w2)).or_default() += 1;
        *ww.entry((t.w1.min(t.w2), t.w1.max(t.w2))).or_default() += 1;
    }
    for v in 0..real_v {
        for w in 0..prob.w_count {
            let n = vw.get(&(v, w)).copied().unwrap_or(0);
            let want = usize::from(!f.contains(&(v, w)));
            if n != want {
                issues.push(format!("pair (v{v}, w{w}) covered {n} times, expected {want}"));
            }
        }
    }
    for (&(a, b), &n) in &ww {
        if n > 1 {
            issues.push(format!("W pair ({a}, {b}) used {n} times"));
        }
    }
    if !residual_connected(prob.w_count, tris) {
        issues.push("residual W graph disconnected".to_string());
    }
    issues
}
