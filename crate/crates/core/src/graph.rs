//! Graph, P3, packing, and edit-set primitives shared by construction,
//! verification and search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("pair {pair} is shared by packed P3s {first} and {second}")]
    NotDisjoint { pair: Pair, first: Box<PackedP3>, second: Box<PackedP3> },
    #[error("edit {kind} on {pair} is inconsistent with the graph")]
    InconsistentEdit { pair: Pair, kind: EditKind },
    #[error("pair {0} edited twice")]
    DuplicateEdit(Pair),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("cannot parse identifier {0:?}")]
    BadId(String),
}

/// Vertex identifiers carry their construction provenance.
///
/// Ordering is the canonical vertex order used everywhere: variable-gadget
/// vertices, then clause cliques, then transferring cliques, then plain
/// vertices of synthetic graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    /// `v[i][j][p]`: label p of clique K_j in the gadget of variable i.
    Var { var: u32, clique: u32, label: u32 },
    /// `Q[d][k][t]`: t-th vertex of clause clique Q^k_d, k in 1..=4.
    Clause { clause: u32, part: u8, index: u32 },
    /// `T[d][i][t]`: t-th vertex of the transferring clique of variable i in clause d.
    Transfer { clause: u32, var: u32, index: u32 },
    /// `x[k]`: vertex of a synthetic graph.
    Plain(u32),
}

impl VertexId {
    pub fn var(var: usize, clique: usize, label: usize) -> Self {
        VertexId::Var { var: var as u32, clique: clique as u32, label: label as u32 }
    }

    pub fn plain(k: usize) -> Self {
        VertexId::Plain(k as u32)
    }

    /// The construction clique this vertex was created in, if structured.
    pub fn clique(self) -> Option<CliqueId> {
        match self {
            VertexId::Var { var, clique, .. } => Some(CliqueId::Var { var, index: clique }),
            VertexId::Clause { clause, part, .. } => Some(CliqueId::Clause { clause, part }),
            VertexId::Transfer { clause, var, .. } => Some(CliqueId::Transfer { clause, var }),
            VertexId::Plain(_) => None,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VertexId::Var { var, clique, label } => write!(f, "v[{var}][{clique}][{label}]"),
            VertexId::Clause { clause, part, index } => write!(f, "Q[{clause}][{part}][{index}]"),
            VertexId::Transfer { clause, var, index } => write!(f, "T[{clause}][{var}][{index}]"),
            VertexId::Plain(k) => write!(f, "x[{k}]"),
        }
    }
}

/// Parse `P[a][b]...` into the prefix and its bracketed integers.
fn bracketed(s: &str) -> Option<(&str, Vec<u32>)> {
    let open = s.find('[')?;
    let (prefix, mut rest) = s.split_at(open);
    let mut nums = Vec::new();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[')?;
        let close = inner.find(']')?;
        let n: u32 = inner[..close].parse().ok()?;
        if inner[..close].starts_with('+') {
            return None;
        }
        nums.push(n);
        rest = &inner[close + 1..];
    }
    Some((prefix, nums))
}

impl FromStr for VertexId {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadId(s.to_string());
        let (prefix, n) = bracketed(s).ok_or_else(bad)?;
        match (prefix, n.as_slice()) {
            ("v", &[var, clique, label]) => Ok(VertexId::Var { var, clique, label }),
            ("Q", &[clause, part, index]) if (1..=4).contains(&part) => {
                Ok(VertexId::Clause { clause, part: part as u8, index })
            }
            ("T", &[clause, var, index]) => Ok(VertexId::Transfer { clause, var, index }),
            ("x", &[k]) => Ok(VertexId::Plain(k)),
            _ => Err(bad()),
        }
    }
}

/// Identifier of a clique of V(H), the blocks the construction is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CliqueId {
    /// `K[i][j]`
    Var { var: u32, index: u32 },
    /// `Q[d][k]`
    Clause { clause: u32, part: u8 },
    /// `T[d][i]`
    Transfer { clause: u32, var: u32 },
    /// `C[k]`: block of a synthetic instance.
    Plain(u32),
}

impl CliqueId {
    pub fn k(var: usize, index: usize) -> Self {
        CliqueId::Var { var: var as u32, index: index as u32 }
    }

    pub fn q(clause: usize, part: u8) -> Self {
        CliqueId::Clause { clause: clause as u32, part }
    }

    pub fn t(clause: usize, var: usize) -> Self {
        CliqueId::Transfer { clause: clause as u32, var: var as u32 }
    }

    /// Level in the merging model: variable cliques 0, Q1/Q4 1, Q3 2,
    /// Q2 3, transferring cliques 4.
    pub fn level(self) -> u8 {
        match self {
            CliqueId::Var { .. } | CliqueId::Plain(_) => 0,
            CliqueId::Clause { part: 1 | 4, .. } => 1,
            CliqueId::Clause { part: 3, .. } => 2,
            CliqueId::Clause { .. } => 3,
            CliqueId::Transfer { .. } => 4,
        }
    }
}

impl fmt::Display for CliqueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CliqueId::Var { var, index } => write!(f, "K[{var}][{index}]"),
            CliqueId::Clause { clause, part } => write!(f, "Q[{clause}][{part}]"),
            CliqueId::Transfer { clause, var } => write!(f, "T[{clause}][{var}]"),
            CliqueId::Plain(k) => write!(f, "C[{k}]"),
        }
    }
}

impl FromStr for CliqueId {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadId(s.to_string());
        let (prefix, n) = bracketed(s).ok_or_else(bad)?;
        match (prefix, n.as_slice()) {
            ("K", &[var, index]) => Ok(CliqueId::Var { var, index }),
            ("Q", &[clause, part]) if (1..=4).contains(&part) => Ok(CliqueId::Clause { clause, part: part as u8 }),
            ("T", &[clause, var]) => Ok(CliqueId::Transfer { clause, var }),
            ("C", &[k]) => Ok(CliqueId::Plain(k)),
            _ => Err(bad()),
        }
    }
}

/// Unordered pair of distinct vertices, stored in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    a: VertexId,
    b: VertexId,
}

impl Pair {
    /// Panics if `u == v`.
    pub fn new(u: VertexId, v: VertexId) -> Self {
        Pair::try_new(u, v).expect("pair endpoints must be distinct")
    }

    pub fn try_new(u: VertexId, v: VertexId) -> Result<Self, GraphError> {
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Ok(Pair { a: u, b: v }),
            std::cmp::Ordering::Greater => Ok(Pair { a: v, b: u }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(u)),
        }
    }

    pub fn a(self) -> VertexId {
        self.a
    }

    pub fn b(self) -> VertexId {
        self.b
    }

    pub fn contains(self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

/// Simple undirected graph with sorted adjacency.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    edge_count: usize,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) -> bool {
        if self.adj.contains_key(&v) {
            return false;
        }
        self.adj.insert(v, BTreeSet::new());
        true
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    /// Adds the edge (and missing endpoints). Returns whether it was new.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let fresh = self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
        if fresh {
            self.edge_count += 1;
        }
        Ok(fresh)
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        let removed = self.adj.get_mut(&u).is_some_and(|s| s.remove(&v));
        if removed {
            self.adj.get_mut(&v).expect("symmetric adjacency").remove(&u);
            self.edge_count -= 1;
        }
        removed
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = Pair> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, ns)| ns.range((std::ops::Bound::Excluded(u), std::ops::Bound::Unbounded)).map(move |&v| Pair { a: u, b: v }))
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn has_pair_edge(&self, p: Pair) -> bool {
        self.has_edge(p.a, p.b)
    }

    /// Connected components, each sorted, listed by smallest member.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        components_of(self.vertices(), |v| self.neighbors(v).collect())
    }
}

fn components_of(
    vertices: impl Iterator<Item = VertexId>,
    mut neighbors: impl FnMut(VertexId) -> Vec<VertexId>,
) -> Vec<Vec<VertexId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in vertices {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for w in neighbors(u) {
                if seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Var,
    Tra,
    Pad,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Var => "var",
            Role::Tra => "tra",
            Role::Pad => "pad",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "var" => Ok(Role::Var),
            "tra" => Ok(Role::Tra),
            "pad" => Ok(Role::Pad),
            _ => Err(GraphError::BadId(s.to_string())),
        }
    }
}

/// A packed induced P3 x-y-z with center y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackedP3 {
    pub x: VertexId,
    pub y: VertexId,
    pub z: VertexId,
    pub role: Role,
}

impl PackedP3 {
    pub fn new(x: VertexId, y: VertexId, z: VertexId, role: Role) -> Self {
        PackedP3 { x, y, z, role }
    }

    /// `[xy, yz, xz]`: two edges, then the non-edge.
    pub fn pairs(&self) -> [Pair; 3] {
        [Pair::new(self.x, self.y), Pair::new(self.y, self.z), Pair::new(self.x, self.z)]
    }

    /// Orientation-free key: (smaller endpoint, center, larger endpoint).
    pub fn key(&self) -> (VertexId, VertexId, VertexId) {
        if self.x <= self.z {
            (self.x, self.y, self.z)
        } else {
            (self.z, self.y, self.x)
        }
    }

    pub fn is_induced_in(&self, g: &Graph) -> bool {
        self.x != self.y
            && self.y != self.z
            && self.x != self.z
            && g.has_edge(self.x, self.y)
            && g.has_edge(self.y, self.z)
            && !g.has_edge(self.x, self.z)
    }

    pub fn vertices(&self) -> [VertexId; 3] {
        [self.x, self.y, self.z]
    }
}

impl fmt::Display for PackedP3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{} ({})", self.x, self.y, self.z, self.role)
    }
}

pub type Packing = Vec<PackedP3>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EditKind {
    Delete,
    Insert,
}

impl EditKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::Delete => "delete",
            EditKind::Insert => "insert",
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EditKind {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delete" => Ok(EditKind::Delete),
            "insert" => Ok(EditKind::Insert),
            _ => Err(GraphError::BadId(s.to_string())),
        }
    }
}

/// A cluster editing set; each pair is tagged delete (edge) or insert (non-edge).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EditSet {
    edits: BTreeMap<Pair, EditKind>,
}

impl EditSet {
    pub fn new() -> Self {
        EditSet::default()
    }

    pub fn insert(&mut self, pair: Pair, kind: EditKind) -> Result<(), GraphError> {
        if self.edits.insert(pair, kind).is_some() {
            return Err(GraphError::DuplicateEdit(pair));
        }
        Ok(())
    }

    /// Tag the pair from the graph: delete if it is an edge, insert otherwise.
    pub fn toggle(&mut self, g: &Graph, pair: Pair) -> Result<(), GraphError> {
        let kind = if g.has_pair_edge(pair) { EditKind::Delete } else { EditKind::Insert };
        self.insert(pair, kind)
    }

    pub fn remove(&mut self, pair: Pair) -> Option<EditKind> {
        self.edits.remove(&pair)
    }

    pub fn get(&self, pair: Pair) -> Option<EditKind> {
        self.edits.get(&pair).copied()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.edits.contains_key(&pair)
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, EditKind)> + '_ {
        self.edits.iter().map(|(&p, &k)| (p, k))
    }

    pub fn count(&self, kind: EditKind) -> usize {
        self.edits.values().filter(|&&k| k == kind).count()
    }

    /// The edit set whose result has exactly the given blocks as clusters:
    /// edges between blocks are deleted, non-edges inside blocks inserted.
    pub fn for_partition(g: &Graph, block_of: &HashMap<VertexId, usize>) -> Result<Self, GraphError> {
        let mut s = EditSet::new();
        for e in g.edges() {
            let (ba, bb) = (block(block_of, e.a)?, block(block_of, e.b)?);
            if ba != bb {
                s.edits.insert(e, EditKind::Delete);
            }
        }
        let mut blocks: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
        for v in g.vertices() {
            blocks.entry(block(block_of, v)?).or_default().push(v);
        }
        for members in blocks.values() {
            for (k, &u) in members.iter().enumerate() {
                for &v in &members[k + 1..] {
                    if !g.has_edge(u, v) {
                        s.edits.insert(Pair::new(u, v), EditKind::Insert);
                    }
                }
            }
        }
        Ok(s)
    }
}

fn block(block_of: &HashMap<VertexId, usize>, v: VertexId) -> Result<usize, GraphError> {
    block_of.get(&v).copied().ok_or(GraphError::UnknownVertex(v))
}

/// Assignment of every vertex to a clique of V(H).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliquePartition {
    of: BTreeMap<VertexId, CliqueId>,
}

impl CliquePartition {
    pub fn new() -> Self {
        CliquePartition::default()
    }

    pub fn assign(&mut self, v: VertexId, c: CliqueId) {
        self.of.insert(v, c);
    }

    pub fn clique_of(&self, v: VertexId) -> Option<CliqueId> {
        self.of.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.of.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, CliqueId)> + '_ {
        self.of.iter().map(|(&v, &c)| (v, c))
    }

    /// Members of every clique, in vertex order.
    pub fn blocks(&self) -> BTreeMap<CliqueId, Vec<VertexId>> {
        let mut out: BTreeMap<CliqueId, Vec<VertexId>> = BTreeMap::new();
        for (&v, &c) in &self.of {
            out.entry(c).or_default().push(v);
        }
        out
    }
}

/// All induced P3s, each listed once as (x, y, z) with x < z.
pub fn induced_p3s(g: &Graph) -> Vec<(VertexId, VertexId, VertexId)> {
    let mut out = Vec::new();
    for y in g.vertices() {
        let ns: Vec<VertexId> = g.neighbors(y).collect();
        for (k, &x) in ns.iter().enumerate() {
            for &z in &ns[k + 1..] {
                if !g.has_edge(x, z) {
                    out.push((x, y, z));
                }
            }
        }
    }
    out
}

/// G with the edit set applied (symmetric difference).
pub fn apply_edits(g: &Graph, s: &EditSet) -> Result<Graph, GraphError> {
    let mut out = g.clone();
    for (pair, kind) in s.iter() {
        for v in [pair.a, pair.b] {
            if !g.has_vertex(v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        let ok = match kind {
            EditKind::Delete => out.remove_edge(pair.a, pair.b),
            EditKind::Insert => !g.has_pair_edge(pair) && out.add_edge(pair.a, pair.b)?,
        };
        if !ok {
            return Err(GraphError::InconsistentEdit { pair, kind });
        }
    }
    Ok(out)
}

/// Every connected component is a clique.
pub fn is_cluster_graph(g: &Graph) -> bool {
    g.components().iter().all(|comp| {
        let k = comp.len();
        let internal: usize = comp.iter().map(|&v| g.degree(v)).sum::<usize>() / 2;
        internal == k * (k - 1) / 2
    })
}

/// Map from each covered pair to the index of the packed P3 containing it.
pub fn covered_pairs(h: &[PackedP3]) -> Result<BTreeMap<Pair, usize>, GraphError> {
    let mut out = BTreeMap::new();
    for (k, p) in h.iter().enumerate() {
        for pair in p.pairs() {
            if let Some(&prev) = out.get(&pair) {
                return Err(GraphError::NotDisjoint { pair, first: Box::new(h[prev]), second: Box::new(*p) });
            }
            out.insert(pair, k);
        }
    }
    Ok(out)
}

/// Connected components of G restricted to edges no packed P3 contains.
pub fn proto_clusters(g: &Graph, h: &[PackedP3]) -> Vec<Vec<VertexId>> {
    let covered: BTreeSet<Pair> = h.iter().flat_map(PackedP3::pairs).collect();
    components_of(g.vertices(), |v| g.neighbors(v).filter(|&w| !covered.contains(&Pair::new(v, w))).collect())
}

/// Dense index over a graph's vertices with bitset adjacency, for the
/// quadratic scans of the verifier and the solver.
#[derive(Clone, Debug)]
pub struct DenseGraph {
    pub ids: Vec<VertexId>,
    pub index: HashMap<VertexId, usize>,
    words: usize,
    bits: Vec<u64>,
}

impl DenseGraph {
    pub fn new(g: &Graph) -> Self {
        let ids: Vec<VertexId> = g.vertices().collect();
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let words = ids.len().div_ceil(64);
        let mut bits = vec![0u64; words * ids.len()];
        for e in g.edges() {
            let (u, v) = (index[&e.a], index[&e.b]);
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        DenseGraph { ids, index, words, bits }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn idx(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }
}

/// Disjoint-set forest over `0..n` with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}
