//! Exact zero-excess decision over merge/divide choices between
//! proto-clusters, and two brute-force oracles.
//!
//! With |S| = |H| every packed P3 receives exactly one edit and no uncovered
//! pair is edited. Uncovered edges therefore stay, so each proto-cluster ends
//! up inside a single cluster; the search only decides which proto-clusters
//! share a cluster.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::graph::{covered_pairs, proto_clusters, DenseGraph, EditSet, Graph, GraphError, PackedP3, Pair, VertexId};
use crate::reduction::Instance;
use crate::verifier::verify_solution;

/// Size guard of both brute-force oracles.
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("{count} {what} exceed the brute-force limit of {limit}")]
    TooLarge { what: &'static str, count: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("search produced a witness that fails verification: {0}")]
    WitnessRejected(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Feasible(EditSet),
    Infeasible,
    Timeout,
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible(_))
    }
}

const UNKNOWN: u8 = 0;
const MERGED: u8 = 1;
const DIVIDED: u8 = 2;

/// One pair of a packed P3, seen at proto-cluster level.
#[derive(Clone, Copy, Debug)]
enum Slot {
    /// Both ends in one proto-cluster: edited iff the pair is a non-edge.
    Fixed(bool),
    /// Ends in two proto-clusters joined by decision `var`.
    Decision { var: usize, edge: bool },
}

/// Immutable description of the decision problem.
struct Model {
    units: Vec<Vec<VertexId>>,
    unit_of: HashMap<VertexId, usize>,
    /// Linked proto-cluster pairs in canonical order.
    pairs: Vec<(usize, usize)>,
    pair_index: HashMap<(usize, usize), usize>,
    /// Every vertex pair between the two proto-clusters is covered.
    mergeable: Vec<bool>,
    constraints: Vec<[Slot; 3]>,
    watches: Vec<Vec<usize>>,
    /// Per proto-cluster: linked partners and the deciding variable.
    links: Vec<Vec<(usize, usize)>>,
    /// Some internal non-edge of a proto-cluster is uncovered.
    hopeless: bool,
}

impl Model {
    fn build(g: &Graph, h: &[PackedP3]) -> Result<Self, SolverError> {
        let covered = covered_pairs(h)?;
        let units = proto_clusters(g, h);
        let mut unit_of = HashMap::new();
        for (k, members) in units.iter().enumerate() {
            for &v in members {
                unit_of.insert(v, k);
            }
        }
        let mut hopeless = false;
        for members in &units {
            for (k, &u) in members.iter().enumerate() {
                for &v in &members[k + 1..] {
                    if !g.has_edge(u, v) && !covered.contains_key(&Pair::new(u, v)) {
                        hopeless = true;
                    }
                }
            }
        }
        let mut linked: HashMap<(usize, usize), usize> = HashMap::new();
        for pair in covered.keys() {
            let (a, b) = (unit_of[&pair.a()], unit_of[&pair.b()]);
            if a != b {
                *linked.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut pairs: Vec<(usize, usize)> = linked.keys().copied().collect();
        pairs.sort_unstable();
        let pair_index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let mergeable = pairs.iter().map(|&(a, b)| linked[&(a, b)] == units[a].len() * units[b].len()).collect();
        let mut links = vec![Vec::new(); units.len()];
        for (k, &(a, b)) in pairs.iter().enumerate() {
            links[a].push((b, k));
            links[b].push((a, k));
        }
        let mut constraints = Vec::with_capacity(h.len());
        let mut watches = vec![Vec::new(); pairs.len()];
        for p in h {
            let slots = p.pairs().map(|pair| {
                let (a, b) = (unit_of[&pair.a()], unit_of[&pair.b()]);
                let edge = g.has_edge(pair.a(), pair.b());
                if a == b {
                    Slot::Fixed(!edge)
                } else {
                    Slot::Decision { var: pair_index[&(a.min(b), a.max(b))], edge }
                }
            });
            let c = constraints.len();
            for s in slots {
                if let Slot::Decision { var, .. } = s {
                    if watches[var].last() != Some(&c) {
                        watches[var].push(c);
                    }
                }
            }
            constraints.push(slots);
        }
        Ok(Model { units, unit_of, pairs, pair_index, mergeable, constraints, watches, links, hopeless })
    }

    fn var(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index.get(&(a.min(b), a.max(b))).copied()
    }
}

#[derive(Clone)]
enum Undo {
    Set(usize),
    /// `count` units moved from component `from` into component `into`.
    Merge { into: usize, from: usize, count: usize },
}

struct Conflict;

/// Search state: decision values plus the components of the merged relation.
#[derive(Clone)]
struct State {
    val: Vec<u8>,
    comp: Vec<usize>,
    members: Vec<Vec<usize>>,
    trail: Vec<Undo>,
    queue: Vec<usize>,
}

impl State {
    fn new(m: &Model) -> Self {
        let n = m.units.len();
        State {
            val: vec![UNKNOWN; m.pairs.len()],
            comp: (0..n).collect(),
            members: (0..n).map(|u| vec![u]).collect(),
            trail: Vec::new(),
            queue: Vec::new(),
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            match self.trail.pop().expect("non-empty trail") {
                Undo::Set(var) => self.val[var] = UNKNOWN,
                Undo::Merge { into, from, count } => {
                    let at = self.members[into].len() - count;
                    let moved: Vec<usize> = self.members[into].drain(at..).collect();
                    for &u in &moved {
                        self.comp[u] = from;
                    }
                    self.members[from] = moved;
                }
            }
        }
        self.queue.clear();
    }

    fn set(&mut self, var: usize, value: u8) -> Result<(), Conflict> {
        match self.val[var] {
            UNKNOWN => {
                self.val[var] = value;
                self.trail.push(Undo::Set(var));
                self.queue.push(var);
                Ok(())
            }
            v if v == value => Ok(()),
            _ => Err(Conflict),
        }
    }

    /// Whether two distinct components can never share a cluster.
    fn apart(&self, m: &Model, x: usize, y: usize) -> bool {
        self.members[x].iter().any(|&a| {
            self.members[y].iter().any(|&b| match m.var(a, b) {
                Some(var) => !m.mergeable[var] || self.val[var] == DIVIDED,
                None => true,
            })
        })
    }

    /// Marks every undecided pair between two apart components divided.
    fn divide_components(&mut self, m: &Model, x: usize, y: usize) -> Result<(), Conflict> {
        let pending: Vec<usize> = self.members[x]
            .iter()
            .flat_map(|&a| self.members[y].iter().filter_map(move |&b| m.var(a, b)))
            .collect();
        for var in pending {
            self.set(var, DIVIDED)?;
        }
        Ok(())
    }

    fn merge_components(&mut self, m: &Model, x: usize, y: usize) -> Result<(), Conflict> {
        if self.apart(m, x, y) {
            return Err(Conflict);
        }
        let (into, from) = if self.members[x].len() >= self.members[y].len() { (x, y) } else { (y, x) };
        let moved = std::mem::take(&mut self.members[from]);
        let mut cross = Vec::new();
        for &b in &moved {
            for &a in &self.members[into] {
                cross.push(m.var(a, b).expect("mergeable components are fully linked"));
            }
        }
        for &u in &moved {
            self.comp[u] = into;
        }
        self.trail.push(Undo::Merge { into, from, count: moved.len() });
        self.members[into].extend(moved);
        for var in cross {
            self.set(var, MERGED)?;
        }
        // components now unreachable from the grown one
        let near: BTreeSet<usize> = self.members[into]
            .iter()
            .flat_map(|&u| m.links[u].iter().map(|&(w, _)| self.comp[w]))
            .filter(|&c| c != into)
            .collect();
        for y in near {
            if self.apart(m, into, y) {
                self.divide_components(m, into, y)?;
            }
        }
        Ok(())
    }

    /// Forces whatever the exactly-one-edit rule of packed P3 `c` implies.
    fn check_constraint(&mut self, m: &Model, c: usize) -> Result<(), Conflict> {
        let slots = m.constraints[c];
        let (mut free, mut n) = ([0usize; 3], 0);
        for s in slots {
            if let Slot::Decision { var, .. } = s {
                if self.val[var] == UNKNOWN && !free[..n].contains(&var) {
                    free[n] = var;
                    n += 1;
                }
            }
        }
        let mut seen = [[false; 2]; 3];
        let mut any = false;
        for mask in 0..1u32 << n {
            let merged = |var: usize| match free[..n].iter().position(|&f| f == var) {
                Some(k) => mask >> k & 1 == 1,
                None => self.val[var] == MERGED,
            };
            let edits = slots
                .iter()
                .filter(|s| match **s {
                    Slot::Fixed(e) => e,
                    Slot::Decision { var, edge } => merged(var) != edge,
                })
                .count();
            if edits == 1 {
                any = true;
                for (k, seen) in seen.iter_mut().enumerate().take(n) {
                    seen[(mask >> k & 1) as usize] = true;
                }
            }
        }
        if !any {
            return Err(Conflict);
        }
        for k in 0..n {
            match seen[k] {
                [true, false] => self.set(free[k], DIVIDED)?,
                [false, true] => self.set(free[k], MERGED)?,
                _ => {}
            }
        }
        Ok(())
    }

    fn propagate(&mut self, m: &Model, clock: &Clock) -> Result<(), Stop> {
        while let Some(var) = self.queue.pop() {
            clock.tick()?;
            let (a, b) = m.pairs[var];
            let (x, y) = (self.comp[a], self.comp[b]);
            if self.val[var] == MERGED {
                if x != y {
                    self.merge_components(m, x, y)?;
                }
            } else if x == y {
                return Err(Stop::Conflict);
            } else {
                self.divide_components(m, x, y)?;
            }
            for k in 0..m.watches[var].len() {
                self.check_constraint(m, m.watches[var][k])?;
            }
        }
        Ok(())
    }

    fn first_open(&self, from: usize) -> Option<usize> {
        (from..self.val.len()).find(|&v| self.val[v] == UNKNOWN)
    }
}

enum Stop {
    Conflict,
    Timeout,
}

impl From<Conflict> for Stop {
    fn from(_: Conflict) -> Self {
        Stop::Conflict
    }
}

/// Deadline and cross-thread cancellation, polled every few hundred steps.
struct Clock {
    deadline: Option<Instant>,
    cancel: AtomicBool,
    steps: AtomicUsize,
}

impl Clock {
    fn new(limit: Option<Duration>) -> Self {
        Clock { deadline: limit.map(|d| Instant::now() + d), cancel: AtomicBool::new(false), steps: AtomicUsize::new(0) }
    }

    fn tick(&self) -> Result<(), Stop> {
        let n = self.steps.fetch_add(1, Ordering::Relaxed);
        if n.is_multiple_of(256) {
            if self.cancel.load(Ordering::Relaxed) {
                return Err(Stop::Timeout);
            }
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.cancel.store(true, Ordering::Relaxed);
                return Err(Stop::Timeout);
            }
        }
        Ok(())
    }
}

enum Found {
    Solution(State),
    Exhausted,
    Timeout,
}

/// Depth-first search from `state`, merge before divide.
fn search(m: &Model, mut state: State, clock: &Clock) -> Found {
    struct Frame {
        var: usize,
        trail: usize,
        divided_tried: bool,
    }
    let mut stack: Vec<Frame> = Vec::new();
    let mut cursor = 0;
    loop {
        let Some(var) = state.first_open(cursor) else {
            return Found::Solution(state);
        };
        cursor = var;
        stack.push(Frame { var, trail: state.trail.len(), divided_tried: false });
        let mut result = state.set(var, MERGED).map_err(Stop::from).and_then(|_| state.propagate(m, clock));
        loop {
            match result {
                Ok(()) => break,
                Err(Stop::Timeout) => return Found::Timeout,
                Err(Stop::Conflict) => {}
            }
            loop {
                let Some(frame) = stack.last_mut() else {
                    return Found::Exhausted;
                };
                state.undo_to(frame.trail);
                if frame.divided_tried {
                    stack.pop();
                    continue;
                }
                frame.divided_tried = true;
                let var = frame.var;
                cursor = var;
                result = state.set(var, DIVIDED).map_err(Stop::from).and_then(|_| state.propagate(m, clock));
                break;
            }
        }
    }
}

/// Open states after branching on the first decisions, in search order.
fn frontier(m: &Model, root: State, want: usize, clock: &Clock) -> Result<Vec<State>, Stop> {
    let mut open = vec![root];
    while open.len() < want {
        let mut next = Vec::with_capacity(open.len() * 2);
        let mut grew = false;
        for s in open {
            let Some(var) = s.first_open(0) else {
                next.push(s);
                continue;
            };
            grew = true;
            for value in [MERGED, DIVIDED] {
                let mut child = s.clone();
                let ok = child.set(var, value).map_err(Stop::from).and_then(|_| child.propagate(m, clock));
                match ok {
                    Ok(()) => next.push(child),
                    Err(Stop::Conflict) => {}
                    Err(Stop::Timeout) => return Err(Stop::Timeout),
                }
            }
        }
        open = next;
        if !grew || open.is_empty() {
            break;
        }
    }
    Ok(open)
}

fn run(m: &Model, clock: &Clock, threads: usize) -> Found {
    let mut root = State::new(m);
    let mut init: Result<(), Stop> = Ok(());
    for var in 0..m.pairs.len() {
        if !m.mergeable[var] {
            init = init.and_then(|_| root.set(var, DIVIDED).map_err(Stop::from));
        }
    }
    // constraints whose pairs are all inside proto-clusters are checked here
    for c in 0..m.constraints.len() {
        init = init.and_then(|_| root.check_constraint(m, c).map_err(Stop::from));
    }
    init = init.and_then(|_| root.propagate(m, clock));
    match init {
        Ok(()) => {}
        Err(Stop::Conflict) => return Found::Exhausted,
        Err(Stop::Timeout) => return Found::Timeout,
    }
    root.trail.clear();
    if threads <= 1 {
        return search(m, root, clock);
    }
    let open = match frontier(m, root, threads * 8, clock) {
        Ok(open) => open,
        Err(_) => return Found::Timeout,
    };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Found)>> = Mutex::new(Vec::new());
    let open = Mutex::new(open.into_iter().map(Some).collect::<Vec<_>>());
    let count = open.lock().expect("unpoisoned").len();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= count || clock.cancel.load(Ordering::Relaxed) {
                    break;
                }
                let mut s = open.lock().expect("unpoisoned")[k].take().expect("taken once");
                s.trail.clear();
                let found = search(m, s, clock);
                if matches!(found, Found::Solution(_)) {
                    clock.cancel.store(true, Ordering::Relaxed);
                }
                results.lock().expect("unpoisoned").push((k, found));
            });
        }
    });
    let mut results = results.into_inner().expect("unpoisoned");
    results.sort_by_key(|(k, _)| *k);
    let mut timed_out = results.len() < count;
    for (_, found) in results {
        match found {
            Found::Solution(s) => return Found::Solution(s),
            Found::Timeout => timed_out = true,
            Found::Exhausted => {}
        }
    }
    if timed_out {
        Found::Timeout
    } else {
        Found::Exhausted
    }
}

/// Decides whether a cluster editing set of size exactly |H| exists.
/// `threads > 1` splits the first decisions across worker threads.
pub fn solve_zero_excess(inst: &Instance, time_limit: Option<Duration>, threads: usize) -> Result<SolveOutcome, SolverError> {
    let m = Model::build(&inst.graph, &inst.packing)?;
    if m.hopeless {
        return Ok(SolveOutcome::Infeasible);
    }
    let clock = Clock::new(time_limit);
    match run(&m, &clock, threads) {
        Found::Solution(state) => {
            let block_of: HashMap<VertexId, usize> = m.unit_of.iter().map(|(&v, &u)| (v, state.comp[u])).collect();
            let s = EditSet::for_partition(&inst.graph, &block_of)?;
            let report = verify_solution(inst, &s);
            if !report.passed() {
                return Err(SolverError::WitnessRejected(report.failures().join(", ")));
            }
            Ok(SolveOutcome::Feasible(s))
        }
        Found::Exhausted => Ok(SolveOutcome::Infeasible),
        Found::Timeout => Ok(SolveOutcome::Timeout),
    }
}

/// Cheapest partition of weighted units, given pair edge counts.
/// Returns the cost and a block label per unit; first minimum in
/// restricted-growth order.
fn cheapest_partition(sizes: &[usize], internal: &[usize], edges: &[Vec<usize>]) -> (usize, Vec<usize>) {
    struct Walk<'a> {
        sizes: &'a [usize],
        edges: &'a [Vec<usize>],
        block: Vec<usize>,
        best: (usize, Vec<usize>),
    }
    fn go(w: &mut Walk, i: usize, blocks: usize, cost: usize) {
        if cost >= w.best.0 {
            return;
        }
        if i == w.sizes.len() {
            w.best = (cost, w.block.clone());
            return;
        }
        for b in 0..=blocks {
            let mut add = 0;
            for j in 0..i {
                let e = w.edges[i][j];
                add += if w.block[j] == b { w.sizes[i] * w.sizes[j] - e } else { e };
            }
            w.block[i] = b;
            go(w, i + 1, blocks.max(b + 1), cost + add);
        }
    }
    let n = sizes.len();
    let base: usize = internal.iter().sum();
    let mut w = Walk { sizes, edges, block: vec![0; n], best: (usize::MAX, Vec::new()) };
    go(&mut w, 0, 0, base);
    w.best
}

fn partition_edits(g: &Graph, units: &[Vec<VertexId>], block: &[usize]) -> Result<EditSet, GraphError> {
    let block_of: HashMap<VertexId, usize> =
        units.iter().zip(block).flat_map(|(members, &b)| members.iter().map(move |&v| (v, b))).collect();
    EditSet::for_partition(g, &block_of)
}

/// Enumerates all partitions of the proto-clusters; returns the cheapest
/// edit set when its size equals |H|.
pub fn brute_force_partition_solve(g: &Graph, h: &[PackedP3]) -> Result<Option<EditSet>, SolverError> {
    let units = proto_clusters(g, h);
    if units.len() > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge { what: "proto-clusters", count: units.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let dense = DenseGraph::new(g);
    let idx: Vec<Vec<usize>> = units.iter().map(|m| m.iter().map(|&v| dense.index[&v]).collect()).collect();
    let between = |a: &[usize], b: &[usize]| a.iter().map(|&u| b.iter().filter(|&&v| dense.has_edge(u, v)).count()).sum::<usize>();
    let sizes: Vec<usize> = units.iter().map(Vec::len).collect();
    let internal: Vec<usize> = idx.iter().map(|m| m.len() * (m.len() - 1) / 2 - between(m, m) / 2).collect();
    let edges: Vec<Vec<usize>> = idx.iter().map(|a| idx.iter().map(|b| between(a, b)).collect()).collect();
    let (cost, block) = cheapest_partition(&sizes, &internal, &edges);
    if cost != h.len() {
        return Ok(None);
    }
    Ok(Some(partition_edits(g, &units, &block)?))
}

/// Minimum cluster editing set over all vertex partitions, returned when
/// its size is at most `k`.
pub fn brute_force_cluster_editing(g: &Graph, k: usize) -> Result<Option<EditSet>, SolverError> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge { what: "vertices", count: n, limit: BRUTE_FORCE_LIMIT });
    }
    let dense = DenseGraph::new(g);
    let edges: Vec<Vec<usize>> = (0..n).map(|u| (0..n).map(|v| usize::from(u != v && dense.has_edge(u, v))).collect()).collect();
    let (cost, block) = cheapest_partition(&vec![1; n], &vec![0; n], &edges);
    if cost > k {
        return Ok(None);
    }
    let units: Vec<Vec<VertexId>> = dense.ids.iter().map(|&v| vec![v]).collect();
    Ok(Some(partition_edits(g, &units, &block)?))
}
