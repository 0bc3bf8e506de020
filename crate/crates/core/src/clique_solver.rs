//! Maximum clique search.
//!
//! [`max_clique_exact`] is a bitset branch and bound in the MCQ/BBMC family:
//! vertices are put in min-width order, every search node colors its
//! candidate set greedily and the color count bounds how far the current
//! clique can still grow. Once a subproblem has at most 512 candidates it is
//! copied into a dense fixed-width representation, sorted by local degree.
//! [`brute_force_max_clique`] is an independent exhaustive oracle for small
//! graphs; [`max_clique_greedy`] gives a cheap lower bound for graphs too
//! large to solve exactly.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::cayley_graph::BitGraph;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const BRUTE_FORCE_MAX_ORDER: usize = 30;

/// Limits on a single exact solve. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        Self { max_nodes: Some(max_nodes), time_limit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueResult {
    pub size: usize,
    /// Sorted ascending.
    pub witness: Vec<usize>,
    /// No larger clique exists.
    pub optimal: bool,
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

#[derive(Serialize, Deserialize)]
struct CliqueResultJson {
    size: usize,
    witness: Vec<usize>,
    optimal: bool,
    nodes_expanded: u64,
    elapsed_ms: f64,
}

impl Serialize for CliqueResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CliqueResultJson {
            size: self.size,
            witness: self.witness.clone(),
            optimal: self.optimal,
            nodes_expanded: self.nodes_expanded,
            elapsed_ms: self.elapsed.as_secs_f64() * 1e3,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliqueResult {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CliqueResultJson::deserialize(d)?;
        Ok(CliqueResult {
            size: j.size,
            witness: j.witness,
            optimal: j.optimal,
            nodes_expanded: j.nodes_expanded,
            elapsed: Duration::from_secs_f64(j.elapsed_ms.max(0.0) / 1e3),
        })
    }
}

fn finish(mut witness: Vec<usize>, optimal: bool, nodes: u64, start: Instant) -> CliqueResult {
    witness.sort_unstable();
    CliqueResult { size: witness.len(), witness, optimal, nodes_expanded: nodes, elapsed: start.elapsed() }
}

/// Vertices by non-increasing degree, ties toward the lower index.
fn degree_order(g: &BitGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.order()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    order
}

/// Adjacency relabelled so that vertex `i` is `order[i]` of the input.
fn relabel(g: &BitGraph, order: &[usize]) -> Vec<BitSet> {
    let n = g.order();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order
        .iter()
        .map(|&v| {
            let mut row = BitSet::new(n);
            for u in g.neighbors(v).iter() {
                row.insert(pos[u]);
            }
            row
        })
        .collect()
}

/// Greedy sequential coloring of `cands` in index order. Fills `order` and
/// `colors` with the vertices by non-decreasing color (colors start at 1).
fn color_sort(
    adj: &[BitSet],
    cands: &BitSet,
    uncolored: &mut BitSet,
    class: &mut BitSet,
    order: &mut Vec<usize>,
    colors: &mut Vec<usize>,
) {
    order.clear();
    colors.clear();
    uncolored.clone_from(cands);
    let mut k = 0;
    while !uncolored.is_empty() {
        k += 1;
        class.clone_from(uncolored);
        while let Some(v) = class.first() {
            class.remove(v);
            class.difference_with(&adj[v]);
            uncolored.remove(v);
            order.push(v);
            colors.push(k);
        }
    }
}

/// Number of colors used by a greedy sequential coloring in degree order;
/// an upper bound on the clique number.
pub fn coloring_upper_bound(g: &BitGraph) -> usize {
    let n = g.order();
    if n == 0 {
        return 0;
    }
    let order = degree_order(g);
    let adj = relabel(g, &order);
    let (mut u, mut c) = (BitSet::new(n), BitSet::new(n));
    let (mut o, mut cols) = (Vec::new(), Vec::new());
    color_sort(&adj, &BitSet::full(n), &mut u, &mut c, &mut o, &mut cols);
    cols.last().copied().unwrap_or(0)
}

/// Vertices in min-width order: repeatedly strip a vertex of least remaining
/// degree (lowest index on ties); the last stripped vertex comes first.
fn min_width_order(g: &BitGraph) -> Vec<usize> {
    let n = g.order();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut alive = BitSet::full(n);
    let mut stripped = Vec::with_capacity(n);
    for _ in 0..n {
        let v = alive.iter().min_by_key(|&v| (deg[v], v)).expect("vertices remain");
        alive.remove(v);
        for u in g.neighbors(v).iter() {
            if alive.contains(u) {
                deg[u] -= 1;
            }
        }
        stripped.push(v);
    }
    stripped.reverse();
    stripped
}

/// Fixed-width bitset for the dense local subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Mask<const W: usize>([u64; W]);

impl<const W: usize> Default for Mask<W> {
    fn default() -> Self {
        Mask([0; W])
    }
}

impl<const W: usize> Mask<W> {
    fn prefix(m: usize) -> Self {
        let mut r = Self::default();
        for i in 0..W {
            let lo = i * 64;
            r.0[i] = if m >= lo + 64 {
                !0
            } else if m > lo {
                (1u64 << (m - lo)) - 1
            } else {
                0
            };
        }
        r
    }

    #[inline]
    fn is_empty(self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    #[inline]
    fn and(mut self, o: Self) -> Self {
        for i in 0..W {
            self.0[i] &= o.0[i];
        }
        self
    }

    #[inline]
    fn and_not(mut self, o: Self) -> Self {
        for i in 0..W {
            self.0[i] &= !o.0[i];
        }
        self
    }

    #[inline]
    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    fn remove(&mut self, v: usize) {
        self.0[v / 64] &= !(1 << (v % 64));
    }

    fn ones(self) -> impl Iterator<Item = usize> {
        (0..W).flat_map(move |i| {
            let mut w = self.0[i];
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }
}

#[derive(Default)]
struct Frame<const W: usize> {
    /// Color classes below the pruning threshold.
    classes: Vec<Mask<W>>,
    /// Branching vertices with their colors, colors non-decreasing.
    branch: Vec<(u16, u16)>,
}

/// Candidate set of one search node, renumbered `0..m` and stored densely.
#[derive(Default)]
struct Dense<const W: usize> {
    adj: Vec<Mask<W>>,
    /// Vertex ids in the enclosing (relabelled) graph.
    verts: Vec<usize>,
    frames: Vec<Frame<W>>,
}

impl<const W: usize> Dense<W> {
    /// `row(v)` gives the neighbours of `v` as dense positions.
    fn load(&mut self, verts: impl Iterator<Item = usize>, mut row: impl FnMut(usize) -> Mask<W>) {
        self.verts.clear();
        self.verts.extend(verts);
        debug_assert!(self.verts.len() <= 64 * W);
        self.adj.clear();
        for &v in &self.verts {
            self.adj.push(row(v));
        }
    }
}

/// Sequential greedy coloring of `p` in index order. Vertices whose color
/// reaches `kmin` go to `f.branch`.
fn color_dense<const W: usize>(adj: &[Mask<W>], p: Mask<W>, kmin: usize, f: &mut Frame<W>) {
    f.classes.clear();
    f.branch.clear();
    let mut uncolored = p;
    let mut k = 0;
    while !uncolored.is_empty() {
        k += 1;
        let mut q = uncolored;
        let mut class = Mask::default();
        // vertices come in increasing order, so words below `w` are already spent
        for w in 0..W {
            while q.0[w] != 0 {
                let b = q.0[w].trailing_zeros();
                q.0[w] &= q.0[w] - 1;
                class.0[w] |= 1 << b;
                let row = &adj[w * 64 + b as usize].0;
                for x in w..W {
                    q.0[x] &= !row[x];
                }
            }
        }
        uncolored = uncolored.and_not(class);
        if k < kmin {
            f.classes.push(class);
        } else {
            f.branch.extend(class.ones().map(|v| (v as u16, k as u16)));
        }
    }
}

/// Sequential greedy coloring over full-width bitsets for the top of the
/// tree. Same contract as [`color_dense`].
fn color_sparse(adj: &[BitSet], cands: &BitSet, kmin: usize, s: &mut SparseFrame) {
    s.branch.clear();
    s.uncolored.clone_from(cands);
    let mut k = 0;
    while !s.uncolored.is_empty() {
        k += 1;
        s.class.clone_from(&s.uncolored);
        while let Some(v) = s.class.first() {
            s.class.remove(v);
            s.class.difference_with(&adj[v]);
            s.uncolored.remove(v);
            if k >= kmin {
                s.branch.push((v, k));
            }
        }
    }
}

struct SparseFrame {
    cands: BitSet,
    uncolored: BitSet,
    class: BitSet,
    branch: Vec<(usize, usize)>,
}

impl SparseFrame {
    fn new(n: usize) -> Self {
        Self { cands: BitSet::new(n), uncolored: BitSet::new(n), class: BitSet::new(n), branch: Vec::new() }
    }
}

const DENSE_MID: usize = 256;
const DENSE_LARGE: usize = 512;
struct Search<'a> {
    adj: &'a [BitSet],
    best: Vec<usize>,
    current: Vec<usize>,
    nodes: u64,
    budget: SearchBudget,
    start: Instant,
    aborted: bool,
    sparse: Vec<SparseFrame>,
    small: Dense<1>,
    mid: Dense<{ DENSE_MID / 64 }>,
    large: Dense<{ DENSE_LARGE / 64 }>,
    /// Scratch map from enclosing ids to dense positions.
    pos: Vec<u32>,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if let Some(max) = self.budget.max_nodes {
            if self.nodes > max {
                return true;
            }
        }
        if let Some(limit) = self.budget.time_limit {
            if self.nodes % 1024 == 0 && self.start.elapsed() > limit {
                return true;
            }
        }
        false
    }

    fn enter(&mut self) -> bool {
        self.nodes += 1;
        if self.out_of_budget() {
            self.aborted = true;
        }
        !self.aborted
    }

    fn record_leaf(&mut self) {
        if self.current.len() > self.best.len() {
            self.best.clone_from(&self.current);
        }
    }

    fn kmin(&self) -> usize {
        (self.best.len() + 1).saturating_sub(self.current.len()).max(1)
    }

    /// Solves the subproblem on the relabelled candidate set `cands`,
    /// switching to a dense representation when it is small enough.
    fn descend_sparse(&mut self, depth: usize, cands: &BitSet) {
        let m = cands.count();
        if m <= 64 {
            let mut d = std::mem::take(&mut self.small);
            self.load_from_sparse(&mut d, cands);
            self.expand_dense(&mut d, 0, Mask::prefix(m));
            self.small = d;
        } else if m <= DENSE_MID {
            let mut d = std::mem::take(&mut self.mid);
            self.load_from_sparse(&mut d, cands);
            self.expand_dense(&mut d, 0, Mask::prefix(m));
            self.mid = d;
        } else if m <= DENSE_LARGE {
            let mut d = std::mem::take(&mut self.large);
            self.load_from_sparse(&mut d, cands);
            self.expand_dense(&mut d, 0, Mask::prefix(m));
            self.large = d;
        } else {
            self.expand_sparse(depth, cands);
        }
    }

    fn load_from_sparse<const W: usize>(&mut self, d: &mut Dense<W>, cands: &BitSet) {
        // local degree order: high-degree vertices take the low colors
        let adj = self.adj;
        let mut verts: Vec<usize> = cands.iter().collect();
        verts.sort_by_cached_key(|&v| (std::cmp::Reverse(adj[v].intersection_count(cands)), v));
        for (i, &v) in verts.iter().enumerate() {
            self.pos[v] = i as u32;
        }
        let (adj, pos) = (self.adj, &self.pos);
        d.load(verts.iter().copied(), |v| {
            let mut mask = Mask::default();
            for (w, (a, b)) in adj[v].words().iter().zip(cands.words()).enumerate() {
                let mut bits = a & b;
                while bits != 0 {
                    mask.insert(pos[w * 64 + bits.trailing_zeros() as usize] as usize);
                    bits &= bits - 1;
                }
            }
            mask
        });
    }

    fn expand_sparse(&mut self, depth: usize, cands: &BitSet) {
        if !self.enter() {
            return;
        }
        let n = self.adj.len();
        while self.sparse.len() <= depth {
            self.sparse.push(SparseFrame::new(n));
        }
        let mut s = std::mem::replace(&mut self.sparse[depth], SparseFrame::new(0));
        s.cands.clone_from(cands);
        let kmin = self.kmin();
        color_sparse(self.adj, cands, kmin, &mut s);
        let mut child = BitSet::new(n);
        for i in (0..s.branch.len()).rev() {
            let (v, k) = s.branch[i];
            if self.current.len() + k <= self.best.len() {
                break;
            }
            self.current.push(v);
            s.cands.intersection_into(&self.adj[v], &mut child);
            if child.is_empty() {
                self.record_leaf();
            } else {
                self.descend_sparse(depth + 1, &child);
            }
            self.current.pop();
            s.cands.remove(v);
            if self.aborted {
                break;
            }
        }
        self.sparse[depth] = s;
    }

    fn expand_dense<const W: usize>(&mut self, d: &mut Dense<W>, depth: usize, mut p: Mask<W>) {
        if !self.enter() {
            return;
        }
        if d.frames.len() <= depth {
            d.frames.resize_with(depth + 1, Frame::default);
        }
        let mut f = std::mem::take(&mut d.frames[depth]);
        color_dense(&d.adj, p, self.kmin(), &mut f);
        for i in (0..f.branch.len()).rev() {
            let (v, k) = (f.branch[i].0 as usize, f.branch[i].1 as usize);
            if self.current.len() + k <= self.best.len() {
                break;
            }
            self.current.push(d.verts[v]);
            let child = p.and(d.adj[v]);
            if child.is_empty() {
                self.record_leaf();
            } else {
                self.expand_dense(d, depth + 1, child);
            }
            self.current.pop();
            p.remove(v);
            if self.aborted {
                break;
            }
        }
        d.frames[depth] = f;
    }
}

/// Exact maximum clique. If the budget runs out the best clique found so far
/// is returned with `optimal == false`.
pub fn max_clique_exact(g: &BitGraph, budget: SearchBudget) -> CliqueResult {
    max_clique_exact_from(g, budget, &[])
}

/// As [`max_clique_exact`], seeded with a known clique `initial` whose size
/// is used for pruning from the start. `initial` must be a clique of `g`.
pub fn max_clique_exact_from(g: &BitGraph, budget: SearchBudget, initial: &[usize]) -> CliqueResult {
    let start = Instant::now();
    let n = g.order();
    if n == 0 {
        return finish(Vec::new(), true, 0, start);
    }
    debug_assert!(g.is_clique(initial));
    let order = min_width_order(g);
    let adj = relabel(g, &order);
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }

    let mut search = Search {
        adj: &adj,
        best: initial.iter().map(|&v| pos[v]).collect(),
        current: Vec::new(),
        nodes: 0,
        budget,
        start,
        aborted: false,
        sparse: Vec::new(),
        small: Dense::default(),
        mid: Dense::default(),
        large: Dense::default(),
        pos: vec![0; n],
    };
    search.descend_sparse(0, &BitSet::full(n));
    let optimal = !search.aborted;
    let nodes = search.nodes;
    let witness = search.best.iter().map(|&i| order[i]).collect();
    finish(witness, optimal, nodes, start)
}

/// Exhaustive include/exclude enumeration for graphs with at most 30
/// vertices. Candidates are only filtered by adjacency, never by a size bound.
pub fn brute_force_max_clique(g: &BitGraph) -> Result<CliqueResult> {
    let start = Instant::now();
    let n = g.order();
    if n > BRUTE_FORCE_MAX_ORDER {
        return Err(Error::Capacity {
            what: "brute-force clique order",
            requested: n as u128,
            limit: BRUTE_FORCE_MAX_ORDER as u128,
        });
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, u| m | (1 << u)))
        .collect();

    fn rec(adj: &[u32], cands: u32, cur: u32, best: &mut u32, nodes: &mut u64) {
        *nodes += 1;
        if cands == 0 {
            if cur.count_ones() > best.count_ones() {
                *best = cur;
            }
            return;
        }
        let v = cands.trailing_zeros();
        let bit = 1u32 << v;
        rec(adj, cands & adj[v as usize], cur | bit, best, nodes);
        rec(adj, cands & !bit, cur, best, nodes);
    }

    let mut best = 0u32;
    let mut nodes = 0;
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    rec(&adj, all, 0, &mut best, &mut nodes);
    let witness = (0..n).filter(|&v| best >> v & 1 == 1).collect();
    Ok(finish(witness, true, nodes, start))
}

/// Randomized greedy: each restart shuffles the vertices and adds every vertex
/// adjacent to all chosen so far. Never claims optimality.
pub fn max_clique_greedy(g: &BitGraph, restarts: usize, seed: u64) -> Result<CliqueResult> {
    let start = Instant::now();
    if restarts == 0 {
        return Err(Error::domain("greedy clique search needs at least one restart"));
    }
    let n = g.order();
    let mut rng = SplitMix64::new(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = Vec::new();
    let mut cands = BitSet::new(n);
    let full = BitSet::full(n);
    for _ in 0..restarts {
        rng.shuffle(&mut order);
        cands.clone_from(&full);
        let mut clique = Vec::new();
        for &v in &order {
            if cands.contains(v) {
                clique.push(v);
                cands.intersect_with(g.neighbors(v));
            }
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    Ok(finish(best, false, restarts as u64, start))
}
