//! Sum graphs Γ_f on Z/NZ and restricted sumsets.

use std::collections::BTreeSet;
use std::ops::Deref;

use crate::bitset::BitSet;
use crate::sign_models::{Model, SignFunction};

/// Undirected simple graph with packed adjacency rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGraph {
    rows: Vec<BitSet>,
}

impl BitGraph {
    pub fn empty(n: usize) -> Self {
        Self { rows: (0..n).map(|_| BitSet::new(n)).collect() }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    /// Adds {u, v}; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.rows[u].insert(v);
            self.rows[v].insert(u);
        }
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.rows[u].remove(v);
        self.rows[v].remove(u);
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &BitSet {
        &self.rows[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rows[u].count()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BitSet::count).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Every distinct pair of `vertices` adjacent.
    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| u != v && self.has_edge(u, v)))
    }

    /// Edge list, one `u v` pair per line with `u < v`.
    pub fn write_edge_list<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Parameters of the sign function a [`SumGraph`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphSource {
    pub model: Model,
    pub q: u64,
    pub seed: Option<u64>,
}

/// Γ_f: vertices Z/NZ, x ~ y iff x ≠ y and f(x + y) = +1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumGraph {
    graph: BitGraph,
    source: GraphSource,
}

impl SumGraph {
    pub fn modulus(&self) -> usize {
        self.graph.order()
    }

    pub fn source(&self) -> GraphSource {
        self.source
    }

    pub fn graph(&self) -> &BitGraph {
        &self.graph
    }
}

impl Deref for SumGraph {
    type Target = BitGraph;

    fn deref(&self) -> &BitGraph {
        &self.graph
    }
}

pub fn build_graph(f: &SignFunction) -> SumGraph {
    let n = f.modulus() as usize;
    let mut graph = BitGraph::empty(n);
    for x in 0..n {
        for y in x + 1..n {
            let s = x + y;
            let s = if s >= n { s - n } else { s };
            if f.is_positive(s) {
                graph.rows[x].insert(y);
                graph.rows[y].insert(x);
            }
        }
    }
    SumGraph {
        graph,
        source: GraphSource { model: f.model(), q: f.q(), seed: f.seed() },
    }
}

/// A +̂ A = {a + a' mod N : a, a' ∈ A, a ≠ a'}.
pub fn restricted_sumset(a: &[u64], n: u64) -> BTreeSet<u64> {
    let distinct: BTreeSet<u64> = a.iter().map(|&x| x % n).collect();
    let v: Vec<u64> = distinct.into_iter().collect();
    let mut out = BTreeSet::new();
    for (i, &x) in v.iter().enumerate() {
        for &y in &v[i + 1..] {
            out.insert((x + y) % n);
        }
    }
    out
}

/// Clique test through the sumset formulation: f = +1 on A +̂ A.
pub fn sumset_positive(f: &SignFunction, a: &[u64]) -> bool {
    restricted_sumset(a, f.modulus())
        .into_iter()
        .all(|s| f.is_positive(s as usize))
}

pub fn is_clique(g: &BitGraph, a: &[usize]) -> bool {
    g.is_clique(a)
}
