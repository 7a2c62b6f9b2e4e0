//! Plain trees over `0..n` and bridge sets between two of them.
//!
//! These are the snapshots the analysis works on; a tree of a live
//! [`World`](crate::World) is converted with
//! [`analysis::snapshot`](crate::analysis::snapshot).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl Tree {
    /// Validates that `edges` form a spanning tree of `0..n`.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 || edges.len() + 1 != n {
            return Err(Error::NotATree(n));
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen_edges = HashSet::new();
        for &(a, b) in &edges {
            if a >= n || b >= n || a == b || !seen_edges.insert((a.min(b), a.max(b))) {
                return Err(Error::NotATree(n));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        // n-1 distinct edges + connected => tree
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    reached += 1;
                    stack.push(y);
                }
            }
        }
        if reached != n {
            return Err(Error::NotATree(n));
        }
        Ok(Tree { n, edges, adj })
    }

    pub fn singleton() -> Self {
        Tree {
            n: 1,
            edges: Vec::new(),
            adj: vec![Vec::new()],
        }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)).collect()).expect("path is a tree")
    }

    /// Star with center `0`.
    pub fn star(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (0, i)).collect()).expect("star is a tree")
    }

    /// Decodes a Prüfer sequence of length `n - 2` into a tree on `n`
    /// vertices.
    pub fn from_prufer(seq: &[usize]) -> Result<Self> {
        let n = seq.len() + 2;
        if seq.iter().any(|&a| a >= n) {
            return Err(Error::NotATree(n));
        }
        let mut degree = vec![1usize; n];
        for &a in seq {
            degree[a] += 1;
        }
        let mut leaves: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| degree[i] == 1).map(Reverse).collect();
        let mut edges = Vec::with_capacity(n - 1);
        for &a in seq {
            let Reverse(leaf) = leaves.pop().expect("a Prüfer step always has a leaf");
            edges.push((leaf, a));
            degree[a] -= 1;
            if degree[a] == 1 {
                leaves.push(Reverse(a));
            }
        }
        let Reverse(u) = leaves.pop().expect("two leaves remain");
        let Reverse(v) = leaves.pop().expect("two leaves remain");
        edges.push((u, v));
        Self::from_edges(n, edges)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() == 1
    }

    /// Edge list normalized to `(min, max)` pairs and sorted; equal for two
    /// trees iff they are the same labeled tree.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e
    }

    /// Two-coloring of the vertices (trees are bipartite).
    pub fn colors(&self) -> Vec<u8> {
        let mut color = vec![u8::MAX; self.n];
        color[0] = 0;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if color[y] == u8::MAX {
                    color[y] = 1 - color[x];
                    stack.push(y);
                }
            }
        }
        color
    }

    /// Distances from `src`.
    pub fn distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }
}

/// Non-tree edges joining vertex `u` of a first tree to vertex `v` of a
/// second tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeSet {
    pairs: Vec<(usize, usize)>,
}

impl BridgeSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(u, v) in &pairs {
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateBridge(u, v));
            }
        }
        Ok(BridgeSet { pairs })
    }

    pub fn empty() -> Self {
        BridgeSet { pairs: Vec::new() }
    }

    /// Checks that every endpoint lies in the stated tree.
    pub fn validate(&self, t1: &Tree, t2: &Tree) -> Result<()> {
        for &(u, v) in &self.pairs {
            if u >= t1.len() {
                return Err(Error::NotInTree {
                    vertex: u,
                    size: t1.len(),
                });
            }
            if v >= t2.len() {
                return Err(Error::NotInTree {
                    vertex: v,
                    size: t2.len(),
                });
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.pairs.contains(&(u, v))
    }

    /// Dense `n1 x n2` adjacency table, row-major.
    pub fn adjacency(&self, n1: usize, n2: usize) -> Vec<bool> {
        let mut table = vec![false; n1 * n2];
        for &(u, v) in &self.pairs {
            table[u * n2 + v] = true;
        }
        table
    }
}
