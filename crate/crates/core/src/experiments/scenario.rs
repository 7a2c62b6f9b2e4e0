use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::protocol::World;
use crate::seed::{stream, subseed};
use crate::tree::{BridgeSet, Tree};

/// Uniform random labeled tree on `n` vertices (random Prüfer sequence).
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Tree> {
    match n {
        0 => Err(Error::InvalidParameter(
            "a tree needs at least one vertex".into(),
        )),
        1 => Ok(Tree::singleton()),
        2 => Ok(Tree::path(2)),
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
            Tree::from_prufer(&seq)
        }
    }
}

/// `k` distinct cross pairs chosen uniformly without replacement.
pub fn wire_bridges<R: Rng + ?Sized>(
    t1: &Tree,
    t2: &Tree,
    k: usize,
    rng: &mut R,
) -> Result<BridgeSet> {
    let available = t1.len() * t2.len();
    if k > available {
        return Err(Error::TooManyBridges {
            requested: k,
            available,
        });
    }
    let n2 = t2.len();
    let mut picks: Vec<usize> = index::sample(rng, available, k).into_vec();
    picks.sort_unstable();
    BridgeSet::new(picks.into_iter().map(|i| (i / n2, i % n2)).collect())
}

/// Edges of a connected graph on `n` vertices: a uniform random spanning
/// tree plus `extra` distinct random chords (fewer if the graph fills up).
pub fn random_connected_graph<R: Rng + ?Sized>(
    n: usize,
    extra: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let tree = random_tree(n, rng)?;
    let mut edges = tree.canonical_edges();
    let mut present: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
    let room = n * (n - 1) / 2 - edges.len();
    for _ in 0..extra.min(room) {
        loop {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let e = (a.min(b), a.max(b));
            if a != b && present.insert(e) {
                edges.push(e);
                break;
            }
        }
    }
    Ok(edges)
}

/// Two trees and the bridges joining them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub t1: Tree,
    pub t2: Tree,
    pub bridges: BridgeSet,
}

impl Instance {
    pub fn generate<R: Rng + ?Sized>(n1: usize, n2: usize, k: usize, rng: &mut R) -> Result<Self> {
        let t1 = random_tree(n1, rng)?;
        let t2 = random_tree(n2, rng)?;
        let bridges = wire_bridges(&t1, &t2, k, rng)?;
        Ok(Instance { t1, t2, bridges })
    }

    /// A protocol world holding the two trees (tokens at `root1`, `root2`)
    /// and the bridges as `{∅,∅}` edges. Returns the handles of both trees.
    pub fn to_world(
        &self,
        root1: usize,
        root2: usize,
    ) -> Result<(World, Vec<VertexId>, Vec<VertexId>)> {
        let mut w = World::new();
        let a: Vec<_> = (0..self.t1.len()).map(|_| w.add_vertex()).collect();
        let b: Vec<_> = (0..self.t2.len()).map(|_| w.add_vertex()).collect();
        w.graft_tree(&a, self.t1.edges(), root1)?;
        w.graft_tree(&b, self.t2.edges(), root2)?;
        for &(u, v) in self.bridges.pairs() {
            w.add_edge(a[u], b[v])?;
        }
        Ok((w, a, b))
    }
}

/// Parameters of a two-tree experiment. Everything it generates is a pure
/// function of these fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn new(n1: usize, n2: usize, k: usize, seed: u64) -> Self {
        Scenario { n1, n2, k, seed }
    }

    /// Instance number `index`.
    pub fn instance(&self, index: u64) -> Result<Instance> {
        let mut rng = stream(subseed(self.seed, 0), index);
        Instance::generate(self.n1, self.n2, self.k, &mut rng)
    }

    /// Seed of the walk stream for run `index`.
    pub fn run_seed(&self, index: u64) -> u64 {
        subseed(subseed(self.seed, 1), index)
    }
}
