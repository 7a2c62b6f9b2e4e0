//! Visit traces of a single token walking in one tree.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::Summary;
use crate::tree::Tree;
use crate::walk::WalkPolicy;

use super::meeting::{CsrTree, Walker};
use super::scenario::random_tree;

/// Ticks at which the token stood on `target`. Tick 0 is the starting
/// position, tick `t` the position after the `t`-th move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitTrace {
    pub policy: WalkPolicy,
    pub start: usize,
    pub target: usize,
    pub target_degree: usize,
    pub steps: u64,
    pub ticks: Vec<u64>,
}

impl VisitTrace {
    /// Differences between consecutive visit ticks.
    pub fn gaps(&self) -> Vec<u64> {
        self.ticks.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn gap_summary(&self) -> Summary {
        Summary::of_u64(&self.gaps())
    }

    /// Fraction of ticks `1..=steps` spent on the target.
    pub fn frequency(&self) -> f64 {
        self.ticks.iter().filter(|&&t| t > 0).count() as f64 / self.steps as f64
    }
}

/// Walks `steps` moves on `tree` from `start` and records every visit to
/// `target`.
pub fn visit_trace_on<R: Rng + ?Sized>(
    tree: &Tree,
    start: usize,
    target: usize,
    policy: WalkPolicy,
    steps: u64,
    rng: &mut R,
) -> VisitTrace {
    let csr = CsrTree::new(tree);
    let mut w = Walker::at(start);
    let mut ticks = Vec::new();
    if start == target {
        ticks.push(0);
    }
    for t in 1..=steps {
        w.step(&csr, policy, rng);
        if w.position as usize == target {
            ticks.push(t);
        }
    }
    VisitTrace {
        policy,
        start,
        target,
        target_degree: tree.degree(target),
        steps,
        ticks,
    }
}

/// A uniform random tree on `n` vertices, a uniform start and a uniform
/// target, then [`visit_trace_on`]. Returns the tree as well.
pub fn visit_trace<R: Rng + ?Sized>(
    n: usize,
    policy: WalkPolicy,
    steps: u64,
    rng: &mut R,
) -> Result<(Tree, VisitTrace)> {
    let tree = random_tree(n, rng)?;
    let start = rng.gen_range(0..n);
    let target = rng.gen_range(0..n);
    let trace = visit_trace_on(&tree, start, target, policy, steps, rng);
    Ok((tree, trace))
}

/// Number of ticks `1..=steps` the token spent on each vertex.
pub fn occupancy<R: Rng + ?Sized>(
    tree: &Tree,
    start: usize,
    policy: WalkPolicy,
    steps: u64,
    rng: &mut R,
) -> Vec<u64> {
    let csr = CsrTree::new(tree);
    let mut w = Walker::at(start);
    let mut counts = vec![0u64; tree.len()];
    for _ in 0..steps {
        w.step(&csr, policy, rng);
        counts[w.position as usize] += 1;
    }
    counts
}
