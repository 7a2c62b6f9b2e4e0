//! Closed-form fusion estimates and an exact first-meeting oracle.
//!
//! For a token walking uniformly on a tree `T` with `n` vertices, the
//! long-run probability of finding it on `v` is proportional to the degree:
//!
//! ```text
//! P(token on v) = d_T(v) / (2 (n - 1))
//! ```
//!
//! Two trees `T1`, `T2` joined by bridges `(u, v)` can merge whenever the two
//! tokens sit on the ends of a bridge. Treating the two positions as
//! independent and stationary gives the per-step fusion probability and its
//! reciprocal, the expected number of token moves between two meetings:
//!
//! ```text
//! P_fusion = sum over bridges (u, v) of  d_T1(u) / 2|E_T1|  *  d_T2(v) / 2|E_T2|
//! E_fusion = 1 / P_fusion
//! ```
//!
//! Both are computed exactly as rationals.
//!
//! [`FirstMeetingOracle`] solves the absorbing product chain of the two walks
//! for the expected number of moves until the *first* meeting from given
//! starting vertices, under the same activation discipline the simulator
//! uses.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{PortLabel, VertexId};
use crate::protocol::{ForestView, World};
use crate::tree::{BridgeSet, Tree};
use crate::walk::{Activation, WalkPolicy};

pub type Probability = Ratio<u64>;

/// Largest `|V1| * |V2|` accepted by the first-meeting oracle.
pub const ORACLE_MAX_PAIRS: usize = 10_000;

/// Systems up to this many unknowns are solved by dense LU; larger ones by
/// BiCGSTAB.
const DENSE_LIMIT: usize = 2_500;

fn check_tree(t: &Tree) -> Result<()> {
    if t.len() < 2 {
        Err(Error::TreeTooSmall {
            needed: 2,
            got: t.len(),
        })
    } else {
        Ok(())
    }
}

/// Stationary probability of the token being on `v`.
pub fn stationary_prob(tree: &Tree, v: usize) -> Result<Probability> {
    check_tree(tree)?;
    if v >= tree.len() {
        return Err(Error::NotInTree {
            vertex: v,
            size: tree.len(),
        });
    }
    Ok(Ratio::new(
        tree.degree(v) as u64,
        2 * (tree.len() as u64 - 1),
    ))
}

/// Probability that two independent stationary tokens sit on the two ends of
/// some bridge.
pub fn fusion_probability(t1: &Tree, t2: &Tree, bridges: &BridgeSet) -> Result<Probability> {
    check_tree(t1)?;
    check_tree(t2)?;
    bridges.validate(t1, t2)?;
    let num: u64 = bridges
        .pairs()
        .iter()
        .map(|&(u, v)| (t1.degree(u) * t2.degree(v)) as u64)
        .sum();
    let den = 4 * t1.edge_count() as u64 * t2.edge_count() as u64;
    Ok(Ratio::new(num, den))
}

/// Expected number of token moves between meetings, `1 / P_fusion`; `None`
/// when there is no bridge.
pub fn expected_fusion_time(
    t1: &Tree,
    t2: &Tree,
    bridges: &BridgeSet,
) -> Result<Option<Probability>> {
    let p = fusion_probability(t1, t2, bridges)?;
    Ok(if p.is_zero() { None } else { Some(p.recip()) })
}

pub fn ratio_to_f64(r: Probability) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Converts tree `index` of a forest into a [`Tree`] over `0..len`, together
/// with the vertex handle of each local index.
pub fn snapshot(world: &World, forest: &ForestView, index: usize) -> Result<(Tree, Vec<VertexId>)> {
    let tree = &forest.trees[index];
    let local: HashMap<VertexId, usize> = tree
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let g = world.graph();
    let edges = tree
        .tree_edges
        .iter()
        .map(|&e| {
            let [a, b] = g.endpoints(e).expect("forest edges are present");
            (local[&a], local[&b])
        })
        .collect();
    Ok((Tree::from_edges(tree.len(), edges)?, tree.vertices.clone()))
}

/// All `{∅,∅}` edges with one end in tree `a` and the other in tree `b`,
/// oriented `(vertex of a, vertex of b)`, in edge creation order.
pub fn enumerate_bridges(
    world: &World,
    forest: &ForestView,
    a: usize,
    b: usize,
) -> Result<Vec<(VertexId, VertexId)>> {
    if a == b {
        return Err(Error::SameTree);
    }
    let g = world.graph();
    let mut out = Vec::new();
    for (e, u, v) in g.edges() {
        if g.port(u, e) != Some(PortLabel::NonTree) || g.port(v, e) != Some(PortLabel::NonTree) {
            continue;
        }
        match (forest.tree_of(u), forest.tree_of(v)) {
            (Some(x), Some(y)) if x == a && y == b => out.push((u, v)),
            (Some(x), Some(y)) if x == b && y == a => out.push((v, u)),
            _ => {}
        }
    }
    Ok(out)
}

/// Snapshots of trees `a` and `b` plus their bridges in local indices.
pub fn bridge_instance(
    world: &World,
    forest: &ForestView,
    a: usize,
    b: usize,
) -> Result<(Tree, Tree, BridgeSet)> {
    let pairs = enumerate_bridges(world, forest, a, b)?;
    let (t1, map1) = snapshot(world, forest, a)?;
    let (t2, map2) = snapshot(world, forest, b)?;
    let idx1: HashMap<_, _> = map1.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let idx2: HashMap<_, _> = map2.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let bridges = BridgeSet::new(pairs.iter().map(|(u, v)| (idx1[u], idx2[v])).collect())?;
    Ok((t1, t2, bridges))
}

/// Walker state of one token: position plus, for the non-backtracking
/// policy, where it came from.
#[derive(Debug, Clone)]
struct WalkerChain {
    pos: Vec<usize>,
    /// Transition lists `(next state, probability)`.
    next: Vec<Vec<(usize, f64)>>,
    /// State index of "at v, no memory".
    fresh: Vec<usize>,
}

impl WalkerChain {
    fn new(tree: &Tree, policy: WalkPolicy) -> Self {
        let n = tree.len();
        let mut pos = Vec::new();
        let mut index: HashMap<(usize, Option<usize>), usize> = HashMap::new();
        for v in 0..n {
            index.insert((v, None), pos.len());
            pos.push(v);
        }
        if policy == WalkPolicy::NonBacktracking {
            for v in 0..n {
                for &u in tree.neighbors(v) {
                    index.insert((v, Some(u)), pos.len());
                    pos.push(v);
                }
            }
        }
        let mut next = vec![Vec::new(); pos.len()];
        for (&(v, mem), &s) in &index {
            let nbrs = tree.neighbors(v);
            if nbrs.is_empty() {
                next[s].push((s, 1.0));
                continue;
            }
            let allowed: Vec<usize> = match (policy, mem) {
                (WalkPolicy::NonBacktracking, Some(m)) if nbrs.len() > 1 => {
                    nbrs.iter().copied().filter(|&w| w != m).collect()
                }
                _ => nbrs.to_vec(),
            };
            let p = 1.0 / allowed.len() as f64;
            for w in allowed {
                let key = match policy {
                    WalkPolicy::Uniform => (w, None),
                    WalkPolicy::NonBacktracking => (w, Some(v)),
                };
                next[s].push((index[&key], p));
            }
            next[s].sort_by_key(|&(t, _)| t);
        }
        WalkerChain {
            fresh: (0..n).collect(),
            pos,
            next,
        }
    }

    fn len(&self) -> usize {
        self.pos.len()
    }
}

/// Expected first-meeting times for every pair of starting vertices.
#[derive(Debug, Clone)]
pub struct FirstMeetingOracle {
    n1: usize,
    n2: usize,
    /// Indexed by `start1 * n2 + start2`; `None` when the walks can miss
    /// each other forever.
    expected: Vec<Option<f64>>,
    /// Number of unknowns of the linear system that was solved.
    pub unknowns: usize,
}

impl FirstMeetingOracle {
    /// Builds and solves the absorbing product chain.
    pub fn solve(
        t1: &Tree,
        t2: &Tree,
        bridges: &BridgeSet,
        policy: WalkPolicy,
        activation: Activation,
    ) -> Result<Self> {
        bridges.validate(t1, t2)?;
        let pairs = t1.len() * t2.len();
        if pairs > ORACLE_MAX_PAIRS {
            return Err(Error::StateSpaceTooLarge(pairs));
        }
        let c1 = WalkerChain::new(t1, policy);
        let c2 = WalkerChain::new(t2, policy);
        let adjacent = bridges.adjacency(t1.len(), t2.len());
        let m2 = c2.len();
        let total = c1.len() * m2;
        let absorbed = |s: usize| adjacent[c1.pos[s / m2] * t2.len() + c2.pos[s % m2]];

        // One-round transition: list of (next round-start state or None for
        // absorbed, probability, moves spent).
        let outcomes = |s: usize| -> Vec<(Option<usize>, f64, f64)> {
            let (a, b) = (s / m2, s % m2);
            let mut out = Vec::new();
            match activation {
                Activation::RandomToken => {
                    for &(a2, p) in &c1.next[a] {
                        let t = a2 * m2 + b;
                        out.push(((!absorbed(t)).then_some(t), 0.5 * p, 1.0));
                    }
                    for &(b2, p) in &c2.next[b] {
                        let t = a * m2 + b2;
                        out.push(((!absorbed(t)).then_some(t), 0.5 * p, 1.0));
                    }
                }
                Activation::ShuffledRounds => {
                    for first_is_one in [true, false] {
                        let (first, second): (&[(usize, f64)], _) = if first_is_one {
                            (&c1.next[a], &c2.next[b])
                        } else {
                            (&c2.next[b], &c1.next[a])
                        };
                        for &(x, px) in first {
                            let mid = if first_is_one { x * m2 + b } else { a * m2 + x };
                            if absorbed(mid) {
                                out.push((None, 0.5 * px, 1.0));
                                continue;
                            }
                            for &(y, py) in second {
                                let end = if first_is_one { x * m2 + y } else { y * m2 + x };
                                out.push(((!absorbed(end)).then_some(end), 0.5 * px * py, 2.0));
                            }
                        }
                    }
                }
            }
            out
        };

        // States that can reach absorption: reverse search from the states
        // with an absorbing outcome. A state that can reach one of the
        // others (a phase-locked trap) has infinite expectation too.
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); total];
        let mut leads_out = vec![false; total];
        #[allow(clippy::needless_range_loop)]
        for s in 0..total {
            if absorbed(s) {
                continue;
            }
            for (t, p, _) in outcomes(s) {
                if p == 0.0 {
                    continue;
                }
                match t {
                    Some(t) => preds[t].push(s),
                    None => leads_out[s] = true,
                }
            }
        }
        let backward = |seeds: Vec<usize>| {
            let mut mark = vec![false; total];
            let mut queue: VecDeque<usize> = seeds.into();
            for &s in &queue {
                mark[s] = true;
            }
            while let Some(t) = queue.pop_front() {
                for &s in &preds[t] {
                    if !mark[s] {
                        mark[s] = true;
                        queue.push_back(s);
                    }
                }
            }
            mark
        };
        let reaches_out = backward((0..total).filter(|&s| leads_out[s]).collect());
        let trapped = backward(
            (0..total)
                .filter(|&s| !absorbed(s) && !reaches_out[s])
                .collect(),
        );
        let good: Vec<bool> = (0..total).map(|s| !absorbed(s) && !trapped[s]).collect();

        let unknown: Vec<usize> = (0..total).filter(|&s| good[s]).collect();
        let mut slot = vec![usize::MAX; total];
        for (i, &s) in unknown.iter().enumerate() {
            slot[s] = i;
        }
        // E(s) - sum_t P(s,t) E(t) = sum p * moves
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(unknown.len());
        let mut rhs = Vec::with_capacity(unknown.len());
        for &s in &unknown {
            let mut row: HashMap<usize, f64> = HashMap::new();
            row.insert(slot[s], 1.0);
            let mut c = 0.0;
            for (t, p, moves) in outcomes(s) {
                c += p * moves;
                if let Some(t) = t {
                    // good states only transition to good or absorbed states
                    debug_assert!(good[t]);
                    *row.entry(slot[t]).or_insert(0.0) -= p;
                }
            }
            let mut row: Vec<_> = row.into_iter().collect();
            row.sort_by_key(|&(j, _)| j);
            rows.push(row);
            rhs.push(c);
        }
        let solution = solve_sparse(&rows, &rhs)?;

        let mut expected = vec![None; t1.len() * t2.len()];
        for u in 0..t1.len() {
            for v in 0..t2.len() {
                let s = c1.fresh[u] * m2 + c2.fresh[v];
                expected[u * t2.len() + v] = if absorbed(s) {
                    Some(0.0)
                } else if good[s] {
                    Some(solution[slot[s]])
                } else {
                    None
                };
            }
        }
        Ok(FirstMeetingOracle {
            n1: t1.len(),
            n2: t2.len(),
            expected,
            unknowns: unknown.len(),
        })
    }

    /// Expected moves to the first meeting from `(start1, start2)`.
    pub fn expected_from(&self, start1: usize, start2: usize) -> Result<f64> {
        if start1 >= self.n1 {
            return Err(Error::NotInTree {
                vertex: start1,
                size: self.n1,
            });
        }
        if start2 >= self.n2 {
            return Err(Error::NotInTree {
                vertex: start2,
                size: self.n2,
            });
        }
        self.expected[start1 * self.n2 + start2].ok_or(Error::Unreachable)
    }

    /// Average over starting pairs weighted by `w1(u) * w2(v)`; the weights
    /// need not be normalized.
    pub fn weighted_mean(&self, w1: &[f64], w2: &[f64]) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (u, &a) in w1.iter().enumerate().take(self.n1) {
            for (v, &b) in w2.iter().enumerate().take(self.n2) {
                let w = a * b;
                if w == 0.0 {
                    continue;
                }
                num += w * self.expected_from(u, v)?;
                den += w;
            }
        }
        Ok(num / den)
    }

    /// Mean over uniformly random starting vertices.
    pub fn uniform_mean(&self) -> Result<f64> {
        self.weighted_mean(&vec![1.0; self.n1], &vec![1.0; self.n2])
    }
}

/// Expected number of token moves until the first meeting of two tokens
/// started at `start1` (in `t1`) and `start2` (in `t2`) with empty memory.
pub fn exact_first_meeting(
    t1: &Tree,
    t2: &Tree,
    bridges: &BridgeSet,
    start1: usize,
    start2: usize,
    policy: WalkPolicy,
    activation: Activation,
) -> Result<f64> {
    FirstMeetingOracle::solve(t1, t2, bridges, policy, activation)?.expected_from(start1, start2)
}

fn solve_sparse(rows: &[Vec<(usize, f64)>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n <= DENSE_LIMIT {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] = v;
            }
        }
        let b = DVector::from_column_slice(rhs);
        return a
            .lu()
            .solve(&b)
            .map(|x| x.iter().copied().collect())
            .ok_or(Error::Unreachable);
    }
    bicgstab(rows, rhs, 1e-12, 200_000)
}

fn matvec(rows: &[Vec<(usize, f64)>], x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(rows) {
        *o = row.iter().map(|&(j, v)| v * x[j]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned BiCGSTAB. Fails with [`Error::Unreachable`] when it
/// does not reach the requested relative residual.
fn bicgstab(rows: &[Vec<(usize, f64)>], b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let diag: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().find(|&&(j, _)| j == i).map_or(1.0, |&(_, v)| v))
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(x, d)| x / d).collect() };
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for _ in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = precond(&p);
        matvec(rows, &phat, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let shat = precond(&s);
        matvec(rows, &shat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        if omega == 0.0 {
            break;
        }
    }
    // final check against the true residual
    let mut ax = vec![0.0; n];
    matvec(rows, &x, &mut ax);
    let res: f64 = ax
        .iter()
        .zip(b)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if res <= 1e3 * tol * bnorm {
        Ok(x)
    } else {
        Err(Error::Unreachable)
    }
}
