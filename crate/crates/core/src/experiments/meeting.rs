//! Meeting-time measurement for two tokens walking in two bridged trees.
//!
//! Merging is disabled: a meeting (the two tokens on the two ends of a
//! bridge) is counted and both tokens keep walking, so the same pair of trees
//! yields a first-meeting time and a stream of inter-meeting intervals.
//! Meetings are checked after every single activation, which is exactly
//! where the protocol would re-evaluate r3. Time is counted in token moves.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::stats::Summary;
use crate::tree::Tree;
use crate::walk::{choose_move, Activation, WalkPolicy};

use super::scenario::{Instance, Scenario};

/// Compressed adjacency of a [`Tree`], for the hot loop.
#[derive(Debug, Clone)]
pub struct CsrTree {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl CsrTree {
    pub fn new(tree: &Tree) -> Self {
        let mut offsets = Vec::with_capacity(tree.len() + 1);
        let mut targets = Vec::with_capacity(2 * tree.edge_count());
        offsets.push(0);
        for v in 0..tree.len() {
            targets.extend(tree.neighbors(v).iter().map(|&u| u as u32));
            offsets.push(targets.len() as u32);
        }
        CsrTree { offsets, targets }
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.targets[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A token walking on a fixed tree.
#[derive(Debug, Clone, Copy)]
pub struct Walker {
    pub position: u32,
    pub memory: Option<u32>,
}

impl Walker {
    pub fn at(position: usize) -> Self {
        Walker {
            position: position as u32,
            memory: None,
        }
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, tree: &CsrTree, policy: WalkPolicy, rng: &mut R) {
        if let Some(next) = choose_move(tree.neighbors(self.position), self.memory, policy, rng) {
            self.memory = Some(self.position);
            self.position = next;
        }
    }
}

/// Knobs of [`measure_meeting`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeetingConfig {
    pub runs: usize,
    /// Inter-meeting intervals collected per run after burn-in; 0 stops each
    /// run at its first meeting.
    pub intervals: usize,
    /// Burn-in before inter-meeting collection, in rounds per vertex of the
    /// larger tree (one round = one activation per token).
    pub burn_in_rounds_per_vertex: u64,
    pub activation: Activation,
    /// Draw a fresh instance for every run instead of reusing instance 0.
    pub resample: bool,
    /// Only the first `interval_runs` runs collect inter-meeting intervals;
    /// the others stop at their first meeting. `None` means all runs.
    pub interval_runs: Option<usize>,
    /// Length in moves of an observation window opened after burn-in; every
    /// meeting inside it is counted. 0 disables the window. Applies to the
    /// same runs as `intervals`.
    pub window: u64,
    /// A run that has not met after this many moves fails. Two
    /// non-backtracking walks on paths can stay out of phase forever.
    pub max_moves: u64,
}

impl Default for MeetingConfig {
    fn default() -> Self {
        MeetingConfig {
            runs: 1000,
            intervals: 100,
            burn_in_rounds_per_vertex: 10,
            activation: Activation::ShuffledRounds,
            resample: true,
            interval_runs: None,
            window: 0,
            max_moves: 1_000_000_000,
        }
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Moves until the tokens first met (0 if they started adjacent).
    pub first_meeting_moves: u64,
    /// Round in which the first meeting happened (0 if at start).
    pub first_meeting_rounds: u64,
    /// Moves between consecutive meetings after burn-in; each entry is at
    /// least 1.
    pub inter_meeting_moves: Vec<u64>,
    /// Meetings inside the observation window and the window length.
    pub window_meetings: u64,
    pub window_moves: u64,
    pub moves_total: u64,
}

impl RunStats {
    pub fn inter_meeting_mean(&self) -> Option<f64> {
        if self.inter_meeting_moves.is_empty() {
            None
        } else {
            Some(
                self.inter_meeting_moves.iter().sum::<u64>() as f64
                    / self.inter_meeting_moves.len() as f64,
            )
        }
    }

    /// Inter-meeting intervals converted to rounds of two activations.
    pub fn inter_meeting_rounds(&self) -> Vec<f64> {
        self.inter_meeting_moves
            .iter()
            .map(|&m| m as f64 / 2.0)
            .collect()
    }
}

/// One run on a fixed instance from the given starting vertices.
pub fn meeting_run<R: Rng + ?Sized>(
    inst: &Instance,
    start: (usize, usize),
    policy: WalkPolicy,
    cfg: &MeetingConfig,
    rng: &mut R,
) -> Result<RunStats> {
    let trees = [CsrTree::new(&inst.t1), CsrTree::new(&inst.t2)];
    let n2 = inst.t2.len();
    let table = inst.bridges.adjacency(inst.t1.len(), n2);
    let adjacent = |w: &[Walker; 2]| table[w[0].position as usize * n2 + w[1].position as usize];
    let burn_in = 2 * cfg.burn_in_rounds_per_vertex * inst.t1.len().max(n2) as u64;

    let window_end = burn_in + cfg.window;
    let mut window_meetings = 0;
    let mut walkers = [Walker::at(start.0), Walker::at(start.1)];
    let mut t: u64 = 0;
    let mut first = adjacent(&walkers).then_some(0u64);
    let mut last_meeting: Option<u64> = None;
    let mut intervals = Vec::with_capacity(cfg.intervals);
    let mut order = [0usize, 1];
    loop {
        if first.is_some() && intervals.len() >= cfg.intervals && t >= window_end {
            break;
        }
        if first.is_none() && t >= cfg.max_moves {
            return Err(Error::NoMeeting(t));
        }
        let batch: &[usize] = match cfg.activation {
            Activation::ShuffledRounds => {
                order.shuffle(rng);
                &order
            }
            Activation::RandomToken => {
                order[0] = rng.gen_range(0..2);
                &order[..1]
            }
        };
        for &i in batch {
            walkers[i].step(&trees[i], policy, rng);
            t += 1;
            if adjacent(&walkers) {
                first.get_or_insert(t);
                if t > burn_in {
                    if t <= window_end {
                        window_meetings += 1;
                    }
                    if let Some(prev) = last_meeting {
                        if intervals.len() < cfg.intervals || t <= window_end {
                            intervals.push(t - prev);
                        }
                    }
                    last_meeting = Some(t);
                }
            }
        }
    }
    let first = first.expect("loop exits after the first meeting");
    Ok(RunStats {
        first_meeting_moves: first,
        first_meeting_rounds: first.div_ceil(2),
        inter_meeting_moves: intervals,
        window_meetings,
        window_moves: cfg.window,
        moves_total: t,
    })
}

/// Aggregate of many runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingSummary {
    pub policy: WalkPolicy,
    pub first_meeting: Summary,
    /// Mean of the per-run mean inter-meeting intervals; the confidence
    /// interval is computed over per-run means.
    pub inter_meeting: Summary,
    /// Window moves divided by window meetings, pooled over all windowed
    /// runs. The interval follows from the per-run meeting counts.
    pub pooled_inter_meeting: Option<Summary>,
    /// Mean of `1 / P_fusion` over the instances used.
    pub analytic: f64,
    /// `1 / mean(P_fusion)` over the instances of the windowed runs, the
    /// quantity `pooled_inter_meeting` estimates.
    pub analytic_pooled: Option<f64>,
    pub runs: Vec<RunStats>,
}

/// Pooled moves per meeting with a delta-method interval from the per-run
/// meeting counts (all windows have the same length). `None` without
/// windowed runs.
fn pooled(runs: &[RunStats]) -> Option<Summary> {
    let counts: Vec<u64> = runs
        .iter()
        .filter(|r| r.window_moves > 0)
        .map(|r| r.window_meetings)
        .collect();
    let window = runs.iter().map(|r| r.window_moves).find(|&w| w > 0)?;
    let c = Summary::of_u64(&counts);
    let mean = window as f64 / c.mean;
    Some(Summary {
        count: c.count,
        mean,
        std_dev: f64::NAN,
        half_width: mean * c.relative_half_width(),
    })
}

/// Runs `cfg.runs` independent runs of `scenario` in parallel. Tokens start
/// on uniformly random vertices of their trees. Results are folded in run
/// order, so the output does not depend on the thread count.
pub fn measure_meeting(
    scenario: &Scenario,
    policy: WalkPolicy,
    cfg: &MeetingConfig,
) -> Result<MeetingSummary> {
    if scenario.k == 0 {
        return Err(Error::InvalidParameter(
            "meeting measurement needs at least one bridge".into(),
        ));
    }
    let fixed = if cfg.resample {
        None
    } else {
        Some(scenario.instance(0)?)
    };
    let results: Vec<Result<(RunStats, f64)>> = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|r| {
            let inst = match &fixed {
                Some(i) => i.clone(),
                None => scenario.instance(r)?,
            };
            let p = crate::analysis::fusion_probability(&inst.t1, &inst.t2, &inst.bridges)
                .map_or(0.0, crate::analysis::ratio_to_f64);
            let mut rng = rng_from_seed(scenario.run_seed(r));
            let start = (
                rng.gen_range(0..inst.t1.len()),
                rng.gen_range(0..inst.t2.len()),
            );
            let run_cfg = match cfg.interval_runs {
                Some(limit) if r as usize >= limit => MeetingConfig {
                    intervals: 0,
                    window: 0,
                    ..*cfg
                },
                _ => *cfg,
            };
            Ok((meeting_run(&inst, start, policy, &run_cfg, &mut rng)?, p))
        })
        .collect();
    let mut runs = Vec::with_capacity(cfg.runs);
    let mut probs = Vec::with_capacity(cfg.runs);
    for r in results {
        let (stats, p) = r?;
        runs.push(stats);
        probs.push(p);
    }
    let firsts: Vec<u64> = runs.iter().map(|r| r.first_meeting_moves).collect();
    let inter: Vec<f64> = runs
        .iter()
        .filter_map(RunStats::inter_meeting_mean)
        .collect();
    let analytic: Vec<f64> = probs.iter().map(|&p| 1.0 / p).collect();
    let windowed: Vec<f64> = runs
        .iter()
        .zip(&probs)
        .filter(|(r, _)| r.window_moves > 0)
        .map(|(_, &p)| p)
        .collect();
    Ok(MeetingSummary {
        policy,
        first_meeting: Summary::of_u64(&firsts),
        inter_meeting: Summary::of(&inter),
        pooled_inter_meeting: pooled(&runs),
        analytic: Summary::of(&analytic).mean,
        analytic_pooled: (!windowed.is_empty()).then(|| 1.0 / Summary::of(&windowed).mean),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use crate::tree::BridgeSet;

    fn two_by_two(bridges: Vec<(usize, usize)>) -> Instance {
        Instance {
            t1: Tree::path(2),
            t2: Tree::path(2),
            bridges: BridgeSet::new(bridges).unwrap(),
        }
    }

    #[test]
    fn adjacent_start_meets_at_zero() {
        let inst = two_by_two(vec![(0, 0)]);
        let cfg = MeetingConfig {
            intervals: 0,
            ..MeetingConfig::default()
        };
        let r = meeting_run(
            &inst,
            (0, 0),
            WalkPolicy::Uniform,
            &cfg,
            &mut rng_from_seed(1),
        )
        .unwrap();
        assert_eq!(r.first_meeting_moves, 0);
        assert_eq!(r.first_meeting_rounds, 0);
    }

    #[test]
    fn two_vertex_trees_inter_meeting_is_four() {
        let inst = two_by_two(vec![(0, 0)]);
        let cfg = MeetingConfig {
            intervals: 100_000,
            ..MeetingConfig::default()
        };
        let r = meeting_run(
            &inst,
            (1, 1),
            WalkPolicy::Uniform,
            &cfg,
            &mut rng_from_seed(2),
        )
        .unwrap();
        let mean = r.inter_meeting_mean().unwrap();
        assert!((mean - 4.0).abs() < 0.08, "mean {mean}");
        assert!(r.inter_meeting_moves.iter().all(|&x| x >= 1));
    }

    #[test]
    fn phase_locked_walks_hit_the_cap() {
        let inst = Instance {
            t1: Tree::path(3),
            t2: Tree::path(3),
            bridges: BridgeSet::new(vec![(0, 0)]).unwrap(),
        };
        let cfg = MeetingConfig {
            intervals: 0,
            max_moves: 10_000,
            ..MeetingConfig::default()
        };
        // memories point inward after the first move; the sweeps stay one
        // half-period apart
        let mut rng = rng_from_seed(3);
        let outcomes: Vec<_> = (0..50)
            .map(|_| meeting_run(&inst, (2, 0), WalkPolicy::NonBacktracking, &cfg, &mut rng))
            .collect();
        assert!(outcomes.iter().any(|r| r == &Err(Error::NoMeeting(10_000))));
    }

    #[test]
    fn window_counts_meetings() {
        let inst = two_by_two(vec![(0, 0)]);
        let cfg = MeetingConfig {
            intervals: 0,
            window: 400_000,
            ..MeetingConfig::default()
        };
        let r = meeting_run(
            &inst,
            (1, 1),
            WalkPolicy::Uniform,
            &cfg,
            &mut rng_from_seed(4),
        )
        .unwrap();
        assert_eq!(r.window_moves, 400_000);
        let per_meeting = r.window_moves as f64 / r.window_meetings as f64;
        assert!((per_meeting - 4.0).abs() < 0.08, "{per_meeting}");
        assert!(r.moves_total >= 400_000);
    }

    #[test]
    fn pooled_mean_weights_instances_by_time() {
        // two windows of 100 moves with 1 and 4 meetings: 200 / 5 = 40,
        // while the per-run means would average (100 + 25) / 2
        let run = |m| RunStats {
            first_meeting_moves: 0,
            first_meeting_rounds: 0,
            inter_meeting_moves: Vec::new(),
            window_meetings: m,
            window_moves: 100,
            moves_total: 100,
        };
        assert_eq!(pooled(&[run(1), run(4)]).unwrap().mean, 40.0);
        assert!(pooled(&[]).is_none());
    }

    #[test]
    fn measure_rejects_zero_bridges() {
        let s = Scenario::new(5, 5, 0, 1);
        assert!(measure_meeting(&s, WalkPolicy::Uniform, &MeetingConfig::default()).is_err());
    }

    #[test]
    fn measure_is_deterministic() {
        let s = Scenario::new(10, 10, 2, 77);
        let cfg = MeetingConfig {
            runs: 20,
            intervals: 10,
            ..MeetingConfig::default()
        };
        let a = measure_meeting(&s, WalkPolicy::NonBacktracking, &cfg).unwrap();
        let b = measure_meeting(&s, WalkPolicy::NonBacktracking, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
