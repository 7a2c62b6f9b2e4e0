//! Timed topology churn applied between scheduler rounds.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TopologyOp, VertexId};
use crate::protocol::{connected_components, Rule, TopologyChange, World};
use crate::walk::WalkPolicy;

/// A topology event scheduled before the scheduler step of `round`. Vertex
/// fields are per-run aliases ([`VertexId::alias`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChurnEvent {
    pub round: u64,
    pub op: TopologyOp,
    pub u: u32,
    pub v: u32,
}

/// Events sorted by round.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChurnSchedule {
    pub events: Vec<ChurnEvent>,
}

impl ChurnSchedule {
    pub fn new(mut events: Vec<ChurnEvent>) -> Self {
        events.sort_by_key(|e| e.round);
        ChurnSchedule { events }
    }

    /// One JSON object per line; blank lines are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ev: ChurnEvent = serde_json::from_str(line)
                .map_err(|e| Error::InvalidParameter(format!("churn line {}: {e}", i + 1)))?;
            events.push(ev);
        }
        Ok(Self::new(events))
    }

    pub fn to_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }

    pub fn last_round(&self) -> Option<u64> {
        self.events.last().map(|e| e.round)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChurnConfig {
    pub policy: WalkPolicy,
    /// Hard limit on scheduler rounds.
    pub max_rounds: u64,
    /// Keep stepping after the last event until one token per connected
    /// component remains (or `max_rounds`).
    pub run_to_quiescence: bool,
    /// Run the exhaustive invariant check after every event batch and round.
    pub check_invariants: bool,
}

impl Default for ChurnConfig {
    fn default() -> Self {
        ChurnConfig {
            policy: WalkPolicy::Uniform,
            max_rounds: 1_000_000,
            run_to_quiescence: true,
            check_invariants: true,
        }
    }
}

/// One line of the churn trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChurnRecord {
    pub round: u64,
    /// `"events"` after an event batch, `"step"` after a scheduler step.
    pub phase: &'static str,
    pub tokens: usize,
    pub components: usize,
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub r4: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChurnTrace {
    pub records: Vec<ChurnRecord>,
    pub rounds: u64,
    /// True when the run ended with one token per connected component.
    pub quiescent: bool,
}

impl ChurnTrace {
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

fn resolve(world: &World, alias: u32, round: u64) -> Result<VertexId> {
    let v = VertexId::from_alias(alias);
    if world.graph().contains_vertex(v) {
        Ok(v)
    } else {
        Err(Error::BadSchedule {
            round,
            what: format!("unknown vertex {alias}"),
        })
    }
}

/// Applies all events of one round at once: every removal detaches its edge
/// first, then r1/r2 fire for all of them, then additions are made.
pub fn apply_batch(
    world: &mut World,
    batch: &[ChurnEvent],
) -> Result<Vec<crate::protocol::RuleFiring>> {
    let mut removed = Vec::new();
    for ev in batch.iter().filter(|e| e.op == TopologyOp::RemoveEdge) {
        let (u, v) = (
            resolve(world, ev.u, ev.round)?,
            resolve(world, ev.v, ev.round)?,
        );
        let rec = world.remove_edge(u, v).map_err(|_| Error::BadSchedule {
            round: ev.round,
            what: format!("absent edge {}-{}", ev.u, ev.v),
        })?;
        removed.push(rec);
    }
    let mut fired = Vec::new();
    for rec in removed {
        fired.extend(world.handle_topology_event(TopologyChange::Removed(rec)));
    }
    for ev in batch.iter().filter(|e| e.op == TopologyOp::AddEdge) {
        let (u, v) = (
            resolve(world, ev.u, ev.round)?,
            resolve(world, ev.v, ev.round)?,
        );
        world.add_edge(u, v).map_err(|e| Error::BadSchedule {
            round: ev.round,
            what: e.to_string(),
        })?;
    }
    Ok(fired)
}

/// Drives `world` through `schedule`: before the step of round `r`, every
/// event of round `r` is applied; then one scheduler step runs. Token counts
/// are logged after each event batch and each step.
pub fn churn_driver<R: Rng + ?Sized>(
    world: &mut World,
    schedule: &ChurnSchedule,
    cfg: &ChurnConfig,
    rng: &mut R,
) -> Result<ChurnTrace> {
    let check = |world: &World, round: u64| -> Result<()> {
        if cfg.check_invariants {
            world.check_invariants().map_err(|v| Error::Invariant {
                round,
                message: v.0,
            })?;
        }
        Ok(())
    };
    let mut trace = ChurnTrace::default();
    let last = schedule.last_round();
    let mut next = 0;
    let mut round = 0;
    loop {
        let start = next;
        while next < schedule.events.len() && schedule.events[next].round <= round {
            next += 1;
        }
        if next > start {
            let fired = apply_batch(world, &schedule.events[start..next])?;
            check(world, round)?;
            trace.records.push(ChurnRecord {
                round,
                phase: "events",
                tokens: world.token_count(),
                components: connected_components(world.graph()),
                r1: fired.iter().filter(|f| f.rule == Rule::Regenerate).count(),
                r2: fired.iter().filter(|f| f.rule == Rule::Cleanup).count(),
                r3: 0,
                r4: 0,
            });
        }
        let pending = last.is_some_and(|l| round < l);
        let components = connected_components(world.graph());
        let settled = world.token_count() == components;
        if round >= cfg.max_rounds || (!pending && (!cfg.run_to_quiescence || settled)) {
            trace.quiescent = settled;
            break;
        }
        let report = world.scheduler_step(cfg.policy, rng);
        check(world, round)?;
        trace.records.push(ChurnRecord {
            round,
            phase: "step",
            tokens: report.tokens,
            components,
            r1: 0,
            r2: 0,
            r3: report.count(Rule::Merge),
            r4: report.count(Rule::Circulate),
        });
        round += 1;
    }
    trace.rounds = round;
    Ok(trace)
}

/// A random churn script over the vertices of `world`: `events` edge
/// toggles spread over `rounds` rounds. Removals pick a present edge
/// (tree edges with probability `tree_bias` when there are some), additions
/// pick an absent pair. The script is valid against the topology it starts
/// from. A round whose every possible event is blocked is skipped, so the
/// script can be shorter than `events` on tiny graphs.
pub fn random_churn_script<R: Rng + ?Sized>(
    world: &World,
    rounds: u64,
    events: usize,
    tree_bias: f64,
    rng: &mut R,
) -> ChurnSchedule {
    let g = world.graph();
    let vs: Vec<u32> = g.vertices().map(VertexId::alias).collect();
    let mut present: Vec<(u32, u32)> = g.edges().map(|(_, a, b)| (a.alias(), b.alias())).collect();
    let mut tree: Vec<bool> = g
        .edges()
        .map(|(e, a, _)| g.port(a, e).is_some_and(|p| p.is_tree()))
        .collect();
    let mut rounds_of: Vec<u64> = (0..events)
        .map(|_| rng.gen_range(0..rounds.max(1)))
        .collect();
    rounds_of.sort_unstable();
    let mut out = Vec::with_capacity(events);
    // edges added in the current round; a batch applies removals first, so
    // these cannot be removed in the same round
    let mut fresh: Vec<(u32, u32)> = Vec::new();
    let mut current = None;
    for round in rounds_of {
        if current != Some(round) {
            current = Some(round);
            fresh.clear();
        }
        let removable: Vec<usize> = (0..present.len())
            .filter(|&i| !fresh.contains(&present[i]))
            .collect();
        let full = present.len() * 2 >= vs.len() * vs.len().saturating_sub(1);
        let remove = !removable.is_empty() && (full || rng.gen_bool(0.5));
        if remove {
            let tree_idx: Vec<usize> = removable.iter().copied().filter(|&i| tree[i]).collect();
            let i = if !tree_idx.is_empty() && rng.gen_bool(tree_bias) {
                *tree_idx.choose(rng).expect("non-empty")
            } else {
                *removable.choose(rng).expect("non-empty")
            };
            let (u, v) = present.swap_remove(i);
            tree.swap_remove(i);
            out.push(ChurnEvent {
                round,
                op: TopologyOp::RemoveEdge,
                u,
                v,
            });
        } else if !full {
            loop {
                let u = *vs.choose(rng).expect("vertices");
                let v = *vs.choose(rng).expect("vertices");
                if u == v
                    || present
                        .iter()
                        .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
                {
                    continue;
                }
                present.push((u, v));
                fresh.push((u, v));
                // the protocol may turn it into a tree edge later; the script
                // cannot know, so it is tracked as non-tree
                tree.push(false);
                out.push(ChurnEvent {
                    round,
                    op: TopologyOp::AddEdge,
                    u,
                    v,
                });
                break;
            }
        }
    }
    ChurnSchedule::new(out)
}
