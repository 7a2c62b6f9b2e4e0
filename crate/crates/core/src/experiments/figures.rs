//! The five figure tables, rendered as CSV.
//!
//! Every table is a pure function of its [`FigureParams`]; runs are folded in
//! index order, so the bytes do not depend on the worker count.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{expected_fusion_time, ratio_to_f64};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, subseed};
use crate::stats::Summary;
use crate::walk::WalkPolicy;

use super::meeting::{measure_meeting, meeting_run, MeetingConfig, MeetingSummary};
use super::scenario::{random_tree, Scenario};
use super::visits::{visit_trace_on, VisitTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig3a,
        FigureId::Fig3b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Knobs of the figure experiments. The defaults are the published
/// configuration; tests shrink them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureParams {
    pub seed: u64,
    /// Tree sizes swept by fig2a.
    pub sizes: Vec<usize>,
    /// Instances per size in fig2a.
    pub instances: usize,
    /// Runs per fig2a instance, each collecting `instance_intervals`.
    pub instance_runs: usize,
    pub instance_intervals: usize,
    /// Tree size for fig2b, fig2c, fig3a and fig3b.
    pub n: usize,
    /// Bridge counts swept by fig2b and fig3b.
    pub bridges: Vec<usize>,
    /// First-meeting runs per bridge count.
    pub runs: usize,
    /// How many of those runs also open an observation window and count the
    /// meetings inside it.
    pub interval_runs: usize,
    /// Window length in expected meetings: a window spans
    /// `window_meetings * (n - 1)^2 / k` moves, which holds about that many
    /// meetings when degrees average 2.
    pub window_meetings: usize,
    /// Walk length for fig2c and fig3a.
    pub steps: u64,
}

impl FigureParams {
    pub fn new(seed: u64) -> Self {
        FigureParams {
            seed,
            sizes: (10..=200).step_by(10).collect(),
            instances: 100,
            instance_runs: 10,
            instance_intervals: 500,
            n: 50,
            bridges: (1..=20).collect(),
            runs: 8000,
            interval_runs: 3500,
            window_meetings: 100,
            steps: 3000,
        }
    }

    fn validate(&self, id: FigureId) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        match id {
            FigureId::Fig2a => {
                if self.sizes.iter().any(|&n| n < 1)
                    || self.instances == 0
                    || self.instance_runs == 0
                {
                    return bad("fig2a needs positive sizes, instances and runs");
                }
                if self.instance_intervals == 0 {
                    return bad("fig2a needs at least one interval per run");
                }
            }
            FigureId::Fig2b | FigureId::Fig3b => {
                if self.n < 1 || self.runs == 0 {
                    return bad("tree size and run count must be positive");
                }
                if self.bridges.iter().any(|&k| k == 0 || k > self.n * self.n) {
                    return bad("bridge counts must lie in 1..=n*n");
                }
                if self.interval_runs > 0 && self.window_meetings == 0 {
                    return bad("interval runs need a non-empty window");
                }
            }
            FigureId::Fig2c | FigureId::Fig3a => {
                if self.n < 2 || self.steps == 0 {
                    return bad("visit traces need n >= 2 and steps >= 1");
                }
            }
        }
        Ok(())
    }
}

/// A rendered table: fixed column order, `.` decimal separator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FigureTable {
    pub id: FigureId,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl FigureTable {
    fn new(id: FigureId, header: &[&str]) -> Self {
        FigureTable {
            id,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii table")
    }

    /// Values of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

fn fixed(x: f64) -> String {
    format!("{x:.3}")
}

/// Bridge count used by fig2a for trees of `n` vertices.
pub fn fig2a_bridges(n: usize) -> usize {
    ((n as f64 / 10.0).round() as usize).max(1)
}

/// One fig2a instance: the closed-form mean fusion time and the simulated
/// mean inter-meeting interval on the same pair of trees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstancePoint {
    pub analytic: f64,
    pub simulated: f64,
    pub intervals: usize,
}

impl InstancePoint {
    pub fn relative_error(&self) -> f64 {
        (self.simulated - self.analytic).abs() / self.analytic
    }
}

/// Runs the fig2a measurement for `instances` instances of size `n`.
pub fn fig2a_points(
    n: usize,
    instances: usize,
    runs: usize,
    intervals: usize,
    policy: WalkPolicy,
    seed: u64,
) -> Result<Vec<InstancePoint>> {
    let scenario = Scenario::new(n, n, fig2a_bridges(n), subseed(seed, n as u64));
    let cfg = MeetingConfig {
        runs,
        intervals,
        ..MeetingConfig::default()
    };
    let per_run: Vec<Result<Vec<u64>>> = (0..(instances * runs) as u64)
        .into_par_iter()
        .map(|job| {
            let inst = scenario.instance(job / runs as u64)?;
            let mut rng = rng_from_seed(scenario.run_seed(job));
            let start = (rng.gen_range(0..n), rng.gen_range(0..n));
            Ok(meeting_run(&inst, start, policy, &cfg, &mut rng)?.inter_meeting_moves)
        })
        .collect();
    let mut points = Vec::with_capacity(instances);
    let mut it = per_run.into_iter();
    for i in 0..instances as u64 {
        let inst = scenario.instance(i)?;
        let analytic = expected_fusion_time(&inst.t1, &inst.t2, &inst.bridges)?
            .map(ratio_to_f64)
            .ok_or(Error::Unreachable)?;
        let mut sum = 0u64;
        let mut count = 0usize;
        for r in it.by_ref().take(runs) {
            let r = r?;
            sum += r.iter().sum::<u64>();
            count += r.len();
        }
        points.push(InstancePoint {
            analytic,
            simulated: sum as f64 / count as f64,
            intervals: count,
        });
    }
    Ok(points)
}

/// Window length in moves for the fig2b/fig3b interval runs.
pub fn drift_window(params: &FigureParams, k: usize) -> u64 {
    let e = params.n.saturating_sub(1).max(1) as u64;
    params.window_meetings as u64 * (e * e).div_ceil(k as u64)
}

/// The fig2b/fig3b measurement at `k` bridges. Both policies see the same
/// instances and run seeds.
pub fn drift_point(params: &FigureParams, k: usize, policy: WalkPolicy) -> Result<MeetingSummary> {
    let scenario = Scenario::new(params.n, params.n, k, subseed(params.seed, k as u64));
    let cfg = MeetingConfig {
        runs: params.runs,
        intervals: 0,
        window: drift_window(params, k),
        interval_runs: Some(params.interval_runs),
        ..MeetingConfig::default()
    };
    measure_meeting(&scenario, policy, &cfg)
}

/// The tree, start and target shared by fig2c and fig3a, and the trace of
/// `policy` on them.
pub fn visit_figure_trace(params: &FigureParams, policy: WalkPolicy) -> Result<VisitTrace> {
    let mut rng = rng_from_seed(subseed(params.seed, 0));
    let tree = random_tree(params.n, &mut rng)?;
    let start = rng.gen_range(0..params.n);
    let target = rng.gen_range(0..params.n);
    let mut walk_rng = rng_from_seed(subseed(params.seed, 1));
    Ok(visit_trace_on(
        &tree,
        start,
        target,
        policy,
        params.steps,
        &mut walk_rng,
    ))
}

fn fig2a(params: &FigureParams) -> Result<FigureTable> {
    let mut t = FigureTable::new(
        FigureId::Fig2a,
        &[
            "n",
            "bridges",
            "instances",
            "analytic_mean",
            "simulated_mean",
            "simulated_ci95",
            "mean_relative_error",
            "within_10pct",
        ],
    );
    for &n in &params.sizes {
        let pts = fig2a_points(
            n,
            params.instances,
            params.instance_runs,
            params.instance_intervals,
            WalkPolicy::Uniform,
            params.seed,
        )?;
        let analytic = Summary::of(&pts.iter().map(|p| p.analytic).collect::<Vec<_>>());
        let simulated = Summary::of(&pts.iter().map(|p| p.simulated).collect::<Vec<_>>());
        let err = Summary::of(
            &pts.iter()
                .map(InstancePoint::relative_error)
                .collect::<Vec<_>>(),
        );
        let within =
            pts.iter().filter(|p| p.relative_error() <= 0.1).count() as f64 / pts.len() as f64;
        t.rows.push(vec![
            n.to_string(),
            fig2a_bridges(n).to_string(),
            pts.len().to_string(),
            fixed(analytic.mean),
            fixed(simulated.mean),
            fixed(simulated.half_width),
            fixed(err.mean),
            fixed(within),
        ]);
    }
    Ok(t)
}

fn drift(params: &FigureParams, id: FigureId) -> Result<FigureTable> {
    let mut header = vec![
        "bridges",
        "analytic_mean",
        "inter_meeting_mean",
        "inter_meeting_ci95",
        "first_meeting_mean",
        "first_meeting_ci95",
    ];
    if id == FigureId::Fig3b {
        header.extend(["nb_first_meeting_mean", "nb_first_meeting_ci95"]);
    }
    let mut t = FigureTable::new(id, &header);
    for &k in &params.bridges {
        let u = drift_point(params, k, WalkPolicy::Uniform)?;
        let inter = u.pooled_inter_meeting;
        let mut row = vec![
            k.to_string(),
            u.analytic_pooled.map_or(String::new(), fixed),
            inter.map_or(String::new(), |s| fixed(s.mean)),
            inter.map_or(String::new(), |s| fixed(s.half_width)),
            fixed(u.first_meeting.mean),
            fixed(u.first_meeting.half_width),
        ];
        if id == FigureId::Fig3b {
            let nb = drift_point(params, k, WalkPolicy::NonBacktracking)?;
            row.push(fixed(nb.first_meeting.mean));
            row.push(fixed(nb.first_meeting.half_width));
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn visits(params: &FigureParams, id: FigureId) -> Result<FigureTable> {
    let policy = match id {
        FigureId::Fig3a => WalkPolicy::NonBacktracking,
        _ => WalkPolicy::Uniform,
    };
    let tr = visit_figure_trace(params, policy)?;
    let mut t = FigureTable::new(
        id,
        &["policy", "target", "target_degree", "visit", "tick", "gap"],
    );
    let mut prev = None;
    for (i, &tick) in tr.ticks.iter().enumerate() {
        t.rows.push(vec![
            policy.name().to_string(),
            tr.target.to_string(),
            tr.target_degree.to_string(),
            i.to_string(),
            tick.to_string(),
            prev.map_or(String::new(), |p: u64| (tick - p).to_string()),
        ]);
        prev = Some(tick);
    }
    Ok(t)
}

/// Runs experiment `id` and returns its table.
pub fn run_figure(id: FigureId, params: &FigureParams) -> Result<FigureTable> {
    params.validate(id)?;
    match id {
        FigureId::Fig2a => fig2a(params),
        FigureId::Fig2b | FigureId::Fig3b => drift(params, id),
        FigureId::Fig2c | FigureId::Fig3a => visits(params, id),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> FigureParams {
        FigureParams {
            sizes: vec![10, 20],
            instances: 4,
            instance_runs: 2,
            instance_intervals: 50,
            n: 12,
            bridges: vec![1, 3],
            runs: 60,
            interval_runs: 20,
            window_meetings: 20,
            steps: 500,
            ..FigureParams::new(seed)
        }
    }

    #[test]
    fn ids_parse() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert_eq!("FIG2B".parse::<FigureId>().unwrap(), FigureId::Fig2b);
        assert!(
            matches!("fig4".parse::<FigureId>(), Err(Error::UnknownExperiment(s)) if s == "fig4")
        );
    }

    #[test]
    fn fig2a_bridge_rule() {
        assert_eq!(fig2a_bridges(1), 1);
        assert_eq!(fig2a_bridges(10), 1);
        assert_eq!(fig2a_bridges(50), 5);
        assert_eq!(fig2a_bridges(200), 20);
    }

    #[test]
    fn tables_have_header_and_fixed_precision() {
        let p = small(3);
        let t = run_figure(FigureId::Fig3b, &p).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "bridges,analytic_mean,inter_meeting_mean,inter_meeting_ci95,first_meeting_mean,first_meeting_ci95,nb_first_meeting_mean,nb_first_meeting_ci95"
        );
        assert_eq!(lines.count(), 2);
        for v in t.column("first_meeting_mean").unwrap() {
            let (_, frac) = v.split_once('.').unwrap();
            assert_eq!(frac.len(), 3);
        }
    }

    #[test]
    fn visit_tables_share_tree_and_target() {
        let p = small(4);
        let a = run_figure(FigureId::Fig2c, &p).unwrap();
        let b = run_figure(FigureId::Fig3a, &p).unwrap();
        assert_eq!(
            a.column("target").unwrap()[0],
            b.column("target").unwrap()[0]
        );
        assert_eq!(a.column("policy").unwrap()[0], "uniform");
        assert_eq!(b.column("policy").unwrap()[0], "nobacktrack");
        let ticks: Vec<u64> = a
            .column("tick")
            .unwrap()
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert!(ticks.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn same_seed_same_bytes() {
        for id in FigureId::ALL {
            let p = small(5);
            assert_eq!(
                run_figure(id, &p).unwrap().to_csv(),
                run_figure(id, &p).unwrap().to_csv(),
                "{id}"
            );
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = small(6);
        p.bridges = vec![0];
        assert!(run_figure(FigureId::Fig2b, &p).is_err());
        let mut p = small(6);
        p.steps = 0;
        assert!(run_figure(FigureId::Fig2c, &p).is_err());
    }
}
