//! Shape properties of the figure experiments at reduced sample sizes.

use spanforest::analysis::{fusion_probability, ratio_to_f64};
use spanforest::experiments::figures::{drift_point, fig2a_points, visit_figure_trace};
use spanforest::experiments::{random_tree, visit_trace_on, FigureParams, Scenario};
use spanforest::seed::{rng_from_seed, subseed};
use spanforest::stats::Summary;
use spanforest::WalkPolicy;

fn reduced(seed: u64) -> FigureParams {
    FigureParams {
        runs: 1500,
        interval_runs: 400,
        ..FigureParams::new(seed)
    }
}

#[test]
fn first_meeting_exceeds_inter_meeting_and_bias_helps() {
    let p = reduced(41);
    let nb_p = FigureParams {
        interval_runs: 0,
        ..p.clone()
    };
    for k in [1, 3, 8, 20] {
        let u = drift_point(&p, k, WalkPolicy::Uniform).unwrap();
        let nb = drift_point(&nb_p, k, WalkPolicy::NonBacktracking).unwrap();
        let inter = u.pooled_inter_meeting.unwrap();
        let analytic = u.analytic_pooled.unwrap();
        assert!(u.first_meeting.lower() > inter.upper(), "k={k}");
        assert!(nb.first_meeting.upper() < u.first_meeting.lower(), "k={k}");
        assert!((inter.mean - analytic).abs() < 0.1 * analytic, "k={k}");
        // per-instance averaging weights slow instances more
        assert!(u.analytic > analytic, "k={k}");
    }
}

#[test]
fn inter_meeting_scales_inversely_with_bridges() {
    // 1 / mean(P) over the instance stream the fig2b column samples
    let pooled = |k: usize| {
        let s = Scenario::new(50, 50, k, 77);
        let v: Vec<f64> = (0..20_000)
            .map(|i| {
                let inst = s.instance(i).unwrap();
                ratio_to_f64(fusion_probability(&inst.t1, &inst.t2, &inst.bridges).unwrap())
            })
            .collect();
        1.0 / Summary::of(&v).mean
    };
    let m1 = pooled(1);
    // degrees of a uniform tree on 50 vertices average 98/50
    let expected = 4.0 * 49.0 * 49.0 / (1.96 * 1.96);
    assert!(
        (m1 - expected).abs() < 0.02 * expected,
        "{m1} vs {expected}"
    );
    for k in 2..=20 {
        let scaled = k as f64 * pooled(k) / m1;
        assert!((scaled - 1.0).abs() <= 0.35, "k={k}: {scaled}");
    }
}

#[test]
fn simulated_inter_meeting_scales_inversely_with_bridges() {
    let p = FigureParams {
        runs: 400,
        interval_runs: 400,
        window_meetings: 50,
        ..FigureParams::new(8)
    };
    let m1 = drift_point(&p, 1, WalkPolicy::Uniform)
        .unwrap()
        .pooled_inter_meeting
        .unwrap()
        .mean;
    for k in [2, 5, 10, 20] {
        let mk = drift_point(&p, k, WalkPolicy::Uniform)
            .unwrap()
            .pooled_inter_meeting
            .unwrap()
            .mean;
        let scaled = k as f64 * mk / m1;
        assert!((scaled - 1.0).abs() <= 0.35, "k={k}: {scaled}");
    }
}

#[test]
fn closed_form_tracks_simulation_per_size() {
    for n in [10, 40] {
        let pts = fig2a_points(n, 20, 4, 300, WalkPolicy::Uniform, 5).unwrap();
        let a = pts.iter().map(|p| p.analytic).sum::<f64>() / pts.len() as f64;
        let s = pts.iter().map(|p| p.simulated).sum::<f64>() / pts.len() as f64;
        assert!((a - s).abs() < 0.1 * a, "n={n}: {a} vs {s}");
    }
}

fn gap_cv(policy: WalkPolicy, seeds: u64) -> f64 {
    let mut rng = rng_from_seed(3);
    let tree = random_tree(50, &mut rng).unwrap();
    let mut gaps = Vec::new();
    for s in 0..seeds {
        let mut walk = rng_from_seed(subseed(9, s));
        let target = (s as usize * 7) % 50;
        gaps.extend(visit_trace_on(&tree, 0, target, policy, 20_000, &mut walk).gaps());
    }
    Summary::of_u64(&gaps).cv()
}

#[test]
fn non_backtracking_visits_are_less_bursty() {
    let (u, nb) = (
        gap_cv(WalkPolicy::Uniform, 10),
        gap_cv(WalkPolicy::NonBacktracking, 10),
    );
    assert!(nb < u, "{nb} vs {u}");
}

#[test]
fn visit_figures_trace_one_target() {
    let p = FigureParams::new(12);
    for policy in WalkPolicy::ALL {
        let tr = visit_figure_trace(&p, policy).unwrap();
        assert_eq!(tr.steps, 3000);
        assert!(tr.ticks.windows(2).all(|w| w[1] > w[0]));
        assert!(
            tr.gaps().iter().all(|&g| g >= 2),
            "a tree walk returns after an even number of moves"
        );
    }
}
