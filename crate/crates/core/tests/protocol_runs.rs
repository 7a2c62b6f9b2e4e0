//! End-to-end protocol runs through the public API.

use spanforest::experiments::churn::{
    churn_driver, random_churn_script, ChurnConfig, ChurnSchedule,
};
use spanforest::experiments::{random_connected_graph, Instance};
use spanforest::protocol::connected_components;
use spanforest::seed::{rng_from_seed, subseed};
use spanforest::{WalkPolicy, World};

fn settled_world(n: usize, extra: usize, seed: u64) -> World {
    let mut rng = rng_from_seed(seed);
    let edges = random_connected_graph(n, extra, &mut rng).unwrap();
    let (mut w, vs) = World::with_vertices(n);
    for (a, b) in edges {
        w.add_edge(vs[a], vs[b]).unwrap();
    }
    w.run_to_quiescence(WalkPolicy::Uniform, 10_000_000, &mut rng)
        .unwrap();
    w
}

#[test]
fn bridged_pair_fuses_into_one_tree() {
    for seed in 0..20 {
        let mut rng = rng_from_seed(subseed(3, seed));
        let inst = Instance::generate(8, 6, 2, &mut rng).unwrap();
        let (mut w, a, b) = inst.to_world(0, 0).unwrap();
        assert_eq!(w.token_count(), 2);
        let policy = WalkPolicy::ALL[seed as usize % 2];
        w.run_to_quiescence(policy, 1_000_000, &mut rng).unwrap();
        let forest = w.check_invariants().unwrap();
        assert_eq!(forest.len(), 1);
        assert_eq!(forest.trees[0].len(), a.len() + b.len());
        assert_eq!(forest.trees[0].tree_edges.len(), a.len() + b.len() - 1);
    }
}

#[test]
fn churn_schedule_survives_a_jsonl_roundtrip() {
    let world = settled_world(20, 10, 5);
    let script = random_churn_script(&world, 50, 30, 0.6, &mut rng_from_seed(6));
    let text = script.to_jsonl();
    assert_eq!(ChurnSchedule::from_jsonl(&text).unwrap(), script);

    let run = |schedule: &ChurnSchedule| {
        let mut w = world.clone();
        let trace = churn_driver(
            &mut w,
            schedule,
            &ChurnConfig::default(),
            &mut rng_from_seed(7),
        )
        .unwrap();
        (
            trace.to_jsonl(),
            w.token_count(),
            connected_components(w.graph()),
        )
    };
    let (a, tokens, components) = run(&script);
    let (b, ..) = run(&ChurnSchedule::from_jsonl(&text).unwrap());
    assert_eq!(a, b);
    assert_eq!(tokens, components);
}

#[test]
fn churn_trace_lines_carry_token_counts() {
    let mut w = settled_world(15, 5, 9);
    let script = random_churn_script(&w, 20, 12, 1.0, &mut rng_from_seed(10));
    let trace = churn_driver(
        &mut w,
        &script,
        &ChurnConfig::default(),
        &mut rng_from_seed(11),
    )
    .unwrap();
    let mut events = 0;
    for line in trace.to_jsonl().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let tokens = v["tokens"].as_u64().unwrap();
        assert!(tokens >= v["components"].as_u64().unwrap());
        if v["phase"] == "events" {
            events += 1;
        }
    }
    assert!(events > 0);
    assert!(trace.quiescent);
}
