use dutycycle::state_graph::check_edges_harvested;
use dutycycle::{
    brute_force_matching, build_graph, check_energy_budget, offline_duty_cycle, online_duty_cycle, schedule_from_matching,
    Activation, DeviceId, Edge, Efficiency, EnergyTrace, OnlineConfig, OnlineMode,
};

fn pair() -> (EnergyTrace, EnergyTrace) {
    (
        EnergyTrace::from_slots(DeviceId::new("u"), 9, &[1, 4, 6, 8]).unwrap(),
        EnergyTrace::from_slots(DeviceId::new("v"), 9, &[1, 3, 6, 9]).unwrap(),
    )
}

#[test]
fn offline_walkthrough_edges_and_totals() {
    let (u, v) = pair();
    let graph = build_graph(&u, &v, Efficiency::DEFAULT).unwrap();
    let r = offline_duty_cycle(&graph);
    let mut edges: Vec<Edge> = r.matching.edges().to_vec();
    edges.sort_by_key(|e| (e.u_slot, e.v_slot));
    assert_eq!(edges, vec![Edge::new(1, 1), Edge::new(4, 3), Edge::new(6, 6), Edge::new(8, 9)]);
    assert_eq!((r.cat_total, r.sat_total), (3.5, 2.0));

    let schedule = schedule_from_matching(&r.matching, 9).unwrap();
    check_energy_budget(&schedule, &u, &v).unwrap();
    assert_eq!(schedule.cat, vec![1.0, 0.0, 0.0, 0.75, 0.0, 1.0, 0.0, 0.0, 0.75]);

    let oracle = brute_force_matching(&graph).unwrap();
    assert_eq!((oracle.best_sync_count, oracle.best_async_count), (r.sync_count, r.async_count));
}

#[test]
fn walkthrough_json_shape() {
    let (u, v) = pair();
    let r = offline_duty_cycle(&build_graph(&u, &v, Efficiency::DEFAULT).unwrap());
    let value = serde_json::to_value(&r).unwrap();
    assert_eq!(value["cat"], 3.5);
    assert_eq!(value["edges"][0], serde_json::json!({"u": 1, "v": 1, "kind": "sync"}));
    let back = dutycycle::Matching::from_json(&r.matching.to_json().unwrap()).unwrap();
    assert_eq!(back, r.matching);
}

#[test]
fn online_runs_on_walkthrough_are_feasible() {
    let (u, v) = pair();
    for mode in OnlineMode::ALL {
        for seed in 0..200 {
            let cfg = OnlineConfig { activation: Activation::Warmup { slots: 3 }, eta: Efficiency::DEFAULT, seed, mode };
            let r = online_duty_cycle(&u, &v, &cfg).unwrap();
            check_energy_budget(&r.schedule, &u, &v).unwrap();
            check_edges_harvested(&r.matching, &u, &v).unwrap();
            assert!(r.cat_total <= 3.5);
        }
    }
}
