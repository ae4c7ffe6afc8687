//! Values pinned from the first verified runs. A change here means scheduling
//! behavior changed.

use std::path::PathBuf;

use gridsched::fixtures;
use gridsched::ga::{GaAssigner, GaConfig};
use gridsched::platform::load_platform;
use gridsched::scheduler::{levels_for, run_ccf, static_list_schedule, verify_schedule, GreedyAssigner};
use gridsched::taskgraph::{generate_layered, load_graph, LayeredParams};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn fixture_files_match_builtins() {
    assert_eq!(load_graph(&fixture("nine_task.json")).unwrap(), fixtures::nine_task_graph());
    assert_eq!(load_platform(&fixture("three_unit.json")).unwrap(), fixtures::three_unit_platform());
    assert!(load_platform(&fixture("hetero_grid.json")).is_ok());
}

fn makespans(platform_file: &str) -> [f64; 3] {
    let g = fixtures::nine_task_graph();
    let p = load_platform(&fixture(platform_file)).unwrap();
    let levels = levels_for(&g, &p).unwrap();
    let s = static_list_schedule(&g, &p, &levels).unwrap();
    let greedy = run_ccf(&g, &p, &levels, &mut GreedyAssigner).unwrap().schedule;
    let mut ga = GaAssigner::new(GaConfig { seed: 1, ..Default::default() }).unwrap();
    let ga = run_ccf(&g, &p, &levels, &mut ga).unwrap().schedule;
    for sched in [&s, &greedy, &ga] {
        assert!(verify_schedule(sched, &g, &p).is_ok());
    }
    [s.makespan, greedy.makespan, ga.makespan]
}

#[test]
fn nine_task_on_three_unit() {
    assert_eq!(makespans("three_unit.json"), [16.0, 19.0, 19.0]);
}

#[test]
fn nine_task_on_hetero_grid() {
    assert_eq!(makespans("hetero_grid.json"), [16.5, 18.0, 16.5]);
}

#[test]
fn generated_graph_is_stable() {
    let g = generate_layered(&LayeredParams { seed: 7, ..Default::default() }).unwrap();
    let total: f64 = g.nodes.iter().map(|n| n.cost).sum();
    assert_eq!((g.nodes.len(), g.edges.len()), (25, 52));
    assert!((total - 114.83).abs() < 1e-9, "{total}");
}
