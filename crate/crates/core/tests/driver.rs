use rfa_sim::mesh::BoundaryTag;
use rfa_sim::simulation::{
    probe, run, scenario_test1, scenario_test2, Checkpoint, ScenarioConfig, Simulation, SimulationError,
};

fn short(mut c: ScenarioConfig, steps: usize) -> ScenarioConfig {
    c.geometry.mesh_size = 0.075;
    c.time.tau = 0.02;
    c.time.t_final = 0.02 * steps as f64;
    c.output.cadence = 2;
    c
}

#[test]
fn wall_and_electrode_probes_hold_their_data() {
    let c = short(scenario_test1(), 3);
    let mut sim = Simulation::new(c).unwrap();
    let mesh = sim.mesh().clone();
    let wall = *mesh.vertices_with_tag(BoundaryTag::TissueBottom).iter().next().unwrap();
    let arc_node = *mesh
        .vertices_with_tag(BoundaryTag::Electrode)
        .iter()
        .find(|&&v| mesh.vertices()[v][1] > 1e-9)
        .unwrap();
    while !sim.is_finished() {
        sim.step().unwrap();
        let s = sim.state();
        assert_eq!(probe(&mesh, &s.theta, mesh.vertices()[wall]).unwrap(), 37.0);
        let phi = s.merged_potential(&mesh);
        assert!((probe(&mesh, &phi, mesh.vertices()[arc_node]).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn output_cadence_and_series_rows() {
    let result = run(short(scenario_test1(), 5)).unwrap();
    assert_eq!(result.series.len(), 6);
    let steps: Vec<usize> = result.snapshots.iter().map(|s| s.state.step).collect();
    assert_eq!(steps, vec![0, 2, 4, 5]);
    assert!(result.series.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(result.reports.len(), 5);
}

#[test]
fn checkpoint_file_restart_matches_straight_run() {
    let c = short(scenario_test2(), 6);
    let straight = run(c.clone()).unwrap();
    let mut sim = Simulation::new(c.clone()).unwrap();
    for _ in 0..2 {
        sim.step().unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    sim.checkpoint().write(&path).unwrap();
    let mut resumed = Simulation::resume(c, Checkpoint::read(&path).unwrap()).unwrap();
    while !resumed.is_finished() {
        resumed.step().unwrap();
    }
    assert_eq!(resumed.state(), &straight.snapshots.last().unwrap().state);
}

#[test]
fn checkpoint_for_another_mesh_is_refused() {
    let coarse = Simulation::new(short(scenario_test1(), 1)).unwrap().checkpoint();
    let mut fine = scenario_test1();
    fine.geometry.mesh_size = 0.05;
    let e = Simulation::resume(fine, coarse).err().unwrap();
    assert!(matches!(e, SimulationError::Checkpoint(_)), "{e}");
}

#[test]
fn saline_cools_the_electrode_neighbourhood() {
    let result = run(short(scenario_test2(), 4)).unwrap();
    let last = result.series.last().unwrap();
    assert!(last.probes[0][0] < 37.0);
    let state = &result.snapshots.last().unwrap().state;
    let coldest = state.theta.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((coldest - 20.0).abs() < 1e-9);
}

#[test]
fn failed_step_keeps_partial_results() {
    let mut c = short(scenario_test1(), 3);
    c.boundary.inlet_amplitude = 1e308;
    let (err, partial) = *run(c).unwrap_err();
    assert!(matches!(err, SimulationError::Step { step: 1, .. }), "{err}");
    assert_eq!(partial.series.len(), 1);
    assert_eq!(partial.snapshots.len(), 1);
}
