//! Buoyancy-driven flow: runs the scenario with the Boussinesq force and
//! compares the final velocity with the unforced run.
//!
//! ```text
//! cargo run --release --example boussinesq_recirculation
//! ```

use rfa_sim::mesh::{build_channel_tissue_mesh, Subdomain};
use rfa_sim::simulation::{body_force, run, scenario_test1, scenario_test3, ForceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = scenario_test3();
    let mesh = build_channel_tissue_mesh(&config.geometry)?;
    let forced = run(config.clone()).map_err(|e| e.0)?;
    let plain = run(scenario_test1()).map_err(|e| e.0)?;
    let a = &forced.snapshots.last().expect("final snapshot").state;
    let b = &plain.snapshots.last().expect("final snapshot").state;

    let blood: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| mesh.subdomain(t) == Subdomain::Blood).collect();
    let backflow = blood.iter().filter(|&&t| a.velocity.value(&mesh, t, [1.0 / 3.0; 3])[0] < 0.0).count();
    println!("{backflow} of {} blood elements carry backflow", blood.len());

    let f = body_force(&mesh, &config.material, config.force, &a.theta);
    let fmax = f.iter().map(|v| v[1].abs()).fold(0.0, f64::max);
    let ForceModel::Boussinesq { coefficient } = config.force else { unreachable!() };
    println!("buoyancy coefficient {coefficient:.4e}, largest |F_y| {fmax:.4e}");
    let dv = a
        .velocity
        .nodal
        .iter()
        .zip(&b.velocity.nodal)
        .map(|(x, y)| (x[0] - y[0]).hypot(x[1] - y[1]))
        .fold(0.0, f64::max);
    println!("largest nodal velocity change caused by buoyancy {dv:.3e}");
    Ok(())
}
