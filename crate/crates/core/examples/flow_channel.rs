//! Blood flow past the electrode at body temperature, without heating.
//! Reports the inflow/outflow balance and the recirculation behind the
//! electrode.
//!
//! ```text
//! cargo run --release --example flow_channel -- [steps] [tau]
//! ```

use rfa_sim::mesh::{BoundaryTag, Subdomain};
use rfa_sim::simulation::{scenario_test1, velocity_l2, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(50);
    let tau: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.01);

    let mut config = scenario_test1();
    config.boundary.electrode_potential = 0.0;
    config.time.tau = tau;
    config.time.t_final = tau * steps as f64;
    let mut sim = Simulation::new(config)?;
    while !sim.is_finished() {
        let r = sim.step()?;
        let s = sim.state();
        if s.step % 10 == 0 || sim.is_finished() {
            println!(
                "t = {:.3}  |u| = {:.5}  GMRES iterations {}",
                s.t,
                velocity_l2(sim.mesh(), &s.velocity),
                r.flow.iterations
            );
        }
    }

    let mesh = sim.mesh();
    let u = &sim.state().velocity;
    // volume flux through a vertical line, trapezoidal rule on wall nodes
    let flux = |tag: BoundaryTag| {
        let mut nodes: Vec<usize> = mesh.vertices_with_tag(tag).into_iter().collect();
        nodes.sort_by(|a, b| mesh.vertices()[*a][1].total_cmp(&mesh.vertices()[*b][1]));
        nodes
            .windows(2)
            .map(|w| 0.5 * (u.nodal[w[0]][0] + u.nodal[w[1]][0]) * (mesh.vertices()[w[1]][1] - mesh.vertices()[w[0]][1]))
            .sum::<f64>()
    };
    println!("inflow {:.6}, outflow {:.6}", flux(BoundaryTag::Inlet), flux(BoundaryTag::Outlet));

    let (worst, at) = (0..mesh.num_triangles())
        .filter(|&t| mesh.subdomain(t) == Subdomain::Blood)
        .map(|t| (u.value(mesh, t, [1.0 / 3.0; 3])[0], mesh.centroid(t)))
        .fold((f64::INFINITY, [0.0, 0.0]), |a, b| if b.0 < a.0 { b } else { a });
    println!("strongest backflow u_x = {worst:.4} at ({:.3}, {:.3})", at[0], at[1]);
    Ok(())
}
