//! Solves both electric potentials on the default mesh at body temperature
//! and checks that they stay within the boundary data. Writes the field to a
//! VTK file.
//!
//! ```text
//! cargo run --release --example potential_max_principle -- [electrode_potential] [out.vtk]
//! ```

use rfa_sim::fem::CoefficientField;
use rfa_sim::io::write_vtk;
use rfa_sim::materials::MaterialModel;
use rfa_sim::mesh::{build_channel_tissue_mesh, mesh_quality, GeometryParams};
use rfa_sim::physics::{joule_field, potential_step, FieldState};
use rfa_sim::simulation::Snapshot;
use rfa_sim::sparse::SolverOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let drive: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(1.0);
    let output = args.next().unwrap_or_else(|| "potential.vtk".into());

    let mesh = build_channel_tissue_mesh(&GeometryParams::default())?;
    let q = mesh_quality(&mesh);
    println!("mesh: {} triangles, largest angle {:.2} deg", mesh.num_triangles(), q.max_angle);

    let model = MaterialModel::default();
    let mut state = FieldState::initial(&mesh, model.theta_core);
    let sol = potential_step(&mesh, &model, &state.theta, drive, &SolverOptions::default())?;
    let joule = joule_field(&mesh, &model, &state.theta, &sol.blood, &sol.tissue)?;
    state.phi_blood = sol.blood;
    state.phi_tissue = sol.tissue;

    let phi = state.merged_potential(&mesh);
    let (lo, hi) = phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("potential range [{lo:.3e}, {hi:.12}] for boundary data [0, {drive}]");
    println!("CG iterations: blood {}, tissue {}", sol.reports[0].iterations, sol.reports[1].iterations);
    let power: f64 = (0..mesh.num_triangles()).map(|t| joule.get(t) * mesh.area(t)).sum();
    println!("total Joule power {power:.6}");

    let nt = mesh.num_triangles();
    let snap = Snapshot {
        state,
        joule,
        artificial_viscosity: CoefficientField::uniform(nt, 0.0),
    };
    write_vtk(&mesh, &snap, &output)?;
    println!("wrote {output}");
    Ok(())
}
