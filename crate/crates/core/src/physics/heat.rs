use super::{require_converged, PhysicsError};
use crate::fem::{
    apply_dirichlet, assemble_advection, assemble_stiffness, density_load, CoefficientField, Region, ScalarSpace,
    VelocityField,
};
use crate::materials::{CoefficientKind, MaterialModel};
use crate::mesh::Mesh;
use crate::sparse::{solve_general_from, SolveReport, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSolution {
    pub theta: Vec<f64>,
    pub report: SolveReport,
}

/// One backward-Euler solve of
/// `c ∂θ/∂t − ∇·(κ∇θ) + u·∇θ = f` on the whole domain with a row-lumped
/// capacity matrix. `load` is the assembled `∫ f α_i`; advection acts on
/// blood elements only.
#[allow(clippy::too_many_arguments)]
pub fn solve_heat(
    mesh: &Mesh,
    capacity: &CoefficientField,
    conductivity: &CoefficientField,
    velocity: &VelocityField,
    tau: f64,
    theta_prev: &[f64],
    load: &[f64],
    fixed: &[Option<f64>],
    opts: &SolverOptions,
) -> Result<HeatSolution, PhysicsError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(PhysicsError::Invalid(format!("time step must be > 0, got {tau}")));
    }
    if theta_prev.iter().any(|v| !v.is_finite()) {
        return Err(PhysicsError::NonFinite("previous temperature"));
    }
    let space = ScalarSpace::new(mesh, Region::All);
    let mut lumped = vec![0.0; mesh.num_vertices()];
    for t in 0..mesh.num_triangles() {
        let share = capacity.get(t) * mesh.area(t) / 3.0;
        for v in mesh.triangles()[t] {
            lumped[v] += share;
        }
    }
    let a = assemble_stiffness(&space, conductivity)?;
    let d = assemble_advection(&space, velocity)?;
    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nnz() + d.nnz() + lumped.len());
    for m in [&a, &d] {
        for i in 0..m.rows() {
            trip.extend(m.row(i).map(|(j, v)| (i, j, v)));
        }
    }
    for (v, m) in lumped.iter().enumerate() {
        trip.push((v, v, m / tau));
    }
    let k = crate::sparse::CsrMatrix::from_triplets(a.rows(), a.cols(), &trip).expect("square system");
    let rhs: Vec<f64> = (0..lumped.len()).map(|v| lumped[v] * theta_prev[v] / tau + load[v]).collect();
    let (k, rhs) = apply_dirichlet(&k, &rhs, fixed)?;
    let guess: Vec<f64> = theta_prev.iter().zip(fixed).map(|(t, g)| g.unwrap_or(*t)).collect();
    let (theta, report) = solve_general_from(&k, &rhs, guess, opts);
    require_converged("heat", report)?;
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(PhysicsError::NonFinite("temperature"));
    }
    Ok(HeatSolution { theta, report })
}

/// Temperature step of the decoupled scheme: conductivity at the lagged
/// temperature plus the artificial viscosity, advection by the new velocity,
/// Joule heating as source.
#[allow(clippy::too_many_arguments)]
pub fn heat_step(
    mesh: &Mesh,
    model: &MaterialModel,
    theta_prev: &[f64],
    velocity: &VelocityField,
    joule: &CoefficientField,
    artificial_viscosity: &CoefficientField,
    tau: f64,
    fixed: &[Option<f64>],
    opts: &SolverOptions,
) -> Result<HeatSolution, PhysicsError> {
    let eta = model.coefficient_field(mesh, theta_prev, CoefficientKind::ThermalConductivity)?;
    let capacity = model.coefficient_field(mesh, theta_prev, CoefficientKind::HeatCapacity)?;
    let kappa = eta.plus(artificial_viscosity);
    let load = density_load(&ScalarSpace::new(mesh, Region::All), joule);
    solve_heat(mesh, &capacity, &kappa, velocity, tau, theta_prev, &load, fixed, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, Subdomain};

    #[test]
    fn uniform_state_is_steady() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 5, 5, Subdomain::Tissue).unwrap();
        let nt = mesh.num_triangles();
        let theta = vec![37.0; mesh.num_vertices()];
        let mut fixed = vec![None; mesh.num_vertices()];
        for e in mesh.boundary_edges() {
            for v in e.vertices {
                fixed[v] = Some(37.0);
            }
        }
        let sol = heat_step(
            &mesh,
            &MaterialModel::default(),
            &theta,
            &VelocityField::zeros(&mesh),
            &CoefficientField::uniform(nt, 0.0),
            &CoefficientField::uniform(nt, 0.0),
            0.01,
            &fixed,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.theta.iter().all(|v| (v - 37.0).abs() < 1e-10));
    }
}
