//! Residual-based entropy viscosity for the temperature equation.
//!
//! On each blood element `ν̃_K = β ‖u‖_{∞,K} min(h_K, h_K^α ‖R‖_{∞,K} / c)` with
//! `c = c_R ‖u‖_{∞,Ω} var(θ) diam(Ω)^{α−2}` and residual
//! `R = (∂θ/∂t + u·∇θ − S) |θ − θ_ref|^{α−1}`. The diffusion term of the
//! residual vanishes inside P1 elements and is left out. Norms are sampled at
//! the vertices and quadrature points of each element.

use super::PhysicsError;
use crate::fem::element::{velocity_at, ElementGeometry};
use crate::fem::quadrature::triangle_rule;
use crate::fem::{CoefficientField, VelocityField};
use crate::mesh::{Mesh, Subdomain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationParams {
    pub enabled: bool,
    /// Residual exponent, `1 ≤ α ≤ 2`.
    pub alpha: f64,
    pub beta: f64,
    pub c_r: f64,
    /// Temperature origin of the `|θ − θ_ref|^{α−1}` weight. `None` picks
    /// 0 for `α = 2` and the core temperature otherwise.
    pub theta_ref: Option<f64>,
}

impl Default for StabilizationParams {
    fn default() -> Self {
        Self {
            enabled: true,
            alpha: 2.0,
            beta: 0.5,
            c_r: 1.0,
            theta_ref: None,
        }
    }
}

impl StabilizationParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(1.0..=2.0).contains(&self.alpha) {
            return Err(PhysicsError::Invalid(format!("alpha must lie in [1, 2], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(PhysicsError::Invalid(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.c_r > 0.0 && self.c_r.is_finite()) {
            return Err(PhysicsError::Invalid(format!("c_r must be > 0, got {}", self.c_r)));
        }
        Ok(())
    }

    pub fn reference_temperature(&self, theta_core: f64) -> f64 {
        self.theta_ref
            .unwrap_or(if self.alpha == 2.0 { 0.0 } else { theta_core })
    }
}

/// Everything the residual needs at one time level.
#[derive(Debug, Clone, Copy)]
pub struct EntropyInputs<'a> {
    /// Latest known temperature.
    pub theta: &'a [f64],
    /// Temperature one step earlier; `None` selects the cap branch.
    pub theta_old: Option<&'a [f64]>,
    pub velocity: &'a VelocityField,
    /// Elementwise Joule source.
    pub joule: &'a CoefficientField,
    pub tau: f64,
    pub theta_core: f64,
}

/// Elementwise artificial viscosity; zero on tissue elements and when
/// stabilisation is disabled.
pub fn entropy_viscosity(
    mesh: &Mesh,
    inputs: &EntropyInputs,
    params: &StabilizationParams,
) -> Result<CoefficientField, PhysicsError> {
    let nt = mesh.num_triangles();
    if !params.enabled {
        return Ok(CoefficientField::uniform(nt, 0.0));
    }
    params.validate()?;
    let theta = inputs.theta;
    if theta.iter().any(|v| !v.is_finite()) || !inputs.velocity.is_finite() {
        return Err(PhysicsError::NonFinite("entropy viscosity inputs"));
    }
    let alpha = params.alpha;
    let theta_ref = params.reference_temperature(inputs.theta_core);

    let blood: Vec<usize> = (0..nt).filter(|&t| mesh.subdomain(t) == Subdomain::Blood).collect();
    let speeds: Vec<f64> = blood.iter().map(|&t| inputs.velocity.max_speed_on(mesh, t)).collect();
    let u_max = speeds.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = theta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let var = hi - lo;
    let c = params.c_r * u_max * var * mesh.domain_diameter().powf(alpha - 2.0);
    let use_residual = inputs.theta_old.is_some() && c > 0.0;

    let mut nu = vec![0.0; nt];
    for (&t, &u_k) in blood.iter().zip(&speeds) {
        if u_k == 0.0 {
            continue;
        }
        let h = mesh.diameter(t);
        let cap = params.beta * u_k * h;
        if !use_residual {
            nu[t] = cap;
            continue;
        }
        let old = inputs.theta_old.expect("checked above");
        let e = ElementGeometry::new(mesh.triangle_points(t));
        let tri = mesh.triangles()[t];
        let th = tri.map(|v| theta[v]);
        let dt = tri.map(|v| (theta[v] - old[v]) / inputs.tau);
        let grad = e.p1_gradient(th);
        let w = inputs.velocity.local(mesh, t);
        let source = inputs.joule.get(t);
        let residual_at = |l: [f64; 3]| {
            let (phi, _) = e.velocity_basis(l);
            let u = velocity_at(&phi, &w);
            let value = l[0] * th[0] + l[1] * th[1] + l[2] * th[2];
            let rate = l[0] * dt[0] + l[1] * dt[1] + l[2] * dt[2];
            let r = rate + u[0] * grad[0] + u[1] * grad[1] - source;
            (r * (value - theta_ref).abs().powf(alpha - 1.0)).abs()
        };
        let mut r_max = 0.0f64;
        for l in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            r_max = r_max.max(residual_at(l));
        }
        for q in triangle_rule() {
            r_max = r_max.max(residual_at(q.bary));
        }
        nu[t] = params.beta * u_k * h.min(h.powf(alpha) * r_max / c);
    }
    Ok(CoefficientField::new(nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::triangle_rule;
    use crate::mesh::BoundaryTag;

    fn one_blood_triangle() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![Subdomain::Blood],
            vec![
                ([0, 1], BoundaryTag::Interface),
                ([1, 2], BoundaryTag::Outlet),
                ([2, 0], BoundaryTag::Inlet),
            ],
        )
        .unwrap()
    }

    fn uniform_flow(mesh: &Mesh, u: [f64; 2]) -> VelocityField {
        let mut f = VelocityField::zeros(mesh);
        for v in &mut f.nodal {
            *v = u;
        }
        f
    }

    #[test]
    fn still_fluid_has_no_viscosity() {
        let mesh = one_blood_triangle();
        let theta = vec![37.0; 3];
        let inputs = EntropyInputs {
            theta: &theta,
            theta_old: Some(&theta),
            velocity: &VelocityField::zeros(&mesh),
            joule: &CoefficientField::uniform(1, 0.0),
            tau: 0.1,
            theta_core: 37.0,
        };
        let nu = entropy_viscosity(&mesh, &inputs, &StabilizationParams::default()).unwrap();
        assert_eq!(nu.get(0), 0.0);
    }

    #[test]
    fn linear_profile_matches_hand_evaluation() {
        // θ = x, u = (1,0), α = 2, θ_ref = 0: R = (u·∇θ) θ = x, so ‖R‖_∞ = 1
        let mesh = one_blood_triangle();
        let theta = vec![0.0, 1.0, 0.0];
        let u = uniform_flow(&mesh, [1.0, 0.0]);
        let inputs = EntropyInputs {
            theta: &theta,
            theta_old: Some(&theta),
            velocity: &u,
            joule: &CoefficientField::uniform(1, 0.0),
            tau: 0.1,
            theta_core: 37.0,
        };
        let params = StabilizationParams {
            theta_ref: Some(0.0),
            c_r: 3.0,
            ..Default::default()
        };
        let nu = entropy_viscosity(&mesh, &inputs, &params).unwrap();
        let h = 2f64.sqrt();
        let r_max = triangle_rule().iter().map(|q| q.bary[1]).fold(1.0, f64::max);
        let c = 3.0 * 1.0 * 1.0;
        let expected = 0.5 * 1.0 * h.min(h * h * r_max / c);
        assert!((nu.get(0) - expected).abs() < 1e-12, "{} vs {expected}", nu.get(0));
        assert!(nu.get(0) < 0.5 * h);
    }

    #[test]
    fn huge_residual_hits_cap() {
        let mesh = one_blood_triangle();
        let theta = vec![0.0, 1.0, 0.0];
        let old = vec![-1e6, 1.0, 0.0];
        let u = uniform_flow(&mesh, [2.0, 0.0]);
        let inputs = EntropyInputs {
            theta: &theta,
            theta_old: Some(&old),
            velocity: &u,
            joule: &CoefficientField::uniform(1, 0.0),
            tau: 1e-3,
            theta_core: 37.0,
        };
        let nu = entropy_viscosity(&mesh, &inputs, &StabilizationParams::default()).unwrap();
        assert_eq!(nu.get(0), 0.5 * 2.0 * 2f64.sqrt());
    }

    #[test]
    fn exact_steady_solution_has_no_viscosity() {
        // θ = 40 + x with u·∇θ = S = 1 is steady
        let mesh = one_blood_triangle();
        let theta = vec![40.0, 41.0, 40.0];
        let u = uniform_flow(&mesh, [1.0, 0.0]);
        let inputs = EntropyInputs {
            theta: &theta,
            theta_old: Some(&theta),
            velocity: &u,
            joule: &CoefficientField::uniform(1, 1.0),
            tau: 0.01,
            theta_core: 37.0,
        };
        let nu = entropy_viscosity(&mesh, &inputs, &StabilizationParams::default()).unwrap();
        assert!(nu.get(0) <= 1e-10);
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let p = StabilizationParams {
            alpha: 2.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
