//! Manufactured-solution convergence studies and discrete invariant checks.
//! Backs the `verify` subcommand.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fem::element::{velocity_at, ElementGeometry};
use crate::fem::quadrature::triangle_rule;
use crate::fem::{
    assemble_convection_skew, assemble_load, collect_scalar_dirichlet, BcKind, BoundaryCondition, CoefficientField,
    Region, ScalarData, ScalarSpace, VelocityField, VelocitySpace,
};
use crate::materials::MaterialModel;
use crate::mesh::{build_channel_tissue_mesh, rectangle_mesh, BoundaryTag, GeometryParams, Mesh, Point, Subdomain};
use crate::physics::{potential_step, solve_elliptic, solve_flow, solve_heat, FlowSettings, PhysicsError};
use crate::sparse::{dot, Preconditioner, SolverOptions};

const WALLS: [BoundaryTag; 4] = [BoundaryTag::Inlet, BoundaryTag::ChannelTop, BoundaryTag::Outlet, BoundaryTag::Interface];

/// Errors of one quantity across refinement levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub quantity: &'static str,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub name: &'static str,
    pub h: Vec<f64>,
    pub series: Vec<ErrorSeries>,
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive levels.
pub fn observed_orders(h: &[f64], errors: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

impl ConvergenceStudy {
    /// Order between the two finest levels.
    pub fn finest_order(&self, quantity: &str) -> Option<f64> {
        let s = self.series.iter().find(|s| s.quantity == quantity)?;
        observed_orders(&self.h, &s.errors).last().copied()
    }
}

fn unit_square(n: usize) -> Mesh {
    rectangle_mesh([0.0, 0.0], [1.0, 1.0], n, n, Subdomain::Blood).expect("valid rectangle")
}

/// `‖u_h − u‖_{L²}` for a P1 field.
pub fn scalar_l2_error(mesh: &Mesh, values: &[f64], exact: impl Fn(Point) -> f64) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        let e = ElementGeometry::new(mesh.triangle_points(t));
        let tri = mesh.triangles()[t];
        for q in triangle_rule() {
            let uh: f64 = (0..3).map(|k| q.bary[k] * values[tri[k]]).sum();
            let d = uh - exact(e.map(q.bary));
            sum += q.weight * e.area * d * d;
        }
    }
    sum.sqrt()
}

/// `(‖u_h − u‖_{L²}, |u_h − u|_{H¹})` for a P1-bubble velocity on blood.
pub fn velocity_errors(
    mesh: &Mesh,
    u: &VelocityField,
    exact: impl Fn(Point) -> [f64; 2],
    exact_grad: impl Fn(Point) -> [[f64; 2]; 2],
) -> (f64, f64) {
    let (mut l2, mut h1) = (0.0, 0.0);
    for t in VelocitySpace::new(mesh).elements() {
        let e = ElementGeometry::new(mesh.triangle_points(t));
        let w = u.local(mesh, t);
        for q in triangle_rule() {
            let (phi, dphi) = e.velocity_basis(q.bary);
            let p = e.map(q.bary);
            let uh = velocity_at(&phi, &w);
            let ue = exact(p);
            let ge = exact_grad(p);
            let wq = q.weight * e.area;
            for c in 0..2 {
                l2 += wq * (uh[c] - ue[c]).powi(2);
                for d in 0..2 {
                    let g: f64 = (0..4).map(|k| w[k][c] * dphi[k][d]).sum();
                    h1 += wq * (g - ge[c][d]).powi(2);
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

fn walls_dirichlet(mesh: &Mesh, g: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Vec<Option<f64>> {
    let bcs = [BoundaryCondition::new(
        &WALLS,
        BcKind::DirichletScalar(ScalarData::Profile(std::sync::Arc::new(g))),
    )];
    collect_scalar_dirichlet(mesh, &bcs, false).expect("walls are tagged")
}

/// `−∇·(σ∇φ) = f` on the unit square with `σ = 1 + xy` sampled at element
/// centroids and `φ = sin(πx) sin(πy)`.
pub fn mms_potential(levels: &[usize]) -> Result<ConvergenceStudy, PhysicsError> {
    let sigma = |p: Point| 1.0 + p[0] * p[1];
    let phi = |p: Point| (PI * p[0]).sin() * (PI * p[1]).sin();
    let f = move |p: Point| {
        let (sx, cx) = (PI * p[0]).sin_cos();
        let (sy, cy) = (PI * p[1]).sin_cos();
        let (phx, phy) = (PI * cx * sy, PI * sx * cy);
        -(p[1] * phx + p[0] * phy) + 2.0 * PI * PI * sigma(p) * sx * sy
    };
    let opts = SolverOptions::default();
    let mut h = Vec::new();
    let mut errors = Vec::new();
    for &n in levels {
        let mesh = unit_square(n);
        let space = ScalarSpace::new(&mesh, Region::All);
        let coeff = CoefficientField::new((0..mesh.num_triangles()).map(|t| sigma(mesh.centroid(t))).collect());
        let load = assemble_load(&space, f);
        let fixed = walls_dirichlet(&mesh, |_| 0.0);
        let (x, report) = solve_elliptic(&space, &coeff, &load, &fixed, &opts)?;
        if !report.converged {
            return Err(PhysicsError::Solve { stage: "potential", report });
        }
        h.push(1.0 / n as f64);
        errors.push(scalar_l2_error(&mesh, &x, phi));
    }
    Ok(ConvergenceStudy {
        name: "potential",
        h,
        series: vec![ErrorSeries { quantity: "L2", errors }],
    })
}

/// Backward-Euler advection–diffusion with `θ = θ̄ + sin(πx) sin(πy) t`,
/// velocity `(1, 0.5)`, conductivity 0.5, `τ = h²/2`, up to `t = 0.1`.
pub fn mms_heat(levels: &[usize]) -> Result<ConvergenceStudy, PhysicsError> {
    let kappa = 0.5;
    let vel = [1.0, 0.5];
    let theta_core = 37.0;
    let t_final = 0.1;
    let s = |p: Point| (PI * p[0]).sin() * (PI * p[1]).sin();
    let opts = SolverOptions::default();
    let mut h = Vec::new();
    let mut errors = Vec::new();
    for &n in levels {
        let mesh = unit_square(n);
        let space = ScalarSpace::new(&mesh, Region::All);
        let nt = mesh.num_triangles();
        let hn = 1.0 / n as f64;
        let steps = (t_final / (0.5 * hn * hn)).ceil() as usize;
        let tau = t_final / steps as f64;
        let mut u = VelocityField::zeros(&mesh);
        for v in &mut u.nodal {
            *v = vel;
        }
        let capacity = CoefficientField::uniform(nt, 1.0);
        let cond = CoefficientField::uniform(nt, kappa);
        let mut theta = vec![theta_core; mesh.num_vertices()];
        for k in 1..=steps {
            let t = k as f64 * tau;
            let f = move |p: Point| {
                let (sx, cx) = (PI * p[0]).sin_cos();
                let (sy, cy) = (PI * p[1]).sin_cos();
                let adv = vel[0] * PI * cx * sy + vel[1] * PI * sx * cy;
                sx * sy + t * adv + 2.0 * PI * PI * kappa * sx * sy * t
            };
            let load = assemble_load(&space, f);
            let fixed = walls_dirichlet(&mesh, move |p| theta_core + s(p) * t);
            theta = solve_heat(&mesh, &capacity, &cond, &u, tau, &theta, &load, &fixed, &opts)?.theta;
        }
        h.push(hn);
        errors.push(scalar_l2_error(&mesh, &theta, |p| theta_core + s(p) * t_final));
    }
    Ok(ConvergenceStudy {
        name: "heat",
        h,
        series: vec![ErrorSeries { quantity: "L2", errors }],
    })
}

/// Steady Stokes with unit viscosity on the unit square. Velocity is the curl
/// of `ψ = sin²(πx) sin²(πy)`, pressure `cos(πx) cos(πy)`.
pub fn mms_stokes(levels: &[usize]) -> Result<ConvergenceStudy, PhysicsError> {
    let a = |x: f64| (PI * x).sin().powi(2);
    let a1 = |x: f64| PI * (2.0 * PI * x).sin();
    let a2 = |x: f64| 2.0 * PI * PI * (2.0 * PI * x).cos();
    let a3 = |x: f64| -4.0 * PI.powi(3) * (2.0 * PI * x).sin();
    let u_exact = move |p: Point| [a(p[0]) * a1(p[1]), -a1(p[0]) * a(p[1])];
    let grad_exact = move |p: Point| {
        [
            [a1(p[0]) * a1(p[1]), a(p[0]) * a2(p[1])],
            [-a2(p[0]) * a(p[1]), -a1(p[0]) * a1(p[1])],
        ]
    };
    let p_exact = |p: Point| (PI * p[0]).cos() * (PI * p[1]).cos();
    let nu = 1.0;
    // −∇·(ν𝔻(u)) = −½νΔu for divergence-free u
    let force = move |_: usize, p: Point| {
        let lap_x = a2(p[0]) * a1(p[1]) + a(p[0]) * a3(p[1]);
        let lap_y = -(a3(p[0]) * a(p[1]) + a1(p[0]) * a2(p[1]));
        [
            -0.5 * nu * lap_x - PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
            -0.5 * nu * lap_y - PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
        ]
    };
    let settings = FlowSettings {
        tau: None,
        convection: false,
        pressure_shift: 1e-10,
        zero_mean_pressure: true,
    };
    let opts = SolverOptions {
        restart: 200,
        ..SolverOptions::default()
            .with_tol(1e-8)
            .with_preconditioner(Preconditioner::Ilu0)
    };
    let mut h = Vec::new();
    let (mut el2, mut eh1, mut ep) = (Vec::new(), Vec::new(), Vec::new());
    for &n in levels {
        let mesh = unit_square(n);
        let mut fixed = vec![None; mesh.num_vertices()];
        for e in mesh.boundary_edges() {
            for v in e.vertices {
                fixed[v] = Some([0.0, 0.0]);
            }
        }
        let coeff = CoefficientField::uniform(mesh.num_triangles(), nu);
        let sol = solve_flow(&mesh, &coeff, &VelocityField::zeros(&mesh), &force, &fixed, &settings, None, &opts)?;
        let (l2, h1) = velocity_errors(&mesh, &sol.velocity, u_exact, grad_exact);
        h.push(1.0 / n as f64);
        el2.push(l2);
        eh1.push(h1);
        ep.push(scalar_l2_error(&mesh, &sol.pressure, p_exact));
    }
    Ok(ConvergenceStudy {
        name: "stokes",
        h,
        series: vec![
            ErrorSeries { quantity: "velocity L2", errors: el2 },
            ErrorSeries { quantity: "velocity H1", errors: eh1 },
            ErrorSeries { quantity: "pressure L2", errors: ep },
        ],
    })
}

/// Largest `|vᵀ C̃(w) v| / (‖v‖² ‖w‖)` over random fields on the default mesh.
pub fn skew_convection_defect(samples: usize, seed: u64) -> f64 {
    let mesh = build_channel_tissue_mesh(&GeometryParams::default()).expect("default mesh");
    let space = VelocitySpace::new(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_field = |rng: &mut ChaCha8Rng| {
        let x: Vec<f64> = (0..space.ndofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        x
    };
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let w = random_field(&mut rng);
        let v = random_field(&mut rng);
        let wf = VelocityField::from_vector(&mesh, &w).expect("sized to the space");
        let c = assemble_convection_skew(&space, &wf).expect("finite field");
        let energy = dot(&v, &c.matvec(&v)).abs();
        let scale = dot(&v, &v) * dot(&w, &w).sqrt();
        worst = worst.max(energy / scale);
    }
    worst
}

/// Range of both potentials on the default mesh at uniform core temperature
/// with unit electrode potential.
pub fn potential_range_default_mesh() -> Result<(f64, f64), PhysicsError> {
    let mesh = build_channel_tissue_mesh(&GeometryParams::default())?;
    let model = MaterialModel::default();
    let theta = vec![model.theta_core; mesh.num_vertices()];
    let sol = potential_step(&mesh, &model, &theta, 1.0, &SolverOptions::default())?;
    let blood = mesh.vertex_mask(Subdomain::Blood);
    let tissue = mesh.vertex_mask(Subdomain::Tissue);
    let values = (0..mesh.num_vertices())
        .filter(|&v| blood[v])
        .map(|v| sol.blood[v])
        .chain((0..mesh.num_vertices()).filter(|&v| tissue[v]).map(|v| sol.tissue[v]));
    Ok(values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x))))
}

/// One named pass/fail line of the verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn order_check(study: &ConvergenceStudy, quantity: &str, min: f64) -> Check {
    let order = study.finest_order(quantity).unwrap_or(f64::NAN);
    Check {
        name: format!("{} {} order", study.name, quantity),
        passed: order >= min,
        detail: format!("observed {order:.3}, required >= {min}"),
    }
}

/// Runs the convergence studies and invariant checks.
pub fn run_verification() -> Vec<Check> {
    let mut checks = Vec::new();
    let failed = |name: &str, e: PhysicsError| Check {
        name: name.to_string(),
        passed: false,
        detail: e.to_string(),
    };
    match mms_potential(&[8, 16, 32]) {
        Ok(s) => checks.push(order_check(&s, "L2", 1.9)),
        Err(e) => checks.push(failed("potential convergence", e)),
    }
    match mms_heat(&[8, 16, 32]) {
        Ok(s) => checks.push(order_check(&s, "L2", 1.9)),
        Err(e) => checks.push(failed("heat convergence", e)),
    }
    match mms_stokes(&[8, 16, 32]) {
        Ok(s) => {
            checks.push(order_check(&s, "velocity L2", 1.8));
            checks.push(order_check(&s, "velocity H1", 0.9));
            checks.push(order_check(&s, "pressure L2", 0.9));
        }
        Err(e) => checks.push(failed("stokes convergence", e)),
    }
    let defect = skew_convection_defect(20, 7);
    checks.push(Check {
        name: "skew convection energy".into(),
        passed: defect <= 1e-12,
        detail: format!("max |v·C(w)v| / (|v|²|w|) = {defect:.3e}"),
    });
    match potential_range_default_mesh() {
        Ok((lo, hi)) => checks.push(Check {
            name: "potential maximum principle".into(),
            passed: lo >= -1e-10 && hi <= 1.0 + 1e-10,
            detail: format!("range [{lo:.3e}, {hi:.12}]"),
        }),
        Err(e) => checks.push(failed("potential maximum principle", e)),
    }
    checks
}
