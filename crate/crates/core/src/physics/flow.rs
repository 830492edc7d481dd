//! Backward-Euler Navier–Stokes step with the P1-bubble/P1 pair. Bubble
//! unknowns are condensed element by element, so the global system couples
//! only vertex velocities and pressures, ordered `[u_x, u_y, π]` with one
//! block of `nv` entries each.

use super::{require_converged, PhysicsError};
use crate::fem::element::{
    local_convection_skew, local_divergence, local_velocity_load, local_velocity_mass, local_viscous,
    ElementGeometry,
};
use crate::fem::{apply_dirichlet, lumped_mass, CoefficientField, Region, ScalarSpace, VelocityField, VelocitySpace};
use crate::materials::{CoefficientKind, MaterialModel};
use crate::mesh::{Mesh, Point};
use crate::sparse::{solve_general_from, CsrMatrix, Preconditioner, SolveReport, SolverOptions};

/// Local indices of the vertex unknowns (`k + 4c`, `k < 3`) and bubbles.
const VERTEX: [usize; 6] = [0, 1, 2, 4, 5, 6];
const BUBBLE: [usize; 2] = [3, 7];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSettings {
    /// Time step; `None` solves the steady problem.
    pub tau: Option<f64>,
    /// Include the lagged, skew-symmetrised convection term.
    pub convection: bool,
    /// Diagonal shift `ε_p` on the pressure block.
    pub pressure_shift: f64,
    /// Normalise the pressure to zero mean (for pure-Dirichlet problems).
    pub zero_mean_pressure: bool,
}

impl Default for FlowSettings {
    fn default() -> Self {
        Self {
            tau: None,
            convection: false,
            pressure_shift: 1e-10,
            zero_mean_pressure: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub velocity: VelocityField,
    pub pressure: Vec<f64>,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
struct Recovery {
    triangle: usize,
    kbb_inv: [[f64; 2]; 2],
    k_bl: [[f64; 6]; 2],
    b_b: [[f64; 2]; 3],
    f_b: [f64; 2],
}

/// Condensed saddle-point system of one flow solve, after Dirichlet
/// elimination.
#[derive(Debug, Clone)]
pub struct FlowSystem {
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    recovery: Vec<Recovery>,
    nv: usize,
    zero_mean_pressure: bool,
}

fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

impl FlowSystem {
    /// Assembles `[[K, -Bᵀ], [-B, -ε_p I]] [u; π] = [f; 0]` with
    /// `K = M/τ + A_ν + C̃(u_prev)` and `f = M u_prev/τ + ∫F·ψ`, condensing
    /// the bubbles. `fixed` holds prescribed vertex velocities.
    pub fn assemble(
        mesh: &Mesh,
        nu: &CoefficientField,
        u_prev: &VelocityField,
        force: &dyn Fn(usize, Point) -> [f64; 2],
        fixed: &[Option<[f64; 2]>],
        settings: &FlowSettings,
    ) -> Result<Self, PhysicsError> {
        let nv = mesh.num_vertices();
        if let Some(tau) = settings.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(PhysicsError::Invalid(format!("time step must be > 0, got {tau}")));
            }
        }
        if !u_prev.is_finite() {
            return Err(PhysicsError::NonFinite("previous velocity"));
        }
        let space = VelocitySpace::new(mesh);
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        let mut rhs = vec![0.0; 3 * nv];
        let mut recovery = Vec::new();

        for t in space.elements() {
            let nu_t = nu.get(t);
            if !(nu_t > 0.0 && nu_t.is_finite()) {
                return Err(crate::fem::FemError::NonPositiveCoefficient { element: t, value: nu_t }.into());
            }
            let e = ElementGeometry::new(mesh.triangle_points(t));
            let tri = mesh.triangles()[t];
            let w = u_prev.local(mesh, t);
            let mut wloc = [0.0; 8];
            for k in 0..4 {
                wloc[k] = w[k][0];
                wloc[k + 4] = w[k][1];
            }

            let mut k = local_viscous(&e, nu_t);
            let mut f = local_velocity_load(&e, &|p| force(t, p));
            if let Some(tau) = settings.tau {
                let m = local_velocity_mass(&e);
                for i in 0..8 {
                    for j in 0..8 {
                        k[i][j] += m[i][j] / tau;
                        f[i] += m[i][j] * wloc[j] / tau;
                    }
                }
            }
            if settings.convection {
                let c = local_convection_skew(&e, &w);
                for i in 0..8 {
                    for j in 0..8 {
                        k[i][j] += c[i][j];
                    }
                }
            }
            let b = local_divergence(&e);

            let kbb_inv = inv2([
                [k[BUBBLE[0]][BUBBLE[0]], k[BUBBLE[0]][BUBBLE[1]]],
                [k[BUBBLE[1]][BUBBLE[0]], k[BUBBLE[1]][BUBBLE[1]]],
            ]);
            let mut k_bl = [[0.0; 6]; 2];
            let mut k_lb = [[0.0; 2]; 6];
            for (i, &li) in VERTEX.iter().enumerate() {
                for (j, &bj) in BUBBLE.iter().enumerate() {
                    k_bl[j][i] = k[bj][li];
                    k_lb[i][j] = k[li][bj];
                }
            }
            let mut b_b = [[0.0; 2]; 3];
            for q in 0..3 {
                for (j, &bj) in BUBBLE.iter().enumerate() {
                    b_b[q][j] = b[q][bj];
                }
            }
            let f_b = [f[BUBBLE[0]], f[BUBBLE[1]]];
            // X = K_Lb Kbb⁻¹ (6×2), Y = B_b Kbb⁻¹ (3×2)
            let mut x = [[0.0; 2]; 6];
            for i in 0..6 {
                for j in 0..2 {
                    x[i][j] = k_lb[i][0] * kbb_inv[0][j] + k_lb[i][1] * kbb_inv[1][j];
                }
            }
            let mut y = [[0.0; 2]; 3];
            for q in 0..3 {
                for j in 0..2 {
                    y[q][j] = b_b[q][0] * kbb_inv[0][j] + b_b[q][1] * kbb_inv[1][j];
                }
            }

            let vdof = |i: usize| (VERTEX[i] / 4) * nv + tri[VERTEX[i] % 4];
            let pdof = |q: usize| 2 * nv + tri[q];
            for i in 0..6 {
                for j in 0..6 {
                    let v = k[VERTEX[i]][VERTEX[j]] - (x[i][0] * k_bl[0][j] + x[i][1] * k_bl[1][j]);
                    trip.push((vdof(i), vdof(j), v));
                }
                for q in 0..3 {
                    let g = -b[q][VERTEX[i]] + x[i][0] * b_b[q][0] + x[i][1] * b_b[q][1];
                    trip.push((vdof(i), pdof(q), g));
                    let d = -b[q][VERTEX[i]] + y[q][0] * k_bl[0][i] + y[q][1] * k_bl[1][i];
                    trip.push((pdof(q), vdof(i), d));
                }
                rhs[vdof(i)] += f[VERTEX[i]] - (x[i][0] * f_b[0] + x[i][1] * f_b[1]);
            }
            for q in 0..3 {
                for r in 0..3 {
                    let c = -(y[q][0] * b_b[r][0] + y[q][1] * b_b[r][1]);
                    trip.push((pdof(q), pdof(r), c));
                }
                rhs[pdof(q)] += y[q][0] * f_b[0] + y[q][1] * f_b[1];
            }
            recovery.push(Recovery {
                triangle: t,
                kbb_inv,
                k_bl,
                b_b,
                f_b,
            });
        }

        let active = ScalarSpace::new(mesh, Region::Blood).active();
        for v in 0..nv {
            if active[v] {
                trip.push((2 * nv + v, 2 * nv + v, -settings.pressure_shift));
            }
        }
        let k = CsrMatrix::from_triplets(3 * nv, 3 * nv, &trip).expect("flow indices are in range");

        let mut constraints = vec![None; 3 * nv];
        for v in 0..nv {
            if !active[v] {
                constraints[v] = Some(0.0);
                constraints[nv + v] = Some(0.0);
                constraints[2 * nv + v] = Some(0.0);
            } else if let Some(g) = fixed.get(v).copied().flatten() {
                constraints[v] = Some(g[0]);
                constraints[nv + v] = Some(g[1]);
            }
        }
        let (matrix, rhs) = apply_dirichlet(&k, &rhs, &constraints)?;
        Ok(Self {
            matrix,
            rhs,
            recovery,
            nv,
            zero_mean_pressure: settings.zero_mean_pressure,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Solves with GMRES, warm-started from `guess` when given, and recovers
    /// the bubble coefficients.
    pub fn solve(
        &self,
        mesh: &Mesh,
        guess: Option<(&VelocityField, &[f64])>,
        opts: &SolverOptions,
    ) -> Result<FlowSolution, PhysicsError> {
        let nv = self.nv;
        let mut x0 = vec![0.0; 3 * nv];
        if let Some((u, p)) = guess {
            for v in 0..nv {
                x0[v] = u.nodal[v][0];
                x0[nv + v] = u.nodal[v][1];
                x0[2 * nv + v] = p[v];
            }
        }
        let (x, report) = solve_general_from(&self.matrix, &self.rhs, x0, opts);
        require_converged("flow", report)?;

        let mut velocity = VelocityField::zeros(mesh);
        for v in 0..nv {
            velocity.nodal[v] = [x[v], x[nv + v]];
        }
        let mut pressure = x[2 * nv..].to_vec();
        for r in &self.recovery {
            let tri = mesh.triangles()[r.triangle];
            let ul: [f64; 6] = std::array::from_fn(|i| x[(VERTEX[i] / 4) * nv + tri[VERTEX[i] % 4]]);
            let p: [f64; 3] = tri.map(|v| x[2 * nv + v]);
            let mut g = r.f_b;
            for j in 0..2 {
                for i in 0..6 {
                    g[j] -= r.k_bl[j][i] * ul[i];
                }
                for q in 0..3 {
                    g[j] += r.b_b[q][j] * p[q];
                }
            }
            velocity.bubble[r.triangle] = [
                r.kbb_inv[0][0] * g[0] + r.kbb_inv[0][1] * g[1],
                r.kbb_inv[1][0] * g[0] + r.kbb_inv[1][1] * g[1],
            ];
        }
        if self.zero_mean_pressure {
            let m = lumped_mass(&ScalarSpace::new(mesh, Region::Blood));
            let area: f64 = m.iter().sum();
            let mean = m.iter().zip(&pressure).map(|(a, p)| a * p).sum::<f64>() / area;
            let active = ScalarSpace::new(mesh, Region::Blood).active();
            for (v, p) in pressure.iter_mut().enumerate() {
                if active[v] {
                    *p -= mean;
                }
            }
        }
        if !velocity.is_finite() || pressure.iter().any(|p| !p.is_finite()) {
            return Err(PhysicsError::NonFinite("flow solution"));
        }
        Ok(FlowSolution {
            velocity,
            pressure,
            report,
        })
    }
}

/// Assembles and solves one flow problem.
pub fn solve_flow(
    mesh: &Mesh,
    nu: &CoefficientField,
    u_prev: &VelocityField,
    force: &dyn Fn(usize, Point) -> [f64; 2],
    fixed: &[Option<[f64; 2]>],
    settings: &FlowSettings,
    guess: Option<(&VelocityField, &[f64])>,
    opts: &SolverOptions,
) -> Result<FlowSolution, PhysicsError> {
    FlowSystem::assemble(mesh, nu, u_prev, force, fixed, settings)?.solve(mesh, guess, opts)
}

/// One time step of the blood flow with viscosity at the lagged temperature,
/// warm-started from the previous state. Uses ILU(0)-preconditioned GMRES
/// unless `opts` asks for something else than the Jacobi default.
#[allow(clippy::too_many_arguments)]
pub fn flow_step(
    mesh: &Mesh,
    model: &MaterialModel,
    theta_prev: &[f64],
    u_prev: &VelocityField,
    p_prev: &[f64],
    tau: f64,
    fixed: &[Option<[f64; 2]>],
    force: &dyn Fn(usize, Point) -> [f64; 2],
    pressure_shift: f64,
    opts: &SolverOptions,
) -> Result<FlowSolution, PhysicsError> {
    let nu = model.coefficient_field(mesh, theta_prev, CoefficientKind::Viscosity)?;
    let settings = FlowSettings {
        tau: Some(tau),
        convection: true,
        pressure_shift,
        zero_mean_pressure: false,
    };
    let opts = if opts.preconditioner == Preconditioner::Jacobi {
        opts.with_preconditioner(Preconditioner::Ilu0)
    } else {
        *opts
    };
    solve_flow(mesh, &nu, u_prev, force, fixed, &settings, Some((u_prev, p_prev)), &opts)
}
