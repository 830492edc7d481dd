use thiserror::Error;

use super::checkpoint::{Checkpoint, CheckpointError};
use super::config::{ConfigError, ForceModel, ScenarioConfig};
use crate::fem::element::{velocity_at, ElementGeometry};
use crate::fem::quadrature::triangle_rule;
use crate::fem::{collect_scalar_dirichlet, collect_velocity_dirichlet, CoefficientField, VelocityField};
use crate::materials::{CoefficientKind, MaterialModel};
use crate::mesh::{build_channel_tissue_mesh, Mesh, MeshError, Point, Subdomain};
use crate::physics::{
    entropy_viscosity, flow_step, heat_step, joule_field, potential_step, solve_flow, EntropyInputs, FieldState,
    FlowSettings, PhysicsError,
};
use crate::sparse::SolveReport;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: PhysicsError,
    },
    #[error("initialisation: {0}")]
    Setup(#[from] PhysicsError),
    #[error("probe point ({}, {}) is outside the mesh", .0[0], .0[1])]
    ProbeOutside(Point),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("output: {0}")]
    Output(String),
}

/// Linear solver reports of one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReports {
    pub flow: SolveReport,
    pub potential: [SolveReport; 2],
    pub heat: SolveReport,
}

/// Full field state at an output time with the element fields that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: FieldState,
    pub joule: CoefficientField,
    pub artificial_viscosity: CoefficientField,
}

/// Scalar diagnostics at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub step: usize,
    pub max_theta: f64,
    pub argmax: Point,
    pub velocity_l2: f64,
    pub theta_l2: f64,
    /// `∫ σ|∇φ|²` over the domain.
    pub joule_power: f64,
    /// `(θ, φ)` at each probe point.
    pub probes: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationResult {
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesRow>,
    pub reports: Vec<StepReports>,
}

/// P1 interpolation of a nodal field at `p`.
pub fn probe(mesh: &Mesh, values: &[f64], p: Point) -> Result<f64, SimulationError> {
    let (t, l) = mesh.locate(p).ok_or(SimulationError::ProbeOutside(p))?;
    let tri = mesh.triangles()[t];
    Ok(l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]])
}

/// `‖u‖_{L²}` of a P1-bubble velocity over the blood elements.
pub fn velocity_l2(mesh: &Mesh, u: &VelocityField) -> f64 {
    let mut sum = 0.0;
    for t in (0..mesh.num_triangles()).filter(|&t| mesh.subdomain(t) == Subdomain::Blood) {
        let e = ElementGeometry::new(mesh.triangle_points(t));
        let w = u.local(mesh, t);
        for q in triangle_rule() {
            let (phi, _) = e.velocity_basis(q.bary);
            let v = velocity_at(&phi, &w);
            sum += q.weight * e.area * (v[0] * v[0] + v[1] * v[1]);
        }
    }
    sum.sqrt()
}

/// `‖θ‖_{L²}` of a P1 field, exact for the piecewise-linear interpolant.
pub fn scalar_l2(mesh: &Mesh, values: &[f64]) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.triangles()[t].map(|v| values[v]);
        sum += mesh.area(t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    }
    sum.sqrt()
}

/// Elementwise body force from the configured model, sampled at the
/// element-mean temperature.
pub fn body_force(mesh: &Mesh, model: &MaterialModel, force: ForceModel, theta: &[f64]) -> Vec<[f64; 2]> {
    let nt = mesh.num_triangles();
    match force {
        ForceModel::None => vec![[0.0, 0.0]; nt],
        ForceModel::Boussinesq { coefficient } => (0..nt)
            .map(|t| {
                if mesh.subdomain(t) != Subdomain::Blood {
                    return [0.0, 0.0];
                }
                let mean = mesh.triangles()[t].iter().map(|&v| theta[v]).sum::<f64>() / 3.0;
                [0.0, -coefficient * (mean - model.theta_core)]
            })
            .collect(),
    }
}

/// Time-lag stepper. Each step solves, with coefficients at the previous
/// temperature: flow, both potentials, the Joule source, the artificial
/// viscosity, and finally the temperature.
pub struct Simulation {
    config: ScenarioConfig,
    mesh: Mesh,
    state: FieldState,
    /// Temperature one step before `state.theta`.
    theta_older: Option<Vec<f64>>,
    joule: CoefficientField,
    artificial_viscosity: CoefficientField,
    velocity_fixed: Vec<Option<[f64; 2]>>,
    heat_fixed: Vec<Option<f64>>,
    strict: bool,
}

impl Simulation {
    /// Builds the mesh and the initial state: uniform core temperature, rest
    /// (or steady Stokes) velocity, and the potential at that temperature.
    pub fn new(config: ScenarioConfig) -> Result<Self, SimulationError> {
        Self::with_strictness(config, false)
    }

    /// Like [`Simulation::new`]; `strict` turns conflicting Dirichlet data at
    /// shared boundary vertices into an error.
    pub fn with_strictness(config: ScenarioConfig, strict: bool) -> Result<Self, SimulationError> {
        config.validate()?;
        let mesh = build_channel_tissue_mesh(&config.geometry)?;
        Self::on_mesh(config, mesh, strict)
    }

    pub fn on_mesh(config: ScenarioConfig, mesh: Mesh, strict: bool) -> Result<Self, SimulationError> {
        config.validate()?;
        for p in &config.output.probes {
            mesh.locate(*p).ok_or(SimulationError::ProbeOutside(*p))?;
        }
        let velocity_fixed =
            collect_velocity_dirichlet(&mesh, &config.velocity_conditions(), strict).map_err(PhysicsError::from)?;
        let heat_fixed =
            collect_scalar_dirichlet(&mesh, &config.heat_conditions(), strict).map_err(PhysicsError::from)?;
        let nt = mesh.num_triangles();
        let mut sim = Self {
            state: FieldState::initial(&mesh, config.material.theta_core),
            theta_older: None,
            joule: CoefficientField::uniform(nt, 0.0),
            artificial_viscosity: CoefficientField::uniform(nt, 0.0),
            velocity_fixed,
            heat_fixed,
            strict,
            config,
            mesh,
        };
        sim.initialise()?;
        Ok(sim)
    }

    fn initialise(&mut self) -> Result<(), PhysicsError> {
        let opts = self.config.solver.options();
        let model = &self.config.material;
        let theta = &self.state.theta;
        if self.config.time.stokes_warm_start {
            let nu = model.coefficient_field(&self.mesh, theta, CoefficientKind::Viscosity)?;
            let f = body_force(&self.mesh, model, self.config.force, theta);
            let force = |t: usize, _: Point| f[t];
            let settings = FlowSettings {
                pressure_shift: self.config.solver.pressure_shift,
                ..FlowSettings::default()
            };
            let sol = solve_flow(
                &self.mesh,
                &nu,
                &VelocityField::zeros(&self.mesh),
                &force,
                &self.velocity_fixed,
                &settings,
                None,
                &opts,
            )?;
            self.state.velocity = sol.velocity;
            self.state.pressure = sol.pressure;
        }
        let pot = potential_step(&self.mesh, model, theta, self.config.boundary.electrode_potential, &opts)?;
        self.joule = joule_field(&self.mesh, model, theta, &pot.blood, &pot.tissue)?;
        self.state.phi_blood = pot.blood;
        self.state.phi_tissue = pot.tissue;
        Ok(())
    }

    /// Resumes from a checkpoint written by a run of the same configuration.
    pub fn resume(config: ScenarioConfig, checkpoint: Checkpoint) -> Result<Self, SimulationError> {
        let mut sim = Self::new(config)?;
        sim.restore(checkpoint)?;
        Ok(sim)
    }

    pub fn restore(&mut self, checkpoint: Checkpoint) -> Result<(), SimulationError> {
        checkpoint.check_sizes(&self.mesh)?;
        self.state = checkpoint.state;
        self.theta_older = checkpoint.theta_older;
        self.joule = checkpoint.joule;
        self.artificial_viscosity = checkpoint.artificial_viscosity;
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            state: self.state.clone(),
            theta_older: self.theta_older.clone(),
            joule: self.joule.clone(),
            artificial_viscosity: self.artificial_viscosity.clone(),
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Joule source used by the latest temperature solve.
    pub fn joule(&self) -> &CoefficientField {
        &self.joule
    }

    /// Artificial viscosity used by the latest temperature solve.
    pub fn artificial_viscosity(&self) -> &CoefficientField {
        &self.artificial_viscosity
    }

    pub fn total_steps(&self) -> usize {
        self.config.time.steps()
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.total_steps()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            state: self.state.clone(),
            joule: self.joule.clone(),
            artificial_viscosity: self.artificial_viscosity.clone(),
        }
    }

    pub fn series_row(&self) -> Result<SeriesRow, SimulationError> {
        let mesh = &self.mesh;
        let theta = &self.state.theta;
        let (argmax_v, max_theta) = theta
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
        let phi = self.state.merged_potential(mesh);
        let probes = self
            .config
            .output
            .probes
            .iter()
            .map(|&p| Ok([probe(mesh, theta, p)?, probe(mesh, &phi, p)?]))
            .collect::<Result<_, SimulationError>>()?;
        let joule_power = (0..mesh.num_triangles()).map(|t| self.joule.get(t) * mesh.area(t)).sum();
        Ok(SeriesRow {
            t: self.state.t,
            step: self.state.step,
            max_theta,
            argmax: mesh.vertices()[argmax_v],
            velocity_l2: velocity_l2(mesh, &self.state.velocity),
            theta_l2: scalar_l2(mesh, theta),
            joule_power,
            probes,
        })
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<StepReports, SimulationError> {
        let step = self.state.step + 1;
        let tau = self.config.time.tau;
        let t = step as f64 * tau;
        let wrap = |source: PhysicsError| SimulationError::Step { step, t, source };
        let opts = self.config.solver.options();
        let mesh = &self.mesh;
        let model = &self.config.material;
        let theta_prev = &self.state.theta;

        let f = body_force(mesh, model, self.config.force, theta_prev);
        let force = |t: usize, _: Point| f[t];
        let flow = flow_step(
            mesh,
            model,
            theta_prev,
            &self.state.velocity,
            &self.state.pressure,
            tau,
            &self.velocity_fixed,
            &force,
            self.config.solver.pressure_shift,
            &opts,
        )
        .map_err(wrap)?;
        let pot = potential_step(mesh, model, theta_prev, self.config.boundary.electrode_potential, &opts)
            .map_err(wrap)?;
        let joule = joule_field(mesh, model, theta_prev, &pot.blood, &pot.tissue).map_err(wrap)?;
        let inputs = EntropyInputs {
            theta: theta_prev,
            theta_old: self.theta_older.as_deref(),
            velocity: &flow.velocity,
            joule: &joule,
            tau,
            theta_core: model.theta_core,
        };
        let nu_art = entropy_viscosity(mesh, &inputs, &self.config.stabilization).map_err(wrap)?;
        let heat = heat_step(
            mesh,
            model,
            theta_prev,
            &flow.velocity,
            &joule,
            &nu_art,
            tau,
            &self.heat_fixed,
            &opts,
        )
        .map_err(wrap)?;

        let next = FieldState {
            t,
            step,
            velocity: flow.velocity,
            pressure: flow.pressure,
            theta: heat.theta,
            phi_blood: pot.blood,
            phi_tissue: pot.tissue,
        };
        if !next.is_finite() {
            return Err(wrap(PhysicsError::NonFinite("field state")));
        }
        self.theta_older = Some(std::mem::replace(&mut self.state, next).theta);
        self.joule = joule;
        self.artificial_viscosity = nu_art;
        Ok(StepReports {
            flow: flow.report,
            potential: pot.reports,
            heat: heat.report,
        })
    }

    /// Runs to the final time. `observer` sees every series row and every
    /// snapshot due by the output cadence, including the current state.
    pub fn run_with(
        &mut self,
        observer: &mut dyn FnMut(Output<'_>) -> Result<(), SimulationError>,
    ) -> Result<Vec<StepReports>, SimulationError> {
        let cadence = self.config.output.cadence;
        let total = self.total_steps();
        observer(Output::Row(&self.series_row()?))?;
        observer(Output::Snapshot(&self.snapshot()))?;
        let mut reports = Vec::new();
        while self.state.step < total {
            reports.push(self.step()?);
            observer(Output::Row(&self.series_row()?))?;
            if self.state.step.is_multiple_of(cadence) || self.state.step == total {
                observer(Output::Snapshot(&self.snapshot()))?;
            }
        }
        Ok(reports)
    }
}

/// Items emitted while a run progresses.
#[derive(Debug, Clone, Copy)]
pub enum Output<'a> {
    Row(&'a SeriesRow),
    Snapshot(&'a Snapshot),
}

/// Runs a scenario in memory. On a failed step the error is returned
/// together with everything produced up to that point.
pub fn run(config: ScenarioConfig) -> Result<SimulationResult, Box<(SimulationError, SimulationResult)>> {
    let mut result = SimulationResult::default();
    let mut sim = match Simulation::new(config) {
        Ok(s) => s,
        Err(e) => return Err(Box::new((e, result))),
    };
    let outcome = sim.run_with(&mut |out| {
        match out {
            Output::Row(r) => result.series.push(r.clone()),
            Output::Snapshot(s) => result.snapshots.push(s.clone()),
        }
        Ok(())
    });
    match outcome {
        Ok(reports) => {
            result.reports = reports;
            Ok(result)
        }
        Err(e) => Err(Box::new((e, result))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::rectangle_mesh;
    use crate::simulation::config::scenario_test1;

    #[test]
    fn probe_reproduces_linear_fields() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 3, 3, Subdomain::Blood).unwrap();
        let values: Vec<f64> = mesh.vertices().iter().map(|p| p[0] + p[1]).collect();
        assert!((probe(&mesh, &values, [0.3, 0.4]).unwrap() - 0.7).abs() < 1e-14);
        assert!(matches!(probe(&mesh, &values, [1.5, 0.4]), Err(SimulationError::ProbeOutside(_))));
    }

    #[test]
    fn scalar_l2_of_constant() {
        let mesh = rectangle_mesh([0.0, 0.0], [2.0, 1.0], 4, 2, Subdomain::Tissue).unwrap();
        let v = vec![3.0; mesh.num_vertices()];
        assert!((scalar_l2(&mesh, &v) - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boussinesq_force_sign_and_size() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 1, 1, Subdomain::Blood).unwrap();
        let model = MaterialModel::default();
        let k = crate::simulation::config::BOUSSINESQ_COEFFICIENT;
        let force = ForceModel::Boussinesq { coefficient: k };
        let at_core = body_force(&mesh, &model, force, &[37.0; 4]);
        assert!(at_core.iter().all(|f| *f == [0.0, 0.0]));
        let hot = body_force(&mesh, &model, force, &[37.0 + 303.0; 4]);
        for f in hot {
            assert_eq!(f[0], 0.0);
            assert!((f[1] + 9.81e-3).abs() < 1e-15);
        }
    }

    #[test]
    fn unforced_single_step_keeps_initial_state() {
        let mut c = scenario_test1();
        c.geometry.mesh_size = 0.075;
        c.time.t_final = c.time.tau;
        c.boundary.electrode_potential = 0.0;
        c.boundary.inlet_amplitude = 0.0;
        let result = run(c).unwrap();
        assert_eq!(result.series.len(), 2);
        let last = &result.snapshots.last().unwrap().state;
        let dev = last.theta.iter().map(|v| (v - 37.0).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-9, "{dev:e} {:?}", result.reports);
        assert!(last.velocity.nodal.iter().all(|u| u[0].abs() < 1e-9 && u[1].abs() < 1e-9));
    }
}
