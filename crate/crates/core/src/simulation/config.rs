use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use crate::fem::{BcKind, BoundaryCondition, ScalarData, VectorData};
use crate::materials::MaterialModel;
use crate::mesh::{BoundaryTag, GeometryParams, Point};
use crate::physics::StabilizationParams;
use crate::sparse::SolverOptions;

/// Semantic configuration error naming the offending key.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub tau: f64,
    /// Start from the steady Stokes flow instead of rest.
    pub stokes_warm_start: bool,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            tau: 0.01,
            stokes_warm_start: false,
        }
    }
}

impl TimeGrid {
    /// Number of uniform steps; the last one ends at `steps · τ ≈ T`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.tau).round() as usize).max(1)
    }
}

/// Velocity prescribed on the electrode surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectrodeFlow {
    NoSlip,
    /// Saline injection `(a/r)(x−c+r)(c+r−x) · (c−x, −y)` with `c` the
    /// electrode centre abscissa.
    Saline { amplitude: f64 },
}

/// Condition on the downstream end of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutletFlow {
    DoNothing,
    /// Same parabolic profile as the inlet.
    InletProfile,
}

/// Temperature condition on the electrode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectrodeHeat {
    /// No flux; temperature is continuous across the electrode footprint.
    Natural,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySettings {
    /// Inlet profile `(a y (H − y), 0)`.
    pub inlet_amplitude: f64,
    pub outlet: OutletFlow,
    pub electrode_flow: ElectrodeFlow,
    pub electrode_heat: ElectrodeHeat,
    pub electrode_potential: f64,
}

impl Default for BoundarySettings {
    fn default() -> Self {
        Self {
            inlet_amplitude: 4.0,
            outlet: OutletFlow::DoNothing,
            electrode_flow: ElectrodeFlow::NoSlip,
            electrode_heat: ElectrodeHeat::Natural,
            electrode_potential: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForceModel {
    None,
    /// Buoyancy `(0, −k (θ_K − θ̄))` on each blood element.
    Boussinesq { coefficient: f64 },
}

/// Buoyancy coefficient of blood, thermal expansion times gravity.
pub const BOUSSINESQ_COEFFICIENT: f64 = 1e-3 * 9.81 / 303.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub directory: Option<PathBuf>,
    /// Steps between field snapshots. The initial and final states are
    /// always kept.
    pub cadence: usize,
    pub probes: Vec<Point>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        let g = GeometryParams::default();
        Self {
            directory: None,
            cadence: 10,
            probes: vec![[0.5 * g.length, 2.0 * g.electrode_radius]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub pressure_shift: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            restart: 60,
            pressure_shift: 1e-10,
        }
    }
}

impl SolverSettings {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            restart: self.restart,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub geometry: GeometryParams,
    pub material: MaterialModel,
    pub stabilization: StabilizationParams,
    pub time: TimeGrid,
    pub boundary: BoundarySettings,
    pub force: ForceModel,
    pub output: OutputSettings,
    pub solver: SolverSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        scenario_test1()
    }
}

/// Blood flow past the electrode with Joule heating; no saline, no force.
pub fn scenario_test1() -> ScenarioConfig {
    ScenarioConfig {
        name: "test1".into(),
        geometry: GeometryParams::default(),
        material: MaterialModel::default(),
        stabilization: StabilizationParams::default(),
        time: TimeGrid::default(),
        boundary: BoundarySettings::default(),
        force: ForceModel::None,
        output: OutputSettings::default(),
        solver: SolverSettings::default(),
    }
}

/// Test 1 with saline injected through the electrode at 20 °C.
pub fn scenario_test2() -> ScenarioConfig {
    let mut c = scenario_test1();
    c.name = "test2".into();
    c.boundary.electrode_flow = ElectrodeFlow::Saline { amplitude: 20.0 };
    c.boundary.electrode_heat = ElectrodeHeat::Fixed(20.0);
    c
}

/// Test 1 with Boussinesq buoyancy.
pub fn scenario_test3() -> ScenarioConfig {
    let mut c = scenario_test1();
    c.name = "test3".into();
    c.force = ForceModel::Boussinesq {
        coefficient: BOUSSINESQ_COEFFICIENT,
    };
    c
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    match name {
        "test1" => Some(scenario_test1()),
        "test2" => Some(scenario_test2()),
        "test3" => Some(scenario_test3()),
        _ => None,
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be > 0, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry
            .validate()
            .map_err(|e| ConfigError::new("geometry", e.to_string()))?;
        self.material
            .validate()
            .map_err(|e| ConfigError::new("material", e.to_string()))?;
        self.stabilization
            .validate()
            .map_err(|e| ConfigError::new("stabilization", e.to_string()))?;
        positive("time.t_final", self.time.t_final)?;
        positive("time.tau", self.time.tau)?;
        if self.time.tau > self.time.t_final {
            return Err(ConfigError::new(
                "time.tau",
                format!("must not exceed t_final = {}", self.time.t_final),
            ));
        }
        finite("boundary.inlet_amplitude", self.boundary.inlet_amplitude)?;
        finite("boundary.electrode_potential", self.boundary.electrode_potential)?;
        if let ElectrodeFlow::Saline { amplitude } = self.boundary.electrode_flow {
            finite("boundary.saline_amplitude", amplitude)?;
        }
        if let ElectrodeHeat::Fixed(t) = self.boundary.electrode_heat {
            finite("boundary.saline_temperature", t)?;
        }
        if let ForceModel::Boussinesq { coefficient } = self.force {
            finite("force.boussinesq_coefficient", coefficient)?;
        }
        if self.output.cadence == 0 {
            return Err(ConfigError::new("output.cadence", "must be >= 1"));
        }
        for (i, p) in self.output.probes.iter().enumerate() {
            if !self.geometry.contains(*p) {
                return Err(ConfigError::new(
                    "output.probes",
                    format!("probe {i} at ({}, {}) lies outside the domain", p[0], p[1]),
                ));
            }
        }
        positive("solver.tol", self.solver.tol)?;
        if self.solver.max_iter == 0 || self.solver.restart == 0 {
            return Err(ConfigError::new("solver", "max_iter and restart must be >= 1"));
        }
        if !(self.solver.pressure_shift >= 0.0 && self.solver.pressure_shift.is_finite()) {
            return Err(ConfigError::new("solver.pressure_shift", "must be >= 0"));
        }
        Ok(())
    }

    /// Inlet velocity `(a y (H − y), 0)`.
    pub fn inlet_velocity(&self, p: Point) -> [f64; 2] {
        [self.boundary.inlet_amplitude * p[1] * (self.geometry.height - p[1]), 0.0]
    }

    /// Saline velocity on the electrode, zero when no saline is injected.
    pub fn saline_velocity(&self, p: Point) -> [f64; 2] {
        let ElectrodeFlow::Saline { amplitude } = self.boundary.electrode_flow else {
            return [0.0, 0.0];
        };
        let r = self.geometry.electrode_radius;
        let c = 0.5 * self.geometry.length;
        let s = amplitude / r * (p[0] - c + r) * (c + r - p[0]);
        [s * (c - p[0]), -s * p[1]]
    }

    pub fn velocity_conditions(&self) -> Vec<BoundaryCondition> {
        let this = self.clone();
        let inlet = VectorData::Profile(Arc::new(move |p| this.inlet_velocity(p)));
        let mut bcs = vec![
            BoundaryCondition::new(&[BoundaryTag::Inlet], BcKind::DirichletVelocity(inlet.clone())),
            BoundaryCondition::new(
                &[BoundaryTag::ChannelTop, BoundaryTag::Interface],
                BcKind::DirichletVelocity(VectorData::Constant([0.0, 0.0])),
            ),
        ];
        bcs.push(match self.boundary.outlet {
            OutletFlow::DoNothing => BoundaryCondition::new(&[BoundaryTag::Outlet], BcKind::DoNothing),
            OutletFlow::InletProfile => {
                BoundaryCondition::new(&[BoundaryTag::Outlet], BcKind::DirichletVelocity(inlet))
            }
        });
        let electrode = match self.boundary.electrode_flow {
            ElectrodeFlow::NoSlip => VectorData::Constant([0.0, 0.0]),
            ElectrodeFlow::Saline { .. } => {
                let this = self.clone();
                VectorData::Profile(Arc::new(move |p| this.saline_velocity(p)))
            }
        };
        bcs.push(BoundaryCondition::new(&[BoundaryTag::Electrode], BcKind::DirichletVelocity(electrode)));
        bcs
    }

    pub fn heat_conditions(&self) -> Vec<BoundaryCondition> {
        let core = ScalarData::Constant(self.material.theta_core);
        let mut bcs = vec![BoundaryCondition::new(
            &[
                BoundaryTag::Inlet,
                BoundaryTag::ChannelTop,
                BoundaryTag::Outlet,
                BoundaryTag::TissueLeft,
                BoundaryTag::TissueBottom,
                BoundaryTag::TissueRight,
            ],
            BcKind::DirichletScalar(core),
        )];
        bcs.push(match self.boundary.electrode_heat {
            ElectrodeHeat::Natural => BoundaryCondition::new(&[BoundaryTag::Electrode], BcKind::NeumannZero),
            ElectrodeHeat::Fixed(t) => BoundaryCondition::new(
                &[BoundaryTag::Electrode],
                BcKind::DirichletScalar(ScalarData::Constant(t)),
            ),
        });
        bcs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inlet_profile_values() {
        let c = scenario_test1();
        assert_eq!(c.inlet_velocity([0.0, 0.5]), [1.0, 0.0]);
        assert_eq!(c.inlet_velocity([0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(c.inlet_velocity([0.0, 1.0]), [0.0, 0.0]);
    }

    #[test]
    fn saline_profile_values() {
        let c = scenario_test2();
        let r = c.geometry.electrode_radius;
        let mid = 0.5 * c.geometry.length;
        let edge = c.saline_velocity([mid - r, 0.0]);
        assert!(edge[0].abs() < 1e-15 && edge[1] == 0.0);
        let apex = c.saline_velocity([mid, r]);
        let expected = -20.0 * r * r;
        assert_eq!(apex[0], 0.0);
        assert!((apex[1] - expected).abs() < 1e-15);
        assert!((apex[1] + 0.1125).abs() < 1e-15);
        assert_eq!(scenario_test1().saline_velocity([mid, r]), [0.0, 0.0]);
    }

    #[test]
    fn presets_differ_only_where_intended() {
        let (t1, t2, t3) = (scenario_test1(), scenario_test2(), scenario_test3());
        assert_eq!(t1.force, ForceModel::None);
        assert_eq!(t2.boundary.electrode_heat, ElectrodeHeat::Fixed(20.0));
        assert_eq!(t2.geometry, t1.geometry);
        let ForceModel::Boussinesq { coefficient } = t3.force else {
            panic!("test3 must carry buoyancy")
        };
        assert!((coefficient * 303.0 - 9.81e-3).abs() < 1e-17);
        for c in [t1, t2, t3] {
            c.validate().unwrap();
        }
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let mut c = scenario_test1();
        c.time.tau = -0.1;
        let e = c.validate().unwrap_err();
        assert_eq!(e.key, "time.tau");
        assert!(e.message.contains("must be > 0"));
        let mut c = scenario_test1();
        c.time.tau = 2.0;
        assert_eq!(c.validate().unwrap_err().key, "time.tau");
        let mut c = scenario_test1();
        c.output.probes.push([0.75, 0.01]);
        assert_eq!(c.validate().unwrap_err().key, "output.probes");
    }

    #[test]
    fn step_count_rounds_to_grid() {
        let g = TimeGrid {
            t_final: 1.0,
            tau: 0.01,
            stokes_warm_start: false,
        };
        assert_eq!(g.steps(), 100);
    }
}
