//! Scenario configuration, the time loop, and restart files.

mod checkpoint;
mod config;
mod driver;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use config::{
    preset, scenario_test1, scenario_test2, scenario_test3, BoundarySettings, ConfigError, ElectrodeFlow,
    ElectrodeHeat, ForceModel, OutletFlow, OutputSettings, ScenarioConfig, SolverSettings, TimeGrid,
    BOUSSINESQ_COEFFICIENT,
};
pub use driver::{
    body_force, probe, run, scalar_l2, velocity_l2, Output, SeriesRow, SimulationError, SimulationResult,
    Simulation, Snapshot, StepReports,
};
