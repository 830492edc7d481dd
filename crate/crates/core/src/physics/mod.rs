//! Single-step solvers of the decoupled scheme: electric potential, blood
//! flow, temperature, and the entropy-viscosity stabilizer.

mod flow;
mod heat;
mod potential;
mod stabilization;
mod state;

use thiserror::Error;

use crate::fem::FemError;
use crate::materials::MaterialError;
use crate::mesh::MeshError;
use crate::sparse::SolveReport;

pub use flow::{flow_step, solve_flow, FlowSettings, FlowSolution, FlowSystem};
pub use heat::{heat_step, solve_heat, HeatSolution};
pub use potential::{joule_field, potential_step, solve_elliptic, PotentialSolution};
pub use stabilization::{entropy_viscosity, EntropyInputs, StabilizationParams};
pub use state::FieldState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("{stage} solve did not converge: {} iterations, residual {:.3e}", report.iterations, report.residual_norm)]
    Solve { stage: &'static str, report: SolveReport },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

fn require_converged(stage: &'static str, report: SolveReport) -> Result<(), PhysicsError> {
    if report.converged {
        Ok(())
    } else {
        Err(PhysicsError::Solve { stage, report })
    }
}
