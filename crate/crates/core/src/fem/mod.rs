//! Finite-element spaces, quadrature, assembly and boundary conditions.

mod assembly;
mod dirichlet;
pub mod element;
pub mod quadrature;
mod space;

use thiserror::Error;

use crate::mesh::BoundaryTag;

pub use assembly::{
    assemble_advection, assemble_convection_skew, assemble_divergence, assemble_joule_load, assemble_load,
    assemble_mass, assemble_stiffness, assemble_velocity_load, assemble_velocity_mass, assemble_viscous,
    density_load, joule_density, lumped_mass,
};
pub use dirichlet::{
    apply_dirichlet, collect_scalar_dirichlet, collect_velocity_dirichlet, BcKind, BoundaryCondition, ScalarData,
    VectorData,
};
pub use space::{CoefficientField, Region, ScalarSpace, VelocityField, VelocitySpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("coefficient on element {element} must be positive, got {value}")]
    NonPositiveCoefficient { element: usize, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("length mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("conflicting Dirichlet values at node {node} (tags {first:?} and {second:?})")]
    DirichletConflict {
        node: usize,
        first: BoundaryTag,
        second: BoundaryTag,
    },
    #[error("boundary tag {0:?} has more than one condition")]
    DuplicateCondition(BoundaryTag),
    #[error("boundary condition refers to tag {0:?}, which the mesh lacks")]
    MissingTag(BoundaryTag),
}
