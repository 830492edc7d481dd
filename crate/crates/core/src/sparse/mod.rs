//! Sparse storage and iterative solvers for the assembled systems.

mod csr;
mod precond;
mod solvers;

pub use csr::{dot, matvec_threads, norm2, set_matvec_threads, CsrMatrix, SparseError};
pub use precond::Preconditioner;
pub use solvers::{solve_general, solve_general_from, solve_spd, solve_spd_from, SolveReport, SolverOptions};
