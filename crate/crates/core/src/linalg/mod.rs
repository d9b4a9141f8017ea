//! Sparse operators, their assembly on the staggered grid, and the
//! iterative solvers used by the stepper and the diagnostics.

pub mod assemble;
pub mod krylov;
pub mod sparse;

pub use assemble::{
    assemble_cell_neg_laplacian, assemble_correction, assemble_face_neg_laplacian,
    assemble_prediction, assemble_strain_divergence, Face, FaceLayout, FaceSystem,
    PredictionCoefficients,
};
pub use krylov::{
    krylov_method, BiCgStab, ConjugateGradient, KrylovMethod, SolveStats, SolverConfig,
    KRYLOV_METHODS,
};
pub use sparse::{OperatorBuilder, SparseOperator};

use crate::error::Result;

/// Solves `op x = rhs` from a zero initial guess with the named method.
pub fn solve(
    op: &SparseOperator,
    rhs: &[f64],
    method: &dyn KrylovMethod,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    let mut x = vec![0.0; rhs.len()];
    let stats = method.solve(op, rhs, &mut x, cfg)?;
    Ok((x, stats))
}
