//! Vector penalty-projection solver for 2D incompressible flow on a
//! staggered grid, with volume-penalized moving obstacles and the
//! diagnostics used to verify its stability and convergence.

pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod oracle;
pub mod problem;
pub mod verification;
pub mod vpp;

pub use error::{Result, VppError};
