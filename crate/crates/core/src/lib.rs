//! Adaptive-setup CPR preconditioning for sequences of block sparse systems.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix it to `f64`, which the harness uses throughout.

pub mod amg;
pub mod coloring;
pub mod cpr;
pub mod error;
pub mod harness;
pub mod ilu;
pub mod parallel;
pub mod scalar;
pub mod smoothers;
pub mod sparse;

pub use error::{Result, SolverError};
pub use scalar::Scalar;

pub type Csr = sparse::CsrMatrix<f64>;
pub type BlockCsr = sparse::BlockCsrMatrix<f64>;
pub type Cpr = cpr::CprPreconditioner<f64>;
pub type Amg = amg::AmgHierarchy<f64>;
pub type Bilu = ilu::BiluFactors<f64>;

pub type Csr32 = sparse::CsrMatrix<f32>;
pub type BlockCsr32 = sparse::BlockCsrMatrix<f32>;
