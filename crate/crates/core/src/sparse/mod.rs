//! Sparse storage, vector kernels, small dense factorizations and MatrixMarket I/O.

mod csr;
pub mod dense;
pub mod io;
pub mod vector;

pub use csr::{BlockCsrMatrix, BlockSparse, CsrMatrix};
pub use dense::{BlockDiagFactors, DenseLu};
pub use vector::{axpy, dot, norm2, scale};
