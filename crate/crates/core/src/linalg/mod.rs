//! Minimal dense and sparse linear algebra used by the assembly and solver
//! layers: a row-major dense matrix, triplet/CSR sparse storage, reverse
//! Cuthill-McKee ordering and a skyline Cholesky factorisation.

mod dense;
mod skyline;
mod sparse;

pub use dense::DMat;
pub use skyline::{SkylineCholesky, SolveError};
pub use sparse::{CsrMatrix, Triplets};
