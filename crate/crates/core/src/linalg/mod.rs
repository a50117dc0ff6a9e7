//! Dense complex linear algebra: matrix type, Jacobi SVD, null spaces,
//! Cholesky solves, DFT and block-diagonal operators.

mod cholesky;
mod matrix;
mod svd;

pub use cholesky::Cholesky;
pub use matrix::{block_diag, dft_matrix, twiddle_table, vec_dot, vec_norm, CMatrix};
pub use svd::{null_space, numerical_rank, svd, SvdResult};

/// Relative rank tolerance used for null-space extraction.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
