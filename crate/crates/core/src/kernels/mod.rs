//! Dense low-dimensional kernels shared by every factorization.

mod cholesky;
mod householder;
mod norms;
mod rrqr;
mod svd;
mod triangular;

pub use cholesky::cholesky;
pub use householder::{householder_qr, householder_r, least_squares, HouseholderQr};
pub use norms::{col_norms, cond, norm2_matrix};
pub use rrqr::{pivoted_qr, strong_rrqr, RrqrFactors};
pub use svd::{singular_values, svd_small, SvdFactors};
pub use triangular::{tri_solve_right, upper_solve};
