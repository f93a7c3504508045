//! Randomized Cholesky QR: the direct, augmented and column-oriented variants.

mod column;
mod direct;
mod factors;

pub use column::{col_rcholeskyqr, BlockSource, ColumnRcholQr};
pub use direct::{rcholeskyqr, rcholeskyqr2};
pub(crate) use column::sketched_block_qr;
pub(crate) use direct::check_sketch;
pub use factors::{implicitq_apply_left, implicitq_apply_right, ImplicitQ, QFactor, QRFactors};
