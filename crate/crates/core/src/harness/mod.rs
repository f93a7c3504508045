//! Test-matrix generators, stability metrics, block GMRES, sweeps and matrix I/O.

mod embed;
mod generators;
mod gmres;
pub mod io;
mod methods;
mod report;
mod sweep;

pub use embed::{embed_check, EmbedCheck};
pub use generators::{
    gen_grid_matrix, gen_rankdef_matrix, gen_svd_matrix, grid_function, planted_spectrum, random_orthonormal,
};
pub use gmres::{block_gmres, seeded_rhs, GmresConfig, GmresOutput, Operator, OrthMethod, ShiftedLaplacian};
pub use methods::{run_method, sketch_seed, Method, MethodConfig};
pub use report::{max_col_residual, orthogonality_loss, stability_report, Factorization, StabilityReport};
pub use sweep::{run_sweep, write_csv, MatrixFamily, Param, SweepConfig, SweepRow, CSV_HEADER};
