//! Dense linear algebra kernels shared by every other module.

mod decomp;
mod matrix;

pub use decomp::{
    cholesky, cholesky_solve, condition_number, economy_svd, pinv_full_row_rank, spd_inverse,
    sym_eig, EconomySvd, SymEig, PINV_CHOLESKY_COND_LIMIT, RANK_TOL,
};
pub use matrix::Matrix;
