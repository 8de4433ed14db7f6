//! Dense matrix kernel with forward operations, a reverse-mode tape and a
//! finite-difference gradient oracle.

mod gradcheck;
mod matrix;
mod params;
mod tape;

pub use gradcheck::{
    check_param_gradients, finite_diff_grad, relative_error, GradCheckReport, GRAD_FLOOR,
};
pub use matrix::{
    add_row, binary, concat_cols, layer_norm, layer_norm_with_stats, matmul, matmul_nt, matmul_tn,
    sigmoid, softmax_rows, stack_rows, unary, Binary, Matrix, NormStats, Unary,
};
pub use params::{Gradients, ParamId, ParamSet};
pub use tape::{Tape, Var};

pub(crate) use tape::softmax_xent;

/// Layer-norm epsilon used throughout the models.
pub const LAYER_NORM_EPS: f64 = 1e-5;
