//! Dense row-major matrices and the hand-written layers the encoder needs.
//!
//! Every op accumulates in a fixed order (row-major, sequential along the
//! reduction index), so identical inputs give bit-identical outputs.

mod adam;
mod gradcheck;
mod layers;
mod matrix;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{gradient_check, gradient_check_piecewise, GradCheckConfig, GradCheckReport};
pub use layers::{
    ffn_backward, ffn_forward, layer_norm_backward, layer_norm_forward, mhsa_backward, mhsa_forward,
    softmax_rows, FfnCache, FfnParams, LayerNormCache, LayerNormParams, MhsaCache, MhsaParams,
    LAYER_NORM_EPS,
};
pub use matrix::{Mask, Matrix, ParamTensor, Parameterized};
