//! Minimal MLP stack: forward evaluation, reverse-mode parameter gradients,
//! analytic input-Jacobians, and parameter gradients of Jacobian-dependent
//! penalties.

pub mod checkpoint;
mod cond;
mod mlp;

pub use cond::{cond_penalty_and_grad, cond_penalty_grad_stacked, DEGENERACY_GAP};
pub use mlp::{
    backward, forward, input_jacobian, jacobian_bilinear_grad, Activation, ForwardTape,
    MlpParams, MlpSpec,
};
