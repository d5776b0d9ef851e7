//! Reference forward numerics for the adaptive atrous pyramid, decoder fusion
//! and training losses. Everything runs in `f64` on small maps; there is no
//! backward pass except the closed-form gradients used for finite-difference
//! verification.

mod aspp;
mod conv;
mod decoder;
mod gradcheck;
mod loss;
mod visualize;

pub use aspp::{
    adaptive_aspp_forward, aspp_branches, clipped_tanh, clipped_tanh_grad, enhance, importance_scores,
    importance_scores_vjp, pooled_descriptor, AsppConfig, AsppOutput, AsppParams, ImportanceVector,
    TransformParams,
};
pub use conv::{dilated_conv, BranchConv, ConvParams, DepthwiseParams};
pub use decoder::{decode, decoder_fuse_bnd, decoder_fuse_seg, DecoderState};
pub use gradcheck::{finite_diff_check, GradCheckReport};
pub use loss::{cross_entropy_grad, cross_entropy_loss, dice_loss, dice_loss_grad, DICE_EPS};
pub use visualize::visualize_features;
