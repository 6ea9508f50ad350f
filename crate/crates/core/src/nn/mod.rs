//! Minimal neural-network stack for the schedulers.
//!
//! Everything is 64-bit and hand-differentiated: dense networks with tanh
//! hidden layers ([`mlp`]), categorical and squashed-Gaussian policy heads
//! ([`heads`]), and a bias-corrected Adam optimizer ([`adam`]). No autodiff
//! framework, no GPU; the models are small enough that clarity wins.

pub mod adam;
pub mod heads;
pub mod mlp;

pub use adam::Adam;
pub use heads::{
    categorical_entropy, categorical_log_prob, categorical_logits_grad, categorical_sample,
    log_softmax, softmax, GaussianGrads, GaussianHead, GaussianSample, LOG_STD_MAX, LOG_STD_MIN,
};
pub use mlp::{ForwardCache, Mlp, MlpGradients};
