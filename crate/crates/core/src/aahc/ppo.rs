//! Clipped-surrogate objective pieces.

/// The clipped policy objective for one sample:
/// `min(r * A, clamp(r, 1-eps, 1+eps) * A)` with
/// `r = exp(logProbNew - logProbOld)`.
pub fn ppo_clip_surrogate(logp_new: f64, logp_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let ratio = (logp_new - logp_old).exp();
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    unclipped.min(clipped)
}

/// Derivative of [`ppo_clip_surrogate`] with respect to `logProbNew`.
/// When the clipped arm is strictly smaller the objective is locally
/// constant in the ratio, so the gradient vanishes; otherwise it is
/// `r * A` (the chain rule through `r = exp(...)`).
pub fn ppo_clip_grad(logp_new: f64, logp_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let ratio = (logp_new - logp_old).exp();
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    if unclipped <= clipped {
        unclipped
    } else {
        0.0
    }
}
