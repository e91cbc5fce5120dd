//! Minimal dense neural-network substrate.
//!
//! Networks are plain multi-layer perceptrons with ReLU hidden layers and an
//! identity or tanh output. Parameters live in a single flat `f32` array laid
//! out layer by layer as `W0, b0, W1, b1, ...`, where each `W` has shape
//! `(fan_in, fan_out)` in row-major order, so `y = x·W + b`.
//!
//! Two execution paths are provided:
//! - [`Mlp::forward`] / [`Mlp::backward`] work on one sample and accumulate in
//!   `f64`. They are the reference path used by gradient checks.
//! - [`Mlp::forward_batch`] / [`Mlp::backward_batch`] work on row-major
//!   minibatches through `sgemm` and are what the agents train with.

mod adam;
mod batch;
pub mod checkpoint;
mod error;
mod mlp;
mod polyak;

pub use adam::{Adam, AdamConfig};
pub use batch::{BatchGrads, BatchTape};
pub use error::{NnError, Result};
pub use mlp::{Gradients, GradientTape, HiddenActivation, Mlp, OutputActivation};
pub use polyak::polyak_update;

/// Euclidean norm of a gradient vector, accumulated in `f64`.
pub fn global_norm(grads: &[f32]) -> f64 {
    grads.iter().map(|&g| (g as f64) * (g as f64)).sum::<f64>().sqrt()
}

/// Rescales `grads` in place so their global norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [f32], max_norm: f64) -> f64 {
    let norm = global_norm(grads);
    if norm > max_norm && norm.is_finite() {
        let scale = (max_norm / norm) as f32;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}
