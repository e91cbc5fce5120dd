//! Tanh-squashed diagonal Gaussian policy head.
//!
//! The actor emits `[mean; log_std]` per row. With `u = mean + σ·ε` and
//! `a = tanh(u)`, the log density of `a` is the Gaussian log density of `u`
//! minus `Σ log(1 − tanh²u)`.

use rand::Rng;
use rand_distr::StandardNormal;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Largest action magnitude emitted, so sampled actions stay strictly inside (−1, 1) in f32.
pub const ACTION_BOUND: f32 = 1.0 - f32::EPSILON;

const HALF_LN_TAU: f64 = 0.918_938_533_204_672_8;

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(1 − tanh²u)` without cancellation for large `|u|`.
pub fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

/// Log density of `tanh(mean + exp(log_std)·eps)` for one action dimension.
pub fn squashed_log_prob(mean: f64, log_std: f64, eps: f64) -> f64 {
    let u = mean + log_std.exp() * eps;
    -0.5 * eps * eps - log_std - HALF_LN_TAU - log_one_minus_tanh_sq(u)
}

pub fn squash(u: f64) -> f32 {
    (u.tanh() as f32).clamp(-ACTION_BOUND, ACTION_BOUND)
}

/// A batch of reparameterised samples with what the backward pass needs.
#[derive(Debug, Clone)]
pub struct PolicySample {
    pub act_dim: usize,
    pub actions: Vec<f32>,
    pub log_prob: Vec<f64>,
    eps: Vec<f64>,
    sigma: Vec<f64>,
    tanh: Vec<f64>,
    log_std_clamped: Vec<bool>,
}

impl PolicySample {
    /// Samples every row of `head` (row-major `[mean; log_std]`, width `2k`).
    pub fn draw<R: Rng>(head: &[f32], act_dim: usize, rng: &mut R) -> Self {
        let rows = head.len() / (2 * act_dim);
        let n = rows * act_dim;
        let mut out = Self {
            act_dim,
            actions: Vec::with_capacity(n),
            log_prob: Vec::with_capacity(rows),
            eps: Vec::with_capacity(n),
            sigma: Vec::with_capacity(n),
            tanh: Vec::with_capacity(n),
            log_std_clamped: Vec::with_capacity(n),
        };
        for row in head.chunks_exact(2 * act_dim) {
            let (mean, log_std) = row.split_at(act_dim);
            let mut lp = 0.0;
            for (&m, &ls) in mean.iter().zip(log_std) {
                let raw = ls as f64;
                let ls = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
                let e: f64 = rng.sample(StandardNormal);
                let sigma = ls.exp();
                let u = m as f64 + sigma * e;
                lp += squashed_log_prob(m as f64, ls, e);
                out.actions.push(squash(u));
                out.eps.push(e);
                out.sigma.push(sigma);
                out.tanh.push(u.tanh());
                out.log_std_clamped.push(raw != ls);
            }
            out.log_prob.push(lp);
        }
        out
    }

    /// Gradient of `scale · Σ_rows (α·logπ − Q)` with respect to the actor head,
    /// given `dq_da` (row-major, width `k`) of the critic at the sampled actions.
    pub fn head_gradient(&self, dq_da: &[f64], alpha: f64, scale: f64) -> Vec<f32> {
        let k = self.act_dim;
        let rows = self.log_prob.len();
        let mut grad = vec![0.0f32; rows * 2 * k];
        for r in 0..rows {
            for j in 0..k {
                let i = r * k + j;
                let a = self.tanh[i];
                let se = self.sigma[i] * self.eps[i];
                let dq_du = dq_da[i] * (1.0 - a * a);
                let d_mean = alpha * 2.0 * a - dq_du;
                let d_log_std = if self.log_std_clamped[i] {
                    0.0
                } else {
                    alpha * (-1.0 + 2.0 * a * se) - dq_du * se
                };
                grad[r * 2 * k + j] = (scale * d_mean) as f32;
                grad[r * 2 * k + k + j] = (scale * d_log_std) as f32;
            }
        }
        grad
    }
}
