use synergy_nn::{clip_global_norm, Adam, Mlp, NnError};

use crate::error::{Result, RlError};

pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Row-wise `[a | b]`.
pub(crate) fn concat_rows(a: &[f32], a_dim: usize, b: &[f32], b_dim: usize, rows: usize) -> Vec<f32> {
    let mut out = Vec::with_capacity(rows * (a_dim + b_dim));
    for r in 0..rows {
        out.extend_from_slice(&a[r * a_dim..(r + 1) * a_dim]);
        out.extend_from_slice(&b[r * b_dim..(r + 1) * b_dim]);
    }
    out
}

pub(crate) fn gather_rows(src: &[f32], dim: usize, rows: &[usize]) -> Vec<f32> {
    let mut out = Vec::with_capacity(rows.len() * dim);
    for &r in rows {
        out.extend_from_slice(&src[r * dim..(r + 1) * dim]);
    }
    out
}

pub(crate) fn ensure_finite(values: impl IntoIterator<Item = f64>, what: &'static str, update: u64) -> Result<()> {
    match values.into_iter().enumerate().find(|(_, v)| !v.is_finite()) {
        None => Ok(()),
        Some((i, v)) => Err(RlError::NonFinite {
            what,
            update,
            detail: format!("entry {i} is {v}"),
        }),
    }
}

/// Clips, then applies one Adam step.
pub(crate) fn apply_gradients(
    net: &mut Mlp,
    opt: &mut Adam<f32>,
    mut grads: Vec<f32>,
    max_norm: f64,
    what: &'static str,
    update: u64,
) -> Result<()> {
    let norm = clip_global_norm(&mut grads, max_norm);
    opt.step(net.params_mut(), &grads).map_err(|e| match e {
        NnError::NonFiniteGradient { index } => RlError::NonFinite {
            what,
            update,
            detail: format!("gradient entry {index}, pre-clip norm {norm}"),
        },
        other => other.into(),
    })
}

/// One mean-squared-error step of `net` toward `targets`; returns the loss.
pub(crate) fn regress(
    net: &mut Mlp,
    opt: &mut Adam<f32>,
    inputs: &[f32],
    targets: &[f32],
    max_norm: f64,
    what: &'static str,
    update: u64,
) -> Result<f64> {
    let batch = targets.len();
    let tape = net.forward_batch(inputs, batch)?;
    let mut loss = 0.0;
    let grad: Vec<f32> = tape
        .output()
        .iter()
        .zip(targets)
        .map(|(&q, &y)| {
            let e = q as f64 - y as f64;
            loss += e * e;
            (2.0 * e / batch as f64) as f32
        })
        .collect();
    let loss = loss / batch as f64;
    ensure_finite([loss], what, update)?;
    let grads = net.backward_batch(&tape, &grad, true, None)?.params.expect("requested");
    apply_gradients(net, opt, grads, max_norm, what, update)?;
    Ok(loss)
}
