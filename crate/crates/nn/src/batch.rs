//! Minibatch execution through `sgemm`.
//!
//! Inputs, activations and gradients are row-major `(batch, width)` buffers.
//! Parameter gradients are summed over the batch; callers fold the `1/N` of a
//! mean loss into the output gradient.

use std::ops::Range;

use crate::error::{check_len, NnError, Result};
use crate::mlp::Mlp;

/// Inputs with at most this fraction of non-zeros take the sparse first-layer path.
const SPARSE_DENSITY: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct BatchTape {
    net_id: u64,
    net_version: u64,
    batch: usize,
    input: TapeInput,
    // acts[l] is the output of layer l; the last entry is the network output.
    acts: Vec<Vec<f32>>,
}

/// Recorded network input; mostly-zero batches keep only their non-zeros.
#[derive(Debug, Clone)]
enum TapeInput {
    Dense(Vec<f32>),
    Sparse {
        /// Row `b` owns entries `offsets[b]..offsets[b + 1]`.
        offsets: Vec<usize>,
        index: Vec<u32>,
        value: Vec<f32>,
    },
}

impl TapeInput {
    fn record(inputs: &[f32], batch: usize) -> Self {
        let nnz = inputs.iter().filter(|&&x| x != 0.0).count();
        if (nnz as f64) > SPARSE_DENSITY * inputs.len() as f64 {
            return TapeInput::Dense(inputs.to_vec());
        }
        let width = inputs.len() / batch;
        let mut offsets = Vec::with_capacity(batch + 1);
        let mut index = Vec::with_capacity(nnz);
        let mut value = Vec::with_capacity(nnz);
        offsets.push(0);
        for row in inputs.chunks_exact(width) {
            for (i, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    index.push(i as u32);
                    value.push(x);
                }
            }
            offsets.push(index.len());
        }
        TapeInput::Sparse { offsets, index, value }
    }

    /// Non-zero `(column, value)` pairs of row `b` of a sparse input.
    fn sparse_row(&self, b: usize) -> impl Iterator<Item = (usize, f32)> + '_ {
        let (idx, val): (&[u32], &[f32]) = match self {
            TapeInput::Sparse { offsets, index, value } => {
                (&index[offsets[b]..offsets[b + 1]], &value[offsets[b]..offsets[b + 1]])
            }
            TapeInput::Dense(_) => (&[], &[]),
        };
        idx.iter().zip(val).map(|(&i, &v)| (i as usize, v))
    }
}

impl BatchTape {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Output batch, row-major `(batch, output_dim)`.
    pub fn output(&self) -> &[f32] {
        self.acts.last().expect("tape holds every layer output")
    }

    pub fn into_output(mut self) -> Vec<f32> {
        self.acts.pop().expect("tape holds every layer output")
    }
}

#[derive(Debug, Clone)]
pub struct BatchGrads {
    /// Summed over the batch, aligned with [`Mlp::params`].
    pub params: Option<Vec<f32>>,
    /// Row-major `(batch, range.len())` gradient for the requested input columns.
    pub input: Option<Vec<f32>>,
}

/// `C = A·B + beta·C` for row-major operands with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f32],
    rsa: usize,
    csa: usize,
    b: &[f32],
    rsb: usize,
    csb: usize,
    beta: f32,
    c: &mut [f32],
) {
    assert!(m == 0 || k == 0 || (m - 1) * rsa + (k - 1) * csa < a.len());
    assert!(k == 0 || n == 0 || (k - 1) * rsb + (n - 1) * csb < b.len());
    assert!(c.len() >= m * n);
    // SAFETY: the asserts above bound every index the kernel touches.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Mlp {
    /// Forward pass over `batch` rows of `inputs`; the returned tape holds the output.
    pub fn forward_batch(&self, inputs: &[f32], batch: usize) -> Result<BatchTape> {
        if batch == 0 {
            return Err(NnError::Shape {
                context: "batch size",
                expected: 1,
                actual: 0,
            });
        }
        check_len("batch input", batch * self.input_dim(), inputs.len())?;
        let spans = self.spans();
        let last = spans.len() - 1;
        let input = TapeInput::record(inputs, batch);

        let params = self.params();
        let mut acts: Vec<Vec<f32>> = Vec::with_capacity(spans.len());
        for (l, s) in spans.iter().enumerate() {
            let w = &params[s.weights..s.weights + s.fan_in * s.fan_out];
            let bias = &params[s.biases..s.biases + s.fan_out];
            let mut z = Vec::with_capacity(batch * s.fan_out);
            for _ in 0..batch {
                z.extend_from_slice(bias);
            }
            match (l, &input) {
                (0, TapeInput::Sparse { .. }) => {
                    for (b, zrow) in z.chunks_exact_mut(s.fan_out).enumerate() {
                        for (i, xi) in input.sparse_row(b) {
                            let wrow = &w[i * s.fan_out..(i + 1) * s.fan_out];
                            for (zo, &wio) in zrow.iter_mut().zip(wrow) {
                                *zo += xi * wio;
                            }
                        }
                    }
                }
                (0, TapeInput::Dense(x)) => gemm(batch, s.fan_in, s.fan_out, x, s.fan_in, 1, w, s.fan_out, 1, 1.0, &mut z),
                _ => gemm(batch, s.fan_in, s.fan_out, &acts[l - 1], s.fan_in, 1, w, s.fan_out, 1, 1.0, &mut z),
            }
            if l == last {
                let act = self.output_activation();
                z.iter_mut().for_each(|v| *v = act.apply(*v as f64) as f32);
            } else {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        let (net_id, net_version) = self.stamp();
        Ok(BatchTape {
            net_id,
            net_version,
            batch,
            input,
            acts,
        })
    }

    /// Backward pass over a recorded batch.
    ///
    /// `want_params` controls whether parameter gradients are produced;
    /// `input_columns` selects which input gradients (if any) are returned.
    pub fn backward_batch(
        &self,
        tape: &BatchTape,
        output_gradient: &[f32],
        want_params: bool,
        input_columns: Option<Range<usize>>,
    ) -> Result<BatchGrads> {
        if (tape.net_id, tape.net_version) != self.stamp() {
            return Err(NnError::StaleTape);
        }
        let batch = tape.batch;
        check_len("batch output gradient", batch * self.output_dim(), output_gradient.len())?;
        if let Some(r) = &input_columns {
            if r.end > self.input_dim() || r.start > r.end {
                return Err(NnError::Shape {
                    context: "input gradient columns",
                    expected: self.input_dim(),
                    actual: r.end,
                });
            }
        }
        let spans = self.spans();
        let last = spans.len() - 1;
        let params = self.params();
        let act = self.output_activation();

        let mut delta: Vec<f32> = output_gradient
            .iter()
            .zip(tape.output())
            .map(|(&g, &y)| (g as f64 * act.derivative_from_output(y as f64)) as f32)
            .collect();
        let mut grads = want_params.then(|| vec![0.0f32; params.len()]);
        let mut input_grad = None;

        for l in (0..=last).rev() {
            let s = spans[l];
            let w = &params[s.weights..s.weights + s.fan_in * s.fan_out];
            if let Some(g) = grads.as_mut() {
                let (gw, gb) = g[s.weights..s.biases + s.fan_out].split_at_mut(s.fan_in * s.fan_out);
                let mut bias_sum = vec![0.0f64; s.fan_out];
                for drow in delta.chunks_exact(s.fan_out) {
                    for (acc, &d) in bias_sum.iter_mut().zip(drow) {
                        *acc += d as f64;
                    }
                }
                for (gbo, acc) in gb.iter_mut().zip(bias_sum) {
                    *gbo = acc as f32;
                }
                match (l, &tape.input) {
                    (0, TapeInput::Sparse { .. }) => {
                        for (b, drow) in delta.chunks_exact(s.fan_out).enumerate() {
                            for (i, xi) in tape.input.sparse_row(b) {
                                let grow = &mut gw[i * s.fan_out..(i + 1) * s.fan_out];
                                for (go, &d) in grow.iter_mut().zip(drow) {
                                    *go += xi * d;
                                }
                            }
                        }
                    }
                    // dW = Xᵀ·Δ
                    (0, TapeInput::Dense(x)) => {
                        gemm(s.fan_in, batch, s.fan_out, x, 1, s.fan_in, &delta, s.fan_out, 1, 0.0, gw)
                    }
                    _ => gemm(s.fan_in, batch, s.fan_out, &tape.acts[l - 1], 1, s.fan_in, &delta, s.fan_out, 1, 0.0, gw),
                }
            }
            if l > 0 {
                // Δ_prev = Δ·Wᵀ, gated by ReLU.
                let mut prev = vec![0.0f32; batch * s.fan_in];
                gemm(batch, s.fan_out, s.fan_in, &delta, s.fan_out, 1, w, 1, s.fan_out, 0.0, &mut prev);
                for (p, &a) in prev.iter_mut().zip(&tape.acts[l - 1]) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            } else if let Some(r) = input_columns.clone() {
                let width = r.len();
                let mut gi = vec![0.0f32; batch * width];
                for b in 0..batch {
                    let drow = &delta[b * s.fan_out..(b + 1) * s.fan_out];
                    for (j, i) in r.clone().enumerate() {
                        let wrow = &w[i * s.fan_out..(i + 1) * s.fan_out];
                        gi[b * width + j] =
                            wrow.iter().zip(drow).map(|(&a, &d)| a as f64 * d as f64).sum::<f64>() as f32;
                    }
                }
                input_grad = Some(gi);
            }
        }
        Ok(BatchGrads {
            params: grads,
            input: input_grad,
        })
    }
}
