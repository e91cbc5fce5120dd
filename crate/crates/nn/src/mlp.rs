use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, NnError, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Tanh,
}

impl OutputActivation {
    pub(crate) fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activated value `y`.
    pub(crate) fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Tanh => 1.0 - y * y,
        }
    }
}

/// A dense feed-forward network with flat `f32` parameters.
#[derive(Debug)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    params: Vec<f32>,
    hidden: HiddenActivation,
    output: OutputActivation,
    seed: u64,
    // Identity and mutation counter, used to reject stale tapes.
    id: u64,
    version: u64,
}

impl Clone for Mlp {
    fn clone(&self) -> Self {
        Self {
            layer_sizes: self.layer_sizes.clone(),
            params: self.params.clone(),
            hidden: self.hidden,
            output: self.output,
            seed: self.seed,
            id: fresh_id(),
            version: 0,
        }
    }
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layer_sizes == other.layer_sizes
            && self.hidden == other.hidden
            && self.output == other.output
            && self.seed == other.seed
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Offsets of one layer inside the flat parameter array.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LayerSpan {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: usize,
    pub biases: usize,
}

pub(crate) fn param_count(layer_sizes: &[usize]) -> usize {
    layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(NnError::Architecture(format!(
            "need at least an input and an output layer, got {} sizes",
            layer_sizes.len()
        )));
    }
    if let Some(i) = layer_sizes.iter().position(|&n| n == 0) {
        return Err(NnError::Architecture(format!("layer {i} has zero width")));
    }
    Ok(())
}

impl Mlp {
    /// Glorot-uniform weights and zero biases, deterministic in `seed`.
    pub fn init(
        layer_sizes: &[usize],
        output: OutputActivation,
        seed: u64,
    ) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(layer_sizes));
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt() as f32;
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0f32, fan_out));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            params,
            hidden: HiddenActivation::Relu,
            output,
            seed,
            id: fresh_id(),
            version: 0,
        })
    }

    /// Builds a network from explicit parameters (layout `W0, b0, W1, b1, ...`).
    pub fn from_params(
        layer_sizes: &[usize],
        output: OutputActivation,
        seed: u64,
        params: Vec<f32>,
    ) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        check_len("parameter array", param_count(layer_sizes), params.len())?;
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            params,
            hidden: HiddenActivation::Relu,
            output,
            seed,
            id: fresh_id(),
            version: 0,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated non-empty")
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f32] {
        &self.params
    }

    /// Mutable access to the parameters. Invalidates outstanding tapes.
    pub fn params_mut(&mut self) -> &mut [f32] {
        self.version += 1;
        &mut self.params
    }

    pub fn weights(&self, layer: usize) -> &[f32] {
        let s = self.span(layer);
        &self.params[s.weights..s.weights + s.fan_in * s.fan_out]
    }

    pub fn biases(&self, layer: usize) -> &[f32] {
        let s = self.span(layer);
        &self.params[s.biases..s.biases + s.fan_out]
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub(crate) fn span(&self, layer: usize) -> LayerSpan {
        let mut offset = 0;
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            if l == layer {
                return LayerSpan {
                    fan_in,
                    fan_out,
                    weights: offset,
                    biases: offset + fan_in * fan_out,
                };
            }
            offset += fan_in * fan_out + fan_out;
        }
        panic!("layer index {layer} out of range");
    }

    pub(crate) fn spans(&self) -> Vec<LayerSpan> {
        (0..self.num_layers()).map(|l| self.span(l)).collect()
    }

    pub(crate) fn stamp(&self) -> (u64, u64) {
        (self.id, self.version)
    }

    /// Single-sample inference.
    pub fn forward(&self, input: &[f32]) -> Result<Vec<f32>> {
        let tape = self.forward_recorded(input)?;
        Ok(tape.output())
    }

    /// Single-sample forward pass that keeps the activations for [`Mlp::backward`].
    pub fn forward_recorded(&self, input: &[f32]) -> Result<GradientTape> {
        check_len("forward input", self.input_dim(), input.len())?;
        let spans = self.spans();
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(spans.len() + 1);
        activations.push(input.iter().map(|&x| x as f64).collect());
        let last = spans.len() - 1;
        for (l, s) in spans.iter().enumerate() {
            let x = &activations[l];
            let w = &self.params[s.weights..s.weights + s.fan_in * s.fan_out];
            let mut z: Vec<f64> = self.params[s.biases..s.biases + s.fan_out]
                .iter()
                .map(|&b| b as f64)
                .collect();
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &w[i * s.fan_out..(i + 1) * s.fan_out];
                for (zo, &wio) in z.iter_mut().zip(row) {
                    *zo += xi * wio as f64;
                }
            }
            let a = if l == last {
                z.iter().map(|&v| self.output.apply(v)).collect()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            activations.push(a);
        }
        let (id, version) = self.stamp();
        Ok(GradientTape {
            net_id: id,
            net_version: version,
            activations,
        })
    }

    /// Backpropagates `output_gradient` through the recorded pass.
    pub fn backward(&self, tape: &GradientTape, output_gradient: &[f32]) -> Result<Gradients> {
        if (tape.net_id, tape.net_version) != self.stamp()
            || tape.activations.len() != self.layer_sizes.len()
        {
            return Err(NnError::StaleTape);
        }
        check_len("output gradient", self.output_dim(), output_gradient.len())?;
        let spans = self.spans();
        let last = spans.len() - 1;
        let mut grads = vec![0.0f32; self.params.len()];

        let y = &tape.activations[last + 1];
        let mut delta: Vec<f64> = output_gradient
            .iter()
            .zip(y)
            .map(|(&g, &yo)| g as f64 * self.output.derivative_from_output(yo))
            .collect();

        let mut input_grad = Vec::new();
        for l in (0..=last).rev() {
            let s = spans[l];
            let x = &tape.activations[l];
            for (o, &d) in delta.iter().enumerate() {
                grads[s.biases + o] = d as f32;
            }
            for (i, &xi) in x.iter().enumerate() {
                let row = &mut grads[s.weights + i * s.fan_out..s.weights + (i + 1) * s.fan_out];
                for (g, &d) in row.iter_mut().zip(&delta) {
                    *g = (xi * d) as f32;
                }
            }
            let w = &self.params[s.weights..s.weights + s.fan_in * s.fan_out];
            let mut prev: Vec<f64> = (0..s.fan_in)
                .map(|i| {
                    w[i * s.fan_out..(i + 1) * s.fan_out]
                        .iter()
                        .zip(&delta)
                        .map(|(&wio, &d)| wio as f64 * d)
                        .sum()
                })
                .collect();
            if l == 0 {
                input_grad = prev.iter().map(|&v| v as f32).collect();
            } else {
                // ReLU gate on the previous layer's activation.
                for (p, &a) in prev.iter_mut().zip(x) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Ok(Gradients {
            params: grads,
            input: input_grad,
        })
    }
}

/// Activations cached by a single-sample forward pass.
#[derive(Debug, Clone)]
pub struct GradientTape {
    net_id: u64,
    net_version: u64,
    // activations[0] is the input, activations[L] the network output.
    activations: Vec<Vec<f64>>,
}

impl GradientTape {
    pub fn output(&self) -> Vec<f32> {
        self.activations
            .last()
            .expect("tape has at least the input")
            .iter()
            .map(|&v| v as f32)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// Aligned with [`Mlp::params`].
    pub params: Vec<f32>,
    pub input: Vec<f32>,
}
