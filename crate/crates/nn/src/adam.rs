use num_traits::{AsPrimitive, Float};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, NnError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. The update itself is evaluated in `f64`
/// whatever the storage type.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig,
    first_moments: Vec<T>,
    second_moments: Vec<T>,
    step_count: u64,
}

impl<T> Adam<T>
where
    T: Float + AsPrimitive<f64>,
    f64: AsPrimitive<T>,
{
    pub fn new(num_params: usize, config: AdamConfig) -> Result<Self> {
        if !(config.learning_rate > 0.0) {
            return Err(NnError::InvalidLearningRate(config.learning_rate));
        }
        Ok(Self {
            config,
            first_moments: vec![T::zero(); num_params],
            second_moments: vec![T::zero(); num_params],
            step_count: 0,
        })
    }

    pub fn from_parts(
        config: AdamConfig,
        first_moments: Vec<T>,
        second_moments: Vec<T>,
        step_count: u64,
    ) -> Result<Self> {
        check_len("adam moments", first_moments.len(), second_moments.len())?;
        let mut adam = Self::new(0, config)?;
        adam.first_moments = first_moments;
        adam.second_moments = second_moments;
        adam.step_count = step_count;
        Ok(adam)
    }

    pub fn config(&self) -> AdamConfig {
        self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moments(&self) -> &[T] {
        &self.first_moments
    }

    pub fn second_moments(&self) -> &[T] {
        &self.second_moments
    }

    /// Applies one update. A non-finite gradient rejects the whole update and
    /// leaves parameters and state untouched.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        check_len("adam parameters", self.first_moments.len(), params.len())?;
        check_len("adam gradients", params.len(), grads.len())?;
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(NnError::NonFiniteGradient { index });
        }
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        self.step_count += 1;
        let t = self.step_count as i32;
        let step_size = learning_rate / (1.0 - beta1.powi(t));
        let inv_bias2 = 1.0 / (1.0 - beta2.powi(t));
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moments.iter_mut())
            .zip(self.second_moments.iter_mut())
        {
            let g: f64 = g.as_();
            let m_new = beta1 * m.as_() + (1.0 - beta1) * g;
            let v_new = beta2 * v.as_() + (1.0 - beta2) * g * g;
            *m = m_new.as_();
            *v = v_new.as_();
            let p_new: f64 = p.as_() - step_size * m_new / ((v_new * inv_bias2).sqrt() + epsilon);
            *p = p_new.as_();
        }
        Ok(())
    }
}
