//! Fixed rescaling of observation slices before they reach any network.
//!
//! Large blocks of weak features (a flattened image next to a handful of
//! scalars) otherwise dominate the first layer's pre-activations. Scaling is
//! part of the agent, so it is saved with the checkpoint and applied
//! identically when acting, training and evaluating.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RlError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledRange {
    pub start: usize,
    pub end: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputScaling(Vec<ScaledRange>);

impl InputScaling {
    pub fn new(ranges: Vec<ScaledRange>) -> Self {
        Self(ranges)
    }

    pub fn ranges(&self) -> &[ScaledRange] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|r| r.factor == 1.0 || r.start == r.end)
    }

    pub fn validate(&self, obs_dim: usize) -> Result<()> {
        let mut covered = vec![false; obs_dim];
        for r in &self.0 {
            if r.start > r.end || r.end > obs_dim {
                return Err(RlError::Config(format!(
                    "input scaling range {}..{} outside observation width {obs_dim}",
                    r.start, r.end
                )));
            }
            if !(r.factor.is_finite() && r.factor > 0.0) {
                return Err(RlError::Config(format!("input scaling factor {} must be positive", r.factor)));
            }
            for c in &mut covered[r.start..r.end] {
                if *c {
                    return Err(RlError::Config("input scaling ranges overlap".into()));
                }
                *c = true;
            }
        }
        Ok(())
    }

    /// Scales every row of a row-major `rows × obs_dim` block.
    pub fn apply<'a>(&self, data: &'a [f32], obs_dim: usize) -> Cow<'a, [f32]> {
        if self.is_identity() {
            return Cow::Borrowed(data);
        }
        let mut out = data.to_vec();
        for row in out.chunks_exact_mut(obs_dim) {
            for r in &self.0 {
                let f = r.factor as f32;
                row[r.start..r.end].iter_mut().for_each(|v| *v *= f);
            }
        }
        Cow::Owned(out)
    }
}
