//! FIFO replay buffer. Observations are stored sparsely because the
//! push-grasp quality map is almost entirely zeros.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Result, RlError};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f32>,
    pub action: Vec<f32>,
    pub reward: f32,
    pub next_state: Vec<f32>,
    pub terminal: bool,
}

/// Row-major batch of transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch {
    pub batch: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub states: Vec<f32>,
    pub actions: Vec<f32>,
    pub rewards: Vec<f32>,
    pub next_states: Vec<f32>,
    pub terminals: Vec<bool>,
}

impl Minibatch {
    pub fn from_transitions(transitions: &[Transition]) -> Result<Self> {
        let first = transitions.first().ok_or(RlError::InsufficientData { requested: 1, size: 0 })?;
        let (obs_dim, act_dim) = (first.state.len(), first.action.len());
        let mut mb = Self::with_capacity(transitions.len(), obs_dim, act_dim);
        for t in transitions {
            check_dim("transition state", obs_dim, t.state.len())?;
            check_dim("transition next state", obs_dim, t.next_state.len())?;
            check_dim("transition action", act_dim, t.action.len())?;
            mb.states.extend_from_slice(&t.state);
            mb.next_states.extend_from_slice(&t.next_state);
            mb.actions.extend_from_slice(&t.action);
            mb.rewards.push(t.reward);
            mb.terminals.push(t.terminal);
        }
        Ok(mb)
    }

    fn with_capacity(batch: usize, obs_dim: usize, act_dim: usize) -> Self {
        Self {
            batch,
            obs_dim,
            act_dim,
            states: Vec::with_capacity(batch * obs_dim),
            actions: Vec::with_capacity(batch * act_dim),
            rewards: Vec::with_capacity(batch),
            next_states: Vec::with_capacity(batch * obs_dim),
            terminals: Vec::with_capacity(batch),
        }
    }

    pub fn state(&self, row: usize) -> &[f32] {
        &self.states[row * self.obs_dim..(row + 1) * self.obs_dim]
    }

    pub fn action(&self, row: usize) -> &[f32] {
        &self.actions[row * self.act_dim..(row + 1) * self.act_dim]
    }

    pub fn next_state(&self, row: usize) -> &[f32] {
        &self.next_states[row * self.obs_dim..(row + 1) * self.obs_dim]
    }
}

/// Nonzero entries of a vector (signed zeros are kept).
#[derive(Debug, Clone)]
struct Packed {
    index: Vec<u32>,
    value: Vec<f32>,
}

impl Packed {
    fn new(v: &[f32]) -> Self {
        let mut index = Vec::new();
        let mut value = Vec::new();
        for (i, &x) in v.iter().enumerate() {
            if x.to_bits() != 0 {
                index.push(i as u32);
                value.push(x);
            }
        }
        Self { index, value }
    }

    fn unpack_into(&self, out: &mut [f32]) {
        out.fill(0.0);
        for (&i, &x) in self.index.iter().zip(&self.value) {
            out[i as usize] = x;
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    state: Packed,
    next_state: Packed,
    action: Vec<f32>,
    reward: f32,
    terminal: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    act_dim: usize,
    slots: Vec<Slot>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(RlError::Config("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            obs_dim,
            act_dim,
            slots: Vec::new(),
            cursor: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends a transition, overwriting the oldest one once full.
    pub fn store(&mut self, t: Transition) -> Result<()> {
        check_dim("stored state", self.obs_dim, t.state.len())?;
        check_dim("stored next state", self.obs_dim, t.next_state.len())?;
        check_dim("stored action", self.act_dim, t.action.len())?;
        let slot = Slot {
            state: Packed::new(&t.state),
            next_state: Packed::new(&t.next_state),
            action: t.action,
            reward: t.reward,
            terminal: t.terminal,
        };
        if self.slots.len() < self.capacity {
            self.slots.push(slot);
        } else {
            self.slots[self.cursor] = slot;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Transition at storage slot `i` (not insertion order once wrapped).
    pub fn get(&self, i: usize) -> Option<Transition> {
        let s = self.slots.get(i)?;
        let mut state = vec![0.0; self.obs_dim];
        let mut next_state = vec![0.0; self.obs_dim];
        s.state.unpack_into(&mut state);
        s.next_state.unpack_into(&mut next_state);
        Some(Transition {
            state,
            action: s.action.clone(),
            reward: s.reward,
            next_state,
            terminal: s.terminal,
        })
    }

    /// `n` slot indices drawn uniformly with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        if n == 0 || n > self.len() {
            return Err(RlError::InsufficientData {
                requested: n,
                size: self.len(),
            });
        }
        Ok((0..n).map(|_| rng.random_range(0..self.len())).collect())
    }

    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Minibatch> {
        let indices = self.sample_indices(n, rng)?;
        let mut mb = Minibatch::with_capacity(n, self.obs_dim, self.act_dim);
        mb.states.resize(n * self.obs_dim, 0.0);
        mb.next_states.resize(n * self.obs_dim, 0.0);
        for (row, &i) in indices.iter().enumerate() {
            let s = &self.slots[i];
            let span = row * self.obs_dim..(row + 1) * self.obs_dim;
            s.state.unpack_into(&mut mb.states[span.clone()]);
            s.next_state.unpack_into(&mut mb.next_states[span]);
            mb.actions.extend_from_slice(&s.action);
            mb.rewards.push(s.reward);
            mb.terminals.push(s.terminal);
        }
        Ok(mb)
    }
}
