use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::values::QTable;

pub(crate) const PROB_TOLERANCE: f64 = 1e-12;

/// Stochastic stationary policy `pi(a | s)`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct StationaryPolicy {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl StationaryPolicy {
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::InvalidPolicy("policy needs at least one state and one action".into()));
        }
        if probs.len() != num_states * num_actions {
            return Err(Error::DimensionMismatch(format!(
                "policy of shape {num_states}x{num_actions} needs {} entries, got {}",
                num_states * num_actions,
                probs.len()
            )));
        }
        for (s, row) in probs.chunks(num_actions).enumerate() {
            if let Some(a) = row.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidPolicy(format!(
                    "pi({a} | {s}) = {} is not a probability",
                    row[a]
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::InvalidPolicy(format!(
                    "row {s} sums to {total}, expected 1"
                )));
            }
        }
        Ok(Self {
            num_states,
            num_actions,
            probs,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_actions) {
            return Err(Error::DimensionMismatch("ragged policy rows".into()));
        }
        Self::new(rows.len(), num_actions, rows.concat())
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Result<Self> {
        Self::new(
            num_states,
            num_actions,
            vec![1.0 / num_actions as f64; num_states * num_actions],
        )
    }

    /// Deterministic policy taking `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], num_actions: usize) -> Result<Self> {
        if let Some(s) = actions.iter().position(|&a| a >= num_actions) {
            return Err(Error::InvalidPolicy(format!(
                "action {} at state {s} out of range 0..{num_actions}",
                actions[s]
            )));
        }
        let mut probs = vec![0.0; actions.len() * num_actions];
        for (s, &a) in actions.iter().enumerate() {
            probs[s * num_actions + a] = 1.0;
        }
        Self::new(actions.len(), num_actions, probs)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.num_actions)
    }

    /// The chosen action per state if every row is a point mass.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.rows()
            .map(|row| row.iter().position(|&p| p == 1.0))
            .collect()
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        sample_index(self.row(s), rng)
    }

    pub(crate) fn check_shape(&self, num_states: usize, num_actions: usize) -> Result<()> {
        if self.num_states != num_states || self.num_actions != num_actions {
            return Err(Error::DimensionMismatch(format!(
                "policy is {}x{}, model is {num_states}x{num_actions}",
                self.num_states, self.num_actions
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for StationaryPolicy {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<StationaryPolicy> for Vec<Vec<f64>> {
    fn from(p: StationaryPolicy) -> Self {
        p.rows().map(<[f64]>::to_vec).collect()
    }
}

/// The policy `(mu, pi, pi, ...)`: `mu` for the first decision, `pi` forever after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStepPolicy {
    pub initial: StationaryPolicy,
    pub tail: StationaryPolicy,
}

impl OneStepPolicy {
    pub fn new(initial: StationaryPolicy, tail: StationaryPolicy) -> Result<Self> {
        if initial.num_states != tail.num_states || initial.num_actions != tail.num_actions {
            return Err(Error::DimensionMismatch(
                "initial and tail policies have different shapes".into(),
            ));
        }
        Ok(Self { initial, tail })
    }

    pub fn stationary(pi: StationaryPolicy) -> Self {
        Self {
            initial: pi.clone(),
            tail: pi,
        }
    }
}

/// Deterministic greedy policy on `q`, lowest action index on ties.
pub fn greedy_policy(q: &QTable) -> StationaryPolicy {
    let actions = q.greedy_actions();
    StationaryPolicy::deterministic(&actions, q.num_actions())
        .expect("greedy actions are in range")
}

/// Draw an index from a probability row by inverse CDF.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    // rounding left u above the final cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
