use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-state value estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector {
    values: Vec<f64>,
}

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValues(format!(
                "entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(num_states: usize) -> Self {
        Self {
            values: vec![0.0; num_states],
        }
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, s: usize) -> f64 {
        self.values[s]
    }

    pub fn sup_distance(&self, other: &ValueVector) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    pub fn l2_distance(&self, other: &ValueVector) -> f64 {
        l2_distance(&self.values, &other.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for ValueVector {
    type Output = f64;
    fn index(&self, s: usize) -> &f64 {
        &self.values[s]
    }
}

/// Action values stored row-major by `(state, action)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(num_states: usize, num_actions: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_states * num_actions {
            return Err(Error::DimensionMismatch(format!(
                "Q-table of shape {num_states}x{num_actions} needs {} entries, got {}",
                num_states * num_actions,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValues(format!(
                "Q entry ({}, {}) is not finite",
                i / num_actions.max(1),
                i % num_actions.max(1)
            )));
        }
        Ok(Self {
            num_states,
            num_actions,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_actions) {
            return Err(Error::DimensionMismatch("ragged Q-table rows".into()));
        }
        Self::new(rows.len(), num_actions, rows.concat())
    }

    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            values: vec![0.0; num_states * num_actions],
        }
    }

    pub(crate) fn from_vec_unchecked(num_states: usize, num_actions: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), num_states * num_actions);
        Self {
            num_states,
            num_actions,
            values,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.num_actions.max(1))
    }

    /// Index of the largest entry in row `s`; ties go to the lowest index.
    pub fn argmax(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, &q) in row.iter().enumerate().skip(1) {
            if q > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn greedy_actions(&self) -> Vec<usize> {
        (0..self.num_states).map(|s| self.argmax(s)).collect()
    }

    pub fn max_row(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V(s) = max_a Q(s, a)`.
    pub fn state_values(&self) -> ValueVector {
        ValueVector::from_vec_unchecked((0..self.num_states).map(|s| self.max_row(s)).collect())
    }

    pub fn sup_distance(&self, other: &QTable) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
