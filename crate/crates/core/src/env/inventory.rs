//! Single-item inventory control with random daily demand.
//!
//! Stock `s` and order `a` both range over `0..=M`. Available stock is
//! `min(s + a, M)`; with demand `d` the next stock is `max(min(s + a, M) - d, 0)`
//! and the day's reward is `-c a - h (leftover) + p (units sold)`. The order
//! cost is charged on `a` even when capacity truncates the delivery.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::model::{GenerativeModel, Transition};
use crate::policy::{sample_index, PROB_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInventory", into = "RawInventory")]
pub struct InventoryParams {
    capacity: usize,
    unit_cost: f64,
    holding_cost: f64,
    price: f64,
    demand_pmf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInventory {
    capacity: usize,
    unit_cost: f64,
    holding_cost: f64,
    price: f64,
    demand_pmf: Vec<f64>,
}

impl TryFrom<RawInventory> for InventoryParams {
    type Error = Error;
    fn try_from(r: RawInventory) -> Result<Self> {
        InventoryParams::new(r.capacity, r.unit_cost, r.holding_cost, r.price, r.demand_pmf)
    }
}

impl From<InventoryParams> for RawInventory {
    fn from(p: InventoryParams) -> Self {
        RawInventory {
            capacity: p.capacity,
            unit_cost: p.unit_cost,
            holding_cost: p.holding_cost,
            price: p.price,
            demand_pmf: p.demand_pmf,
        }
    }
}

/// `M = 2, c = 5, h = 2, p = 9`, demand `0, 1, 2` with probabilities `0.2, 0.3, 0.5`.
impl Default for InventoryParams {
    fn default() -> Self {
        Self {
            capacity: 2,
            unit_cost: 5.0,
            holding_cost: 2.0,
            price: 9.0,
            demand_pmf: vec![0.2, 0.3, 0.5],
        }
    }
}

impl InventoryParams {
    pub fn new(
        capacity: usize,
        unit_cost: f64,
        holding_cost: f64,
        price: f64,
        demand_pmf: Vec<f64>,
    ) -> Result<Self> {
        for (name, value) in [("unit_cost", unit_cost), ("holding_cost", holding_cost), ("price", price)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidEnvironment(format!("{name} must be finite and >= 0, got {value}")));
            }
        }
        if demand_pmf.is_empty() {
            return Err(Error::InvalidEnvironment("demand_pmf is empty".into()));
        }
        if let Some(d) = demand_pmf.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidEnvironment(format!(
                "demand_pmf[{d}] = {} is not a probability",
                demand_pmf[d]
            )));
        }
        let total: f64 = demand_pmf.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidEnvironment(format!("demand_pmf sums to {total}, expected 1")));
        }
        Ok(Self {
            capacity,
            unit_cost,
            holding_cost,
            price,
            demand_pmf,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn unit_cost(&self) -> f64 {
        self.unit_cost
    }

    pub fn holding_cost(&self) -> f64 {
        self.holding_cost
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn demand_pmf(&self) -> &[f64] {
        &self.demand_pmf
    }

    /// Deterministic outcome of stock `s`, order `a` and realised demand `d`.
    pub fn outcome(&self, s: usize, a: usize, demand: usize) -> Transition {
        let available = (s + a).min(self.capacity);
        let leftover = available.saturating_sub(demand);
        let sold = available.min(demand);
        Transition {
            next_state: leftover,
            reward: -self.unit_cost * a as f64 - self.holding_cost * leftover as f64
                + self.price * sold as f64,
        }
    }

    pub fn sample_demand<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.demand_pmf, rng)
    }

    /// Largest `|r|` over every reachable `(s, a, d)`.
    pub fn sampled_reward_bound(&self) -> f64 {
        let n = self.capacity + 1;
        let mut bound = 0.0f64;
        for s in 0..n {
            for a in 0..n {
                for d in 0..self.demand_pmf.len() {
                    bound = bound.max(self.outcome(s, a, d).reward.abs());
                }
            }
        }
        bound
    }
}

/// Expected-reward tabular form of the inventory problem.
pub fn inventory_mdp(params: &InventoryParams) -> Result<TabularMdp> {
    let n = params.capacity + 1;
    let mut transition = vec![0.0; n * n * n];
    let mut reward = vec![0.0; n * n];
    for s in 0..n {
        for a in 0..n {
            let row = (s * n + a) * n;
            for (d, &prob) in params.demand_pmf.iter().enumerate() {
                let out = params.outcome(s, a, d);
                transition[row + out.next_state] += prob;
                reward[s * n + a] += prob * out.reward;
            }
        }
    }
    TabularMdp::new(n, n, transition, reward, params.sampled_reward_bound())
}

/// Draw a demand and return the resulting `(next stock, reward)`.
pub fn inventory_sample<R: Rng + ?Sized>(
    params: &InventoryParams,
    s: usize,
    a: usize,
    rng: &mut R,
) -> Transition {
    params.outcome(s, a, params.sample_demand(rng))
}

impl GenerativeModel for InventoryParams {
    fn num_states(&self) -> usize {
        self.capacity + 1
    }

    fn num_actions(&self) -> usize {
        self.capacity + 1
    }

    fn reward_bound(&self) -> f64 {
        self.sampled_reward_bound()
    }

    fn sample<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Transition {
        inventory_sample(self, s, a, rng)
    }
}
