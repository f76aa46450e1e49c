use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

/// Parameters of a seeded random MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMdpSpec {
    pub num_states: usize,
    pub num_actions: usize,
    /// Rewards are drawn uniformly from `[lo, hi]`.
    pub reward_range: (f64, f64),
    /// Probability that a transition entry is zeroed (each row keeps at least one).
    #[serde(default)]
    pub sparsity: f64,
    pub seed: u64,
}

impl RandomMdpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_states == 0 || self.num_actions == 0 {
            return Err(Error::InvalidEnvironment("random MDP needs at least one state and action".into()));
        }
        let (lo, hi) = self.reward_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidEnvironment(format!("reward range [{lo}, {hi}] is invalid")));
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(Error::InvalidEnvironment(format!(
                "sparsity must lie in [0, 1), got {}",
                self.sparsity
            )));
        }
        Ok(())
    }
}

pub fn random_mdp(spec: &RandomMdpSpec) -> Result<TabularMdp> {
    spec.validate()?;
    let (ns, na) = (spec.num_states, spec.num_actions);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut transition = Vec::with_capacity(ns * na * ns);
    for _ in 0..ns * na {
        let keep = rng.gen_range(0..ns);
        let mut row: Vec<f64> = (0..ns)
            .map(|next| {
                let zeroed = spec.sparsity > 0.0 && next != keep && rng.gen::<f64>() < spec.sparsity;
                if zeroed {
                    0.0
                } else {
                    // bounded away from zero so dense rows have full support
                    0.05 + rng.gen::<f64>()
                }
            })
            .collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        transition.extend(row);
    }
    let (lo, hi) = spec.reward_range;
    let reward = (0..ns * na)
        .map(|_| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
        .collect();
    TabularMdp::new(ns, na, transition, reward, lo.abs().max(hi.abs()))
}
