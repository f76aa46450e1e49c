//! Monte-Carlo estimate of the QH-discounted return from simulated episodes.

use rand::Rng;

use crate::discount::DiscountParams;
use crate::error::{Error, Result};
use crate::model::GenerativeModel;
use crate::policy::{OneStepPolicy, StationaryPolicy};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Non-stationary policy `(nu_0, ..., nu_{k-1}, pi, pi, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySequence {
    pub prefix: Vec<StationaryPolicy>,
    pub tail: StationaryPolicy,
}

impl PolicySequence {
    pub fn new(prefix: Vec<StationaryPolicy>, tail: StationaryPolicy) -> Self {
        Self { prefix, tail }
    }

    pub fn at(&self, t: usize) -> &StationaryPolicy {
        self.prefix.get(t).unwrap_or(&self.tail)
    }
}

impl From<OneStepPolicy> for PolicySequence {
    fn from(p: OneStepPolicy) -> Self {
        Self {
            prefix: vec![p.initial],
            tail: p.tail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Number of rewards accumulated per episode (`t = 0 .. horizon - 1`).
    pub horizon: usize,
    pub num_episodes: usize,
    /// Reject the run if the truncation bias bound exceeds this.
    pub max_bias: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    /// Upper bound on `|E[truncated return] - value|`.
    pub truncation_bias: f64,
    pub num_episodes: usize,
}

impl McEstimate {
    /// Half-width of the 99% interval widened by the truncation bias.
    pub fn tolerance_99(&self) -> f64 {
        Z_99 * self.std_err + self.truncation_bias
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.tolerance_99()
    }
}

/// `sigma gamma^H r_max / (1 - gamma)`: the weight left beyond the horizon.
pub fn truncation_bias(params: &DiscountParams, horizon: usize, reward_bound: f64) -> f64 {
    if horizon == 0 {
        return reward_bound * (1.0 + params.sigma() * params.gamma() / (1.0 - params.gamma()));
    }
    params.sigma() * params.gamma().powi(horizon as i32) * reward_bound / (1.0 - params.gamma())
}

pub fn mc_qh_return<M, R>(
    model: &M,
    params: &DiscountParams,
    policy: &PolicySequence,
    start: usize,
    cfg: &McConfig,
    rng: &mut R,
) -> Result<McEstimate>
where
    M: GenerativeModel + ?Sized,
    R: Rng + ?Sized,
{
    let (ns, na) = (model.num_states(), model.num_actions());
    if start >= ns {
        return Err(Error::DimensionMismatch(format!("start state {start} out of range 0..{ns}")));
    }
    for pi in policy.prefix.iter().chain(std::iter::once(&policy.tail)) {
        pi.check_shape(ns, na)?;
    }
    if cfg.num_episodes < 2 {
        return Err(Error::InvalidSolverConfig("Monte-Carlo needs at least two episodes".into()));
    }
    let bias = truncation_bias(params, cfg.horizon, model.reward_bound());
    if let Some(requested) = cfg.max_bias {
        if bias > requested {
            return Err(Error::HorizonTooShort {
                horizon: cfg.horizon,
                bias,
                requested,
            });
        }
    }

    let (sigma, gamma) = (params.sigma(), params.gamma());
    // Welford running moments
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for episode in 1..=cfg.num_episodes {
        let mut state = start;
        let mut weight = 1.0;
        let mut ret = 0.0;
        for t in 0..cfg.horizon {
            let action = policy.at(t).sample_action(state, rng);
            let step = model.sample(state, action, rng);
            ret += weight * step.reward;
            state = step.next_state;
            weight *= if t == 0 { sigma * gamma } else { gamma };
            if weight == 0.0 {
                break;
            }
        }
        let delta = ret - mean;
        mean += delta / episode as f64;
        m2 += delta * (ret - mean);
    }
    let n = cfg.num_episodes as f64;
    let variance = (m2 / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_err: (variance / n).sqrt(),
        truncation_bias: bias,
        num_episodes: cfg.num_episodes,
    })
}
