use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{StationaryPolicy, PROB_TOLERANCE};
use crate::values::ValueVector;

/// On-disk form of a finite MDP. Field names are part of the file schema.
///
/// `transition` is flattened row-major over `(s, a, s')` and
/// `expected_reward` row-major over `(s, a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpSpec {
    pub num_states: usize,
    pub num_actions: usize,
    pub transition: Vec<f64>,
    pub expected_reward: Vec<f64>,
    pub reward_bound: f64,
}

/// One broken structural invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    NonFinite { what: &'static str, index: usize },
    NegativeProbability { state: usize, action: usize, next: usize, prob: f64 },
    RowSum { state: usize, action: usize, sum: f64 },
    RewardBound { state: usize, action: usize, reward: f64, bound: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::NonFinite { what, index } => write!(f, "{what}[{index}] is not finite"),
            Violation::NegativeProbability { state, action, next, prob } => {
                write!(f, "P({next} | {state}, {action}) = {prob} < 0")
            }
            Violation::RowSum { state, action, sum } => {
                write!(f, "P(. | {state}, {action}) sums to {sum}")
            }
            Violation::RewardBound { state, action, reward, bound } => {
                write!(f, "|r({state}, {action})| = {} exceeds bound {bound}", reward.abs())
            }
        }
    }
}

pub type ValidationReport = Vec<Violation>;

/// Check every structural invariant of an MDP description. Empty means valid.
pub fn validate_mdp(spec: &MdpSpec) -> ValidationReport {
    validate_parts(
        spec.num_states,
        spec.num_actions,
        &spec.transition,
        &spec.expected_reward,
        spec.reward_bound,
    )
}

fn validate_parts(
    ns: usize,
    na: usize,
    transition: &[f64],
    reward: &[f64],
    bound: f64,
) -> ValidationReport {
    let mut report = Vec::new();
    if ns == 0 || na == 0 {
        report.push(Violation::Shape(format!("need at least one state and action, got {ns}x{na}")));
        return report;
    }
    if transition.len() != ns * na * ns {
        report.push(Violation::Shape(format!(
            "transition has {} entries, expected {}",
            transition.len(),
            ns * na * ns
        )));
    }
    if reward.len() != ns * na {
        report.push(Violation::Shape(format!(
            "expected_reward has {} entries, expected {}",
            reward.len(),
            ns * na
        )));
    }
    if !report.is_empty() {
        return report;
    }
    if !(bound.is_finite() && bound >= 0.0) {
        report.push(Violation::Shape(format!("reward_bound must be finite and >= 0, got {bound}")));
    }
    for (i, row) in transition.chunks(ns).enumerate() {
        let (state, action) = (i / na, i % na);
        let mut sane = true;
        for (next, &prob) in row.iter().enumerate() {
            if !prob.is_finite() {
                report.push(Violation::NonFinite { what: "transition", index: i * ns + next });
                sane = false;
            } else if prob < 0.0 {
                report.push(Violation::NegativeProbability { state, action, next, prob });
            }
        }
        let sum: f64 = row.iter().sum();
        if sane && (sum - 1.0).abs() > PROB_TOLERANCE {
            report.push(Violation::RowSum { state, action, sum });
        }
    }
    for (i, &r) in reward.iter().enumerate() {
        if !r.is_finite() {
            report.push(Violation::NonFinite { what: "expected_reward", index: i });
        } else if r.abs() > bound {
            report.push(Violation::RewardBound {
                state: i / na,
                action: i % na,
                reward: r,
                bound,
            });
        }
    }
    report
}

/// A validated finite MDP with expected rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpSpec", into = "MdpSpec")]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    reward_bound: f64,
}

impl TabularMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        expected_reward: Vec<f64>,
        reward_bound: f64,
    ) -> Result<Self> {
        Self::try_from(MdpSpec {
            num_states,
            num_actions,
            transition,
            expected_reward,
            reward_bound,
        })
    }

    /// Build with `reward_bound` set to the largest `|r(s, a)|`.
    pub fn with_tight_bound(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        expected_reward: Vec<f64>,
    ) -> Result<Self> {
        let bound = expected_reward.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        Self::new(num_states, num_actions, transition, expected_reward, bound)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn reward_bound(&self) -> f64 {
        self.reward_bound
    }

    /// `P(. | s, a)` as a slice over next states.
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.num_actions + a) * self.num_states;
        &self.transition[start..start + self.num_states]
    }

    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.transition_row(s, a)[next]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.num_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    /// `sum_{s'} P(s' | s, a) v(s')`.
    pub fn expected_next(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        self.transition_row(s, a).iter().zip(v).map(|(p, x)| p * x).sum()
    }

    /// `r_pi(s) = sum_a pi(a | s) r(s, a)`.
    pub fn policy_reward(&self, pi: &StationaryPolicy) -> ValueVector {
        let values = (0..self.num_states)
            .map(|s| pi.row(s).iter().enumerate().map(|(a, p)| p * self.reward(s, a)).sum())
            .collect();
        ValueVector::from_vec_unchecked(values)
    }

    /// State-to-state kernel `P_pi(s, s')` row-major.
    pub fn policy_transition(&self, pi: &StationaryPolicy) -> Vec<f64> {
        let n = self.num_states;
        let mut out = vec![0.0; n * n];
        for s in 0..n {
            for (a, &p) in pi.row(s).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (next, &q) in self.transition_row(s, a).iter().enumerate() {
                    out[s * n + next] += p * q;
                }
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        validate_parts(
            self.num_states,
            self.num_actions,
            &self.transition,
            &self.reward,
            self.reward_bound,
        )
    }

    pub fn to_spec(&self) -> MdpSpec {
        self.clone().into()
    }

    pub(crate) fn check_policy(&self, pi: &StationaryPolicy) -> Result<()> {
        pi.check_shape(self.num_states, self.num_actions)
    }

    pub(crate) fn check_values(&self, v: &ValueVector) -> Result<()> {
        if v.len() != self.num_states {
            return Err(Error::DimensionMismatch(format!(
                "value vector has {} entries, MDP has {} states",
                v.len(),
                self.num_states
            )));
        }
        Ok(())
    }
}

impl TryFrom<MdpSpec> for TabularMdp {
    type Error = Error;
    fn try_from(spec: MdpSpec) -> Result<Self> {
        let report = validate_mdp(&spec);
        if !report.is_empty() {
            let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidMdp(msgs.join("; ")));
        }
        Ok(Self {
            num_states: spec.num_states,
            num_actions: spec.num_actions,
            transition: spec.transition,
            reward: spec.expected_reward,
            reward_bound: spec.reward_bound,
        })
    }
}

impl From<TabularMdp> for MdpSpec {
    fn from(m: TabularMdp) -> Self {
        MdpSpec {
            num_states: m.num_states,
            num_actions: m.num_actions,
            transition: m.transition,
            expected_reward: m.reward,
            reward_bound: m.reward_bound,
        }
    }
}
