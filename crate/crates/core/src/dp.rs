//! Model-based solvers: exponential value iteration, the QH Bellman operator
//! for stationary tails, one-step policy evaluation and the two-stage optimal
//! solution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discount::DiscountParams;
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::policy::{greedy_policy, OneStepPolicy, StationaryPolicy};
use crate::values::{sup_distance, QTable, ValueVector};

/// Maximum disagreement tolerated between the two constructions of the
/// optimal QH action values.
pub const QH_CONSISTENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvalBackend {
    /// Fixed-point iteration of the QH Bellman operator.
    #[default]
    Iterative,
    /// Direct solve of `(I - gamma P_pi) V = r_pi - (1 - sigma) gamma P_pi r_pi`.
    LinearSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Target sup-norm distance to the true fixed point.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub backend: EvalBackend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            backend: EvalBackend::Iterative,
        }
    }
}

impl SolverConfig {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        let cfg = Self {
            tolerance,
            max_iterations,
            backend: EvalBackend::Iterative,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_backend(mut self, backend: EvalBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSolverConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of exponential value iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSolution {
    pub values: ValueVector,
    pub q: QTable,
    pub iterations: usize,
}

/// Standard value iteration for `V_*^gamma`, started from zero.
///
/// Stops once `||V_{k+1} - V_k|| <= tol (1 - gamma) / gamma`, which puts the
/// returned values within `tol` of the optimum.
pub fn exp_value_iteration(mdp: &TabularMdp, gamma: f64, cfg: &SolverConfig) -> Result<ExpSolution> {
    DiscountParams::exponential(gamma)?;
    cfg.validate()?;
    let threshold = if gamma > 0.0 {
        cfg.tolerance * (1.0 - gamma) / gamma
    } else {
        f64::INFINITY
    };
    let mut v = vec![0.0; mdp.num_states()];
    let mut residual = f64::INFINITY;
    for k in 1..=cfg.max_iterations {
        let next: Vec<f64> = (0..mdp.num_states())
            .map(|s| {
                (0..mdp.num_actions())
                    .map(|a| mdp.reward(s, a) + gamma * mdp.expected_next(s, a, &v))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        residual = sup_distance(&next, &v);
        v = next;
        if residual <= threshold {
            let values = ValueVector::from_vec_unchecked(v);
            let q = exp_action_values(mdp, gamma, &values)?;
            return Ok(ExpSolution {
                values,
                q,
                iterations: k,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual,
    })
}

/// `Q(s, a) = r(s, a) + gamma * sum_{s'} P(s' | s, a) v(s')`.
pub fn exp_action_values(mdp: &TabularMdp, gamma: f64, v: &ValueVector) -> Result<QTable> {
    mdp.check_values(v)?;
    Ok(lookahead_q(mdp, gamma, v.as_slice()))
}

fn lookahead_q(mdp: &TabularMdp, weight: f64, v: &[f64]) -> QTable {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let mut q = Vec::with_capacity(ns * na);
    for s in 0..ns {
        for a in 0..na {
            q.push(mdp.reward(s, a) + weight * mdp.expected_next(s, a, v));
        }
    }
    QTable::from_vec_unchecked(ns, na, q)
}

/// Continuation seen from the next state under a QH tail:
/// `u(s') = -(1 - sigma) gamma r_pi(s') + gamma w(s')`.
fn qh_continuation(params: &DiscountParams, tail_reward: &[f64], w: &[f64]) -> Vec<f64> {
    let (sigma, gamma) = (params.sigma(), params.gamma());
    tail_reward
        .iter()
        .zip(w)
        .map(|(r, x)| -(1.0 - sigma) * gamma * r + gamma * x)
        .collect()
}

/// `sum_a mu(a|s) [ r(s,a) + sum_{s'} P(s'|s,a) u(s') ]` for every `s`.
fn average_lookahead(mdp: &TabularMdp, mu: &StationaryPolicy, u: &[f64]) -> Vec<f64> {
    (0..mdp.num_states())
        .map(|s| {
            mu.row(s)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0.0)
                .map(|(a, &p)| p * (mdp.reward(s, a) + mdp.expected_next(s, a, u)))
                .sum()
        })
        .collect()
}

/// The QH Bellman operator of the stationary policy `pi` (a `gamma`-contraction
/// in sup norm whose fixed point is `V_pi^{sigma,gamma}`).
pub fn qh_bellman_operator(
    mdp: &TabularMdp,
    params: &DiscountParams,
    pi: &StationaryPolicy,
    v: &ValueVector,
) -> Result<ValueVector> {
    mdp.check_policy(pi)?;
    mdp.check_values(v)?;
    let r_pi = mdp.policy_reward(pi);
    let u = qh_continuation(params, r_pi.as_slice(), v.as_slice());
    Ok(ValueVector::from_vec_unchecked(average_lookahead(mdp, pi, &u)))
}

/// QH value of following `pi` from the first step onwards.
pub fn eval_stationary_qh(
    mdp: &TabularMdp,
    params: &DiscountParams,
    pi: &StationaryPolicy,
    cfg: &SolverConfig,
) -> Result<ValueVector> {
    mdp.check_policy(pi)?;
    cfg.validate()?;
    match cfg.backend {
        EvalBackend::Iterative => eval_stationary_iterative(mdp, params, pi, cfg),
        EvalBackend::LinearSolve => eval_stationary_linear(mdp, params, pi),
    }
}

fn eval_stationary_iterative(
    mdp: &TabularMdp,
    params: &DiscountParams,
    pi: &StationaryPolicy,
    cfg: &SolverConfig,
) -> Result<ValueVector> {
    let r_pi = mdp.policy_reward(pi);
    let threshold = cfg.tolerance * (1.0 - params.gamma());
    let mut v = vec![0.0; mdp.num_states()];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let u = qh_continuation(params, r_pi.as_slice(), &v);
        let next = average_lookahead(mdp, pi, &u);
        residual = sup_distance(&next, &v);
        v = next;
        if residual <= threshold {
            return Ok(ValueVector::from_vec_unchecked(v));
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual,
    })
}

fn eval_stationary_linear(
    mdp: &TabularMdp,
    params: &DiscountParams,
    pi: &StationaryPolicy,
) -> Result<ValueVector> {
    let n = mdp.num_states();
    let (sigma, gamma) = (params.sigma(), params.gamma());
    let p_pi = DMatrix::from_row_slice(n, n, &mdp.policy_transition(pi));
    let r_pi = DVector::from_column_slice(mdp.policy_reward(pi).as_slice());
    let lhs = DMatrix::identity(n, n) - &p_pi * gamma;
    let rhs = &r_pi - (&p_pi * &r_pi) * ((1.0 - sigma) * gamma);
    let solution = lhs.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    ValueVector::new(solution.iter().copied().collect())
}

/// Exponential value `V_pi^gamma` of a stationary policy.
pub fn eval_stationary_exp(
    mdp: &TabularMdp,
    gamma: f64,
    pi: &StationaryPolicy,
    cfg: &SolverConfig,
) -> Result<ValueVector> {
    eval_stationary_qh(mdp, &DiscountParams::exponential(gamma)?, pi, cfg)
}

/// QH value of `(mu, pi, pi, ...)` via one-step lookahead on the stationary
/// tail value.
pub fn eval_one_step_qh(
    mdp: &TabularMdp,
    params: &DiscountParams,
    policy: &OneStepPolicy,
    cfg: &SolverConfig,
) -> Result<ValueVector> {
    mdp.check_policy(&policy.initial)?;
    let tail_value = eval_stationary_qh(mdp, params, &policy.tail, cfg)?;
    Ok(one_step_from_tail(mdp, params, policy, &tail_value))
}

/// Same as [`eval_one_step_qh`] but with the stationary tail value supplied.
pub fn one_step_from_tail(
    mdp: &TabularMdp,
    params: &DiscountParams,
    policy: &OneStepPolicy,
    tail_value: &ValueVector,
) -> ValueVector {
    let r_pi = mdp.policy_reward(&policy.tail);
    let u = qh_continuation(params, r_pi.as_slice(), tail_value.as_slice());
    ValueVector::from_vec_unchecked(average_lookahead(mdp, &policy.initial, &u))
}

/// QH action values of a stationary tail `pi`:
/// `Q(s,a) = r(s,a) + sum_{s'} P(s'|s,a) [ -(1-sigma) gamma r_pi(s') + gamma W(s') ]`
/// where `W = V_pi^{sigma,gamma}`.
pub fn qh_action_values(
    mdp: &TabularMdp,
    params: &DiscountParams,
    pi: &StationaryPolicy,
    tail_value: &ValueVector,
) -> Result<QTable> {
    mdp.check_policy(pi)?;
    mdp.check_values(tail_value)?;
    let r_pi = mdp.policy_reward(pi);
    let u = qh_continuation(params, r_pi.as_slice(), tail_value.as_slice());
    Ok(lookahead_q(mdp, 1.0, &u))
}

/// QH value of a first-step policy `mu` followed by a tail whose exponential
/// value is `v_exp_tail`: `sum_a mu(a|s) [ r(s,a) + sigma gamma P v_exp_tail ]`.
pub fn qh_value_from_exp_tail(
    mdp: &TabularMdp,
    params: &DiscountParams,
    mu: &StationaryPolicy,
    v_exp_tail: &ValueVector,
) -> Result<ValueVector> {
    mdp.check_policy(mu)?;
    mdp.check_values(v_exp_tail)?;
    let weight = params.sigma() * params.gamma();
    let u: Vec<f64> = v_exp_tail.as_slice().iter().map(|x| weight * x).collect();
    Ok(ValueVector::from_vec_unchecked(average_lookahead(mdp, mu, &u)))
}

/// Optimal one-step non-stationary policy and its action values.
#[derive(Debug, Clone, PartialEq)]
pub struct QhSolution {
    pub mu_star: StationaryPolicy,
    pub pi_star: StationaryPolicy,
    /// `Q_*^{sigma,gamma}`.
    pub q_qh: QTable,
    /// `Q_*^gamma`.
    pub q_exp: QTable,
    /// `V^*(s) = max_a Q_*^{sigma,gamma}(s, a)`.
    pub v_star: ValueVector,
    /// `V_*^gamma`.
    pub v_exp: ValueVector,
    pub iterations: usize,
}

impl QhSolution {
    pub fn policy(&self) -> OneStepPolicy {
        OneStepPolicy {
            initial: self.mu_star.clone(),
            tail: self.pi_star.clone(),
        }
    }
}

/// Two-stage solve: exponential value iteration for the tail, then a greedy
/// first step on `r + sigma gamma P V_*^gamma`.
///
/// The QH table is also formed as `(1 - sigma) r + sigma Q_*^gamma`; the two
/// must agree to [`QH_CONSISTENCY_TOLERANCE`].
pub fn optimal_qh_solution(
    mdp: &TabularMdp,
    params: &DiscountParams,
    cfg: &SolverConfig,
) -> Result<QhSolution> {
    let exp = exp_value_iteration(mdp, params.gamma(), cfg)?;
    let q_qh = lookahead_q(mdp, params.sigma() * params.gamma(), exp.values.as_slice());
    let sigma = params.sigma();
    let via_exp: Vec<f64> = mdp
        .rewards()
        .iter()
        .zip(exp.q.as_slice())
        .map(|(r, q)| (1.0 - sigma) * r + sigma * q)
        .collect();
    let gap = sup_distance(q_qh.as_slice(), &via_exp);
    if gap > QH_CONSISTENCY_TOLERANCE {
        return Err(Error::InconsistentQh(gap));
    }
    Ok(QhSolution {
        mu_star: greedy_policy(&q_qh),
        pi_star: greedy_policy(&exp.q),
        v_star: q_qh.state_values(),
        q_qh,
        q_exp: exp.q,
        v_exp: exp.values,
        iterations: exp.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::random::{random_mdp, RandomMdpSpec};

    fn single(reward: f64) -> TabularMdp {
        TabularMdp::with_tight_bound(1, 1, vec![1.0], vec![reward]).unwrap()
    }

    fn random(seed: u64) -> TabularMdp {
        random_mdp(&RandomMdpSpec {
            num_states: 5,
            num_actions: 3,
            reward_range: (-2.0, 3.0),
            sparsity: 0.3,
            seed,
        })
        .unwrap()
    }

    fn random_policy(seed: u64, ns: usize, na: usize) -> StationaryPolicy {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..ns)
            .map(|_| {
                let raw: Vec<f64> = (0..na).map(|_| rng.gen::<f64>()).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|x| x / total).collect()
            })
            .collect();
        StationaryPolicy::from_rows(&rows).unwrap()
    }

    #[test]
    fn geometric_series() {
        let sol = exp_value_iteration(&single(1.0), 0.9, &SolverConfig::default()).unwrap();
        assert!((sol.values[0] - 10.0).abs() < 1e-9);
        assert!((sol.q.get(0, 0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn zero_gamma_is_myopic() {
        let mdp = random(4);
        let sol = exp_value_iteration(&mdp, 0.0, &SolverConfig::default()).unwrap();
        assert_eq!(sol.q.as_slice(), mdp.rewards());
    }

    #[test]
    fn value_iteration_reports_non_convergence() {
        let cfg = SolverConfig::new(1e-10, 3).unwrap();
        match exp_value_iteration(&single(1.0), 0.9, &cfg) {
            Err(Error::NotConverged { iterations: 3, residual }) => assert!(residual > 0.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(SolverConfig::new(0.0, 10).is_err());
        assert!(SolverConfig::new(1e-3, 0).is_err());
    }

    #[test]
    fn stationary_qh_single_state() {
        let params = DiscountParams::new(0.3, 0.9).unwrap();
        let pi = StationaryPolicy::uniform(1, 1).unwrap();
        for backend in [EvalBackend::Iterative, EvalBackend::LinearSolve] {
            let cfg = SolverConfig::default().with_backend(backend);
            let v = eval_stationary_qh(&single(1.0), &params, &pi, &cfg).unwrap();
            assert!((v[0] - 3.7).abs() < 1e-9, "{backend:?}: {}", v[0]);
        }
        let tail = ValueVector::new(vec![10.0]).unwrap();
        let v = qh_value_from_exp_tail(&single(1.0), &params, &pi, &tail).unwrap();
        assert!((v[0] - 3.7).abs() < 1e-12);
    }

    #[test]
    fn operator_fixed_point_and_collapse() {
        let mdp = random(11);
        let params = DiscountParams::new(0.4, 0.85).unwrap();
        let pi = random_policy(2, 5, 3);
        let v = eval_stationary_qh(&mdp, &params, &pi, &SolverConfig::default()).unwrap();
        let tv = qh_bellman_operator(&mdp, &params, &pi, &v).unwrap();
        assert!(tv.sup_distance(&v) < 1e-10);

        let myopic = DiscountParams::new(0.4, 0.0).unwrap();
        let junk = ValueVector::new(vec![5.0, -3.0, 1.0, 2.0, 9.0]).unwrap();
        let out = qh_bellman_operator(&mdp, &myopic, &pi, &junk).unwrap();
        assert!(out.sup_distance(&mdp.policy_reward(&pi)) < 1e-15);
    }

    #[test]
    fn unit_sigma_matches_exponential_evaluation() {
        let mdp = random(7);
        let pi = random_policy(8, 5, 3);
        let params = DiscountParams::new(1.0, 0.9).unwrap();
        let v = eval_stationary_qh(&mdp, &params, &pi, &SolverConfig::default()).unwrap();
        // (I - gamma P_pi) V = r_pi solved independently by Neumann series
        let p = mdp.policy_transition(&pi);
        let r = mdp.policy_reward(&pi);
        let mut term = r.as_slice().to_vec();
        let mut total = term.clone();
        for _ in 0..800 {
            term = (0..5).map(|s| 0.9 * (0..5).map(|t| p[s * 5 + t] * term[t]).sum::<f64>()).collect();
            for (x, y) in total.iter_mut().zip(&term) {
                *x += y;
            }
        }
        assert!(sup_distance(v.as_slice(), &total) < 1e-9);
    }

    #[test]
    fn backends_agree() {
        for seed in 0..20 {
            let mdp = random(seed);
            let pi = random_policy(seed + 100, 5, 3);
            let params = DiscountParams::new(0.25, 0.95).unwrap();
            let a = eval_stationary_qh(&mdp, &params, &pi, &SolverConfig::default()).unwrap();
            let b = eval_stationary_qh(
                &mdp,
                &params,
                &pi,
                &SolverConfig::default().with_backend(EvalBackend::LinearSolve),
            )
            .unwrap();
            assert!(a.sup_distance(&b) < 1e-8);
        }
    }

    #[test]
    fn one_step_reductions() {
        let mdp = random(21);
        let pi = random_policy(1, 5, 3);
        let mu = random_policy(2, 5, 3);
        let cfg = SolverConfig::default();
        let params = DiscountParams::new(0.3, 0.9).unwrap();

        let stationary = eval_stationary_qh(&mdp, &params, &pi, &cfg).unwrap();
        let same = eval_one_step_qh(&mdp, &params, &OneStepPolicy::stationary(pi.clone()), &cfg).unwrap();
        assert!(stationary.sup_distance(&same) < 1e-10);

        let exp = DiscountParams::exponential(0.9).unwrap();
        let policy = OneStepPolicy::new(mu.clone(), pi.clone()).unwrap();
        let v = eval_one_step_qh(&mdp, &exp, &policy, &cfg).unwrap();
        let v_pi = eval_stationary_exp(&mdp, 0.9, &pi, &cfg).unwrap();
        let r_mu = mdp.policy_reward(&mu);
        let p_mu = mdp.policy_transition(&mu);
        for s in 0..5 {
            let expected = r_mu[s] + 0.9 * (0..5).map(|t| p_mu[s * 5 + t] * v_pi[t]).sum::<f64>();
            assert!((v[s] - expected).abs() < 1e-9);
        }

        let no_future = DiscountParams::new(0.0, 0.9).unwrap();
        let v = qh_value_from_exp_tail(&mdp, &no_future, &mu, &v_pi).unwrap();
        assert!(v.sup_distance(&r_mu) < 1e-15);
    }

    #[test]
    fn optimal_solution_unit_sigma() {
        let mdp = random(33);
        let params = DiscountParams::new(1.0, 0.9).unwrap();
        let sol = optimal_qh_solution(&mdp, &params, &SolverConfig::default()).unwrap();
        assert_eq!(sol.q_qh, sol.q_exp);
        assert_eq!(sol.mu_star, sol.pi_star);
    }

    #[test]
    fn policy_level_action_value_identity() {
        // (1 - sigma) r + sigma Q_pi^gamma == lookahead on V_pi^{sigma,gamma} with correction
        let cfg = SolverConfig::default();
        for seed in 0..10 {
            let mdp = random(seed + 50);
            let pi = random_policy(seed, 5, 3);
            let params = DiscountParams::new(0.35, 0.9).unwrap();
            let v_exp = eval_stationary_exp(&mdp, 0.9, &pi, &cfg).unwrap();
            let q_exp = exp_action_values(&mdp, 0.9, &v_exp).unwrap();
            let w = eval_stationary_qh(&mdp, &params, &pi, &cfg).unwrap();
            let q_qh = qh_action_values(&mdp, &params, &pi, &w).unwrap();
            for s in 0..5 {
                for a in 0..3 {
                    let lhs = 0.65 * mdp.reward(s, a) + 0.35 * q_exp.get(s, a);
                    assert!((lhs - q_qh.get(s, a)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let mdp = random(1);
        let params = DiscountParams::new(0.3, 0.9).unwrap();
        let pi = StationaryPolicy::uniform(4, 3).unwrap();
        assert!(matches!(
            eval_stationary_qh(&mdp, &params, &pi, &SolverConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let pi = StationaryPolicy::uniform(5, 3).unwrap();
        let v = ValueVector::zeros(2);
        assert!(qh_bellman_operator(&mdp, &params, &pi, &v).is_err());
    }
}
