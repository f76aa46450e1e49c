//! Off-policy evaluation of a one-step non-stationary policy `(mu, pi, pi, ...)`
//! by synchronous stochastic approximation with importance weighting.
//!
//! Two iterates are kept: `W` tracks the QH value of the stationary tail `pi`
//! and `V` the QH value of the full policy. Each sweep draws, for every state
//! `s`, an action `a ~ nu(.|s)`, a transition `s'`, a tail action `a' ~ pi(.|s')`
//! and a second reward, and forms
//!
//! ```text
//! target(s) = r(s, a) - (1 - sigma) gamma r(s', a') + gamma W(s')
//! W <- W + alpha_n (pi(a|s)/nu(a|s) * target - W)
//! V <- V + alpha_n (mu(a|s)/nu(a|s) * target - V)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discount::DiscountParams;
use crate::dp::{eval_stationary_qh, one_step_from_tail, SolverConfig};
use crate::error::{Error, Result};
use crate::log::ConvergenceLog;
use crate::mdp::TabularMdp;
use crate::model::GenerativeModel;
use crate::policy::{OneStepPolicy, StationaryPolicy};
use crate::schedule::StepSizeSchedule;
use crate::values::{l2_distance, ValueVector};

/// `target(a|s) / behavior(a|s)` on the behavior support, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRatios {
    num_actions: usize,
    ratios: Vec<f64>,
    max: f64,
}

impl ImportanceRatios {
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.ratios[s * self.num_actions + a]
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.ratios
    }
}

pub fn importance_ratios(
    behavior: &StationaryPolicy,
    target: &StationaryPolicy,
) -> Result<ImportanceRatios> {
    target.check_shape(behavior.num_states(), behavior.num_actions())?;
    let na = behavior.num_actions();
    let mut ratios = Vec::with_capacity(behavior.num_states() * na);
    let mut max = 0.0f64;
    for s in 0..behavior.num_states() {
        for a in 0..na {
            let (b, t) = (behavior.prob(s, a), target.prob(s, a));
            if b > 0.0 {
                let rho = t / b;
                max = max.max(rho);
                ratios.push(rho);
            } else if t > 0.0 {
                return Err(Error::CoverageViolation {
                    state: s,
                    action: a,
                    target: t,
                });
            } else {
                ratios.push(0.0);
            }
        }
    }
    Ok(ImportanceRatios {
        num_actions: na,
        ratios,
        max,
    })
}

/// Everything one evaluation run needs. Construction checks shapes and coverage.
#[derive(Debug)]
pub struct EvalProblem<'m, M> {
    model: &'m M,
    behavior: StationaryPolicy,
    target: OneStepPolicy,
    params: DiscountParams,
    schedule: StepSizeSchedule,
    rng_seed: u64,
    tail_ratios: ImportanceRatios,
    initial_ratios: ImportanceRatios,
}

impl<M> Clone for EvalProblem<'_, M> {
    fn clone(&self) -> Self {
        Self {
            model: self.model,
            behavior: self.behavior.clone(),
            target: self.target.clone(),
            params: self.params,
            schedule: self.schedule,
            rng_seed: self.rng_seed,
            tail_ratios: self.tail_ratios.clone(),
            initial_ratios: self.initial_ratios.clone(),
        }
    }
}

impl<'m, M: GenerativeModel> EvalProblem<'m, M> {
    pub fn new(
        model: &'m M,
        behavior: StationaryPolicy,
        target: OneStepPolicy,
        params: DiscountParams,
        schedule: StepSizeSchedule,
        rng_seed: u64,
    ) -> Result<Self> {
        behavior.check_shape(model.num_states(), model.num_actions())?;
        let tail_ratios = importance_ratios(&behavior, &target.tail)?;
        let initial_ratios = importance_ratios(&behavior, &target.initial)?;
        Ok(Self {
            model,
            behavior,
            target,
            params,
            schedule,
            rng_seed,
            tail_ratios,
            initial_ratios,
        })
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..self.clone()
        }
    }

    pub fn model(&self) -> &'m M {
        self.model
    }

    pub fn behavior(&self) -> &StationaryPolicy {
        &self.behavior
    }

    pub fn target(&self) -> &OneStepPolicy {
        &self.target
    }

    pub fn params(&self) -> &DiscountParams {
        &self.params
    }

    pub fn schedule(&self) -> &StepSizeSchedule {
        &self.schedule
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Ratios `pi / nu` for the tail policy; `max()` is `rho_max^(1)`.
    pub fn tail_ratios(&self) -> &ImportanceRatios {
        &self.tail_ratios
    }

    /// Ratios `mu / nu` for the first-step policy; `max()` is `rho_max^(2)`.
    pub fn initial_ratios(&self) -> &ImportanceRatios {
        &self.initial_ratios
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalState {
    /// Estimate of the stationary tail value.
    pub w: ValueVector,
    /// Estimate of the one-step policy value.
    pub v: ValueVector,
    pub n: u64,
}

impl EvalState {
    pub fn zeros(num_states: usize) -> Self {
        Self {
            w: ValueVector::zeros(num_states),
            v: ValueVector::zeros(num_states),
            n: 0,
        }
    }
}

/// One state's sampled target and its two importance weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSample {
    pub action: usize,
    pub next_state: usize,
    pub target: f64,
    /// `pi(a|s) / nu(a|s)`.
    pub rho_tail: f64,
    /// `mu(a|s) / nu(a|s)`.
    pub rho_initial: f64,
}

pub fn sample_target<M: GenerativeModel, R: Rng + ?Sized>(
    problem: &EvalProblem<'_, M>,
    w: &[f64],
    s: usize,
    rng: &mut R,
) -> TargetSample {
    let (sigma, gamma) = (problem.params.sigma(), problem.params.gamma());
    let action = problem.behavior.sample_action(s, rng);
    let first = problem.model.sample(s, action, rng);
    let next = first.next_state;
    let tail_action = problem.target.tail.sample_action(next, rng);
    let second = problem.model.sample(next, tail_action, rng);
    TargetSample {
        action,
        next_state: next,
        target: first.reward - (1.0 - sigma) * gamma * second.reward + gamma * w[next],
        rho_tail: problem.tail_ratios.get(s, action),
        rho_initial: problem.initial_ratios.get(s, action),
    }
}

/// One synchronous sweep with the schedule's step `alpha_n`.
pub fn eval_sweep<M: GenerativeModel, R: Rng + ?Sized>(
    state: &mut EvalState,
    problem: &EvalProblem<'_, M>,
    rng: &mut R,
) {
    let alpha = problem.schedule.alpha(state.n);
    eval_sweep_with_step(state, problem, alpha, rng);
}

/// One synchronous sweep with an explicit step size.
pub fn eval_sweep_with_step<M: GenerativeModel, R: Rng + ?Sized>(
    state: &mut EvalState,
    problem: &EvalProblem<'_, M>,
    alpha: f64,
    rng: &mut R,
) {
    let ns = state.w.len();
    let samples: Vec<TargetSample> = (0..ns)
        .map(|s| sample_target(problem, state.w.as_slice(), s, rng))
        .collect();
    let w = state.w.as_mut_slice();
    for (s, smp) in samples.iter().enumerate() {
        w[s] += alpha * (smp.rho_tail * smp.target - w[s]);
    }
    let v = state.v.as_mut_slice();
    for (s, smp) in samples.iter().enumerate() {
        v[s] += alpha * (smp.rho_initial * smp.target - v[s]);
    }
    state.n += 1;
}

/// Exact values the iterates should converge to.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReference {
    pub tail: ValueVector,
    pub one_step: ValueVector,
}

impl EvalReference {
    pub fn exact(
        mdp: &TabularMdp,
        params: &DiscountParams,
        policy: &OneStepPolicy,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let tail = eval_stationary_qh(mdp, params, &policy.tail, cfg)?;
        let one_step = one_step_from_tail(mdp, params, policy, &tail);
        Ok(Self { tail, one_step })
    }
}

pub const EVAL_METRICS: [&str; 2] = ["err_W_l2", "err_V_l2"];

/// Run `num_sweeps` sweeps from zero, seeded by the problem.
///
/// With a reference, the L2 errors of `W` and `V` are logged after every sweep.
pub fn run_policy_eval<M: GenerativeModel>(
    problem: &EvalProblem<'_, M>,
    num_sweeps: u64,
    reference: Option<&EvalReference>,
) -> (EvalState, ConvergenceLog) {
    let mut rng = problem.rng();
    let mut state = EvalState::zeros(problem.model.num_states());
    let mut log = ConvergenceLog::new(EVAL_METRICS);
    for _ in 0..num_sweeps {
        eval_sweep(&mut state, problem, &mut rng);
        if let Some(r) = reference {
            log.push(
                state.n,
                vec![
                    l2_distance(state.w.as_slice(), r.tail.as_slice()),
                    l2_distance(state.v.as_slice(), r.one_step.as_slice()),
                ],
            );
        }
    }
    (state, log)
}
