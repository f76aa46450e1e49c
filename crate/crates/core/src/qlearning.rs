//! Synchronous QH Q-learning on a generative model.
//!
//! `Z` learns the exponential optimum `Q_*^gamma` by ordinary Q-learning;
//! `Q` learns `Q_*^{sigma,gamma}` by tracking `(1 - sigma) r + sigma Z`.
//! The `Q` update uses `Z_n` from before the current sweep's `Z` update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discount::DiscountParams;
use crate::log::ConvergenceLog;
use crate::model::GenerativeModel;
use crate::policy::{greedy_policy, StationaryPolicy};
use crate::schedule::StepSizeSchedule;
use crate::values::QTable;

#[derive(Debug, Clone, PartialEq)]
pub struct QLearnState {
    pub z: QTable,
    pub q: QTable,
    pub n: u64,
}

impl QLearnState {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            z: QTable::zeros(num_states, num_actions),
            q: QTable::zeros(num_states, num_actions),
            n: 0,
        }
    }
}

pub fn qlearn_sweep<M: GenerativeModel + ?Sized, R: Rng + ?Sized>(
    state: &mut QLearnState,
    model: &M,
    params: &DiscountParams,
    schedule: &StepSizeSchedule,
    rng: &mut R,
) {
    let alpha = schedule.alpha(state.n);
    qlearn_sweep_with_step(state, model, params, alpha, rng);
}

pub fn qlearn_sweep_with_step<M: GenerativeModel + ?Sized, R: Rng + ?Sized>(
    state: &mut QLearnState,
    model: &M,
    params: &DiscountParams,
    alpha: f64,
    rng: &mut R,
) {
    let (ns, na) = (state.z.num_states(), state.z.num_actions());
    let (sigma, gamma) = (params.sigma(), params.gamma());
    let mut rewards = Vec::with_capacity(ns * na);
    let mut next_max = Vec::with_capacity(ns * na);
    for s in 0..ns {
        for a in 0..na {
            let step = model.sample(s, a, rng);
            rewards.push(step.reward);
            next_max.push(state.z.max_row(step.next_state));
        }
    }
    let z = state.z.as_mut_slice();
    let q = state.q.as_mut_slice();
    for i in 0..ns * na {
        let z_old = z[i];
        z[i] += alpha * (rewards[i] + gamma * next_max[i] - z_old);
        q[i] += alpha * ((1.0 - sigma) * rewards[i] + sigma * z_old - q[i]);
    }
    state.n += 1;
}

/// Reference optima for error logging.
#[derive(Debug, Clone, PartialEq)]
pub struct QReference {
    pub q_exp: QTable,
    pub q_qh: QTable,
}

pub const QLEARN_METRICS: [&str; 2] = ["err_Z_sup", "err_Q_sup"];

#[derive(Debug, Clone)]
pub struct QLearnRun {
    pub state: QLearnState,
    pub log: ConvergenceLog,
    /// Greedy on the final `Q`: first-step policy.
    pub mu_hat: StationaryPolicy,
    /// Greedy on the final `Z`: stationary tail policy.
    pub pi_hat: StationaryPolicy,
}

/// Run `num_sweeps` sweeps from zero tables with a ChaCha8 stream seeded by `seed`.
pub fn run_qlearning<M: GenerativeModel + ?Sized>(
    model: &M,
    params: &DiscountParams,
    schedule: &StepSizeSchedule,
    num_sweeps: u64,
    seed: u64,
    reference: Option<&QReference>,
) -> QLearnRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = QLearnState::zeros(model.num_states(), model.num_actions());
    let mut log = ConvergenceLog::new(QLEARN_METRICS);
    for _ in 0..num_sweeps {
        qlearn_sweep(&mut state, model, params, schedule, &mut rng);
        if let Some(r) = reference {
            log.push(
                state.n,
                vec![state.z.sup_distance(&r.q_exp), state.q.sup_distance(&r.q_qh)],
            );
        }
    }
    QLearnRun {
        mu_hat: greedy_policy(&state.q),
        pi_hat: greedy_policy(&state.z),
        state,
        log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::TabularMdp;

    #[test]
    fn zero_step_leaves_tables() {
        let mdp = TabularMdp::with_tight_bound(1, 2, vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        let params = DiscountParams::new(0.3, 0.9).unwrap();
        let mut state = QLearnState {
            z: QTable::new(1, 2, vec![3.0, 4.0]).unwrap(),
            q: QTable::new(1, 2, vec![-1.0, 0.5]).unwrap(),
            n: 0,
        };
        let before = state.clone();
        qlearn_sweep_with_step(&mut state, &mdp, &params, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!((state.z, state.q), (before.z, before.q));
        assert_eq!(state.n, 1);
    }

    #[test]
    fn first_update_by_hand() {
        let mdp = TabularMdp::with_tight_bound(1, 1, vec![1.0], vec![1.0]).unwrap();
        let sigma = 0.3;
        let params = DiscountParams::new(sigma, 0.9).unwrap();
        let mut state = QLearnState::zeros(1, 1);
        qlearn_sweep(&mut state, &mdp, &params, &StepSizeSchedule::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(state.z.get(0, 0), 1.0);
        assert_eq!(state.q.get(0, 0), (1.0 - sigma) * 1.0);
    }

    #[test]
    fn zero_sweeps_returns_initial_state() {
        let mdp = TabularMdp::with_tight_bound(2, 2, vec![0.5; 8], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let params = DiscountParams::new(0.5, 0.5).unwrap();
        let run = run_qlearning(&mdp, &params, &StepSizeSchedule::default(), 0, 1, None);
        assert_eq!(run.state, QLearnState::zeros(2, 2));
        assert!(run.log.is_empty());
    }
}
