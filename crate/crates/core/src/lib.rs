//! Tabular reinforcement learning under quasi-hyperbolic (QH) discounting for
//! precommitted agents.
//!
//! A QH agent weighs the reward `t` steps ahead by `1` at `t = 0` and by
//! `sigma * gamma^t` afterwards. Optimal behaviour is a *one-step
//! non-stationary* policy `(mu, pi, pi, ...)`: `pi` is the ordinary
//! `gamma`-optimal policy and `mu` is greedy on
//! `r(s, a) + sigma * gamma * E[V_*^gamma(s')]`.
//!
//! - [`dp`]: exact model-based solvers and the QH Bellman operator.
//! - [`policy_eval`]: model-free off-policy evaluation of `(mu, pi, pi, ...)`.
//! - [`qlearning`]: QH Q-learning on a generative model.
//! - [`env`]: inventory control, random MDPs and a Monte-Carlo return oracle.

pub mod discount;
pub mod dp;
pub mod env;
pub mod error;
pub mod log;
pub mod mdp;
pub mod model;
pub mod policy;
pub mod policy_eval;
pub mod qlearning;
pub mod schedule;
pub mod values;

pub use discount::{qh_weight, DiscountParams};
pub use dp::{
    eval_one_step_qh, eval_stationary_exp, eval_stationary_qh, exp_action_values,
    exp_value_iteration, optimal_qh_solution, qh_action_values, qh_bellman_operator,
    qh_value_from_exp_tail, EvalBackend, ExpSolution, QhSolution, SolverConfig,
};
pub use error::{Error, Result};
pub use log::ConvergenceLog;
pub use mdp::{validate_mdp, MdpSpec, TabularMdp, ValidationReport, Violation};
pub use model::{GenerativeModel, Transition};
pub use policy::{greedy_policy, OneStepPolicy, StationaryPolicy};
pub use policy_eval::{
    eval_sweep, importance_ratios, run_policy_eval, EvalProblem, EvalReference, EvalState,
};
pub use qlearning::{qlearn_sweep, run_qlearning, QLearnRun, QLearnState, QReference};
pub use schedule::StepSizeSchedule;
pub use values::{QTable, ValueVector};
