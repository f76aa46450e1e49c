//! Config-driven experiment runner: exact solve with the reference-table check,
//! QH Q-learning over several seeds, and off-policy evaluation scenarios with
//! per-sweep convergence CSVs.

pub mod commands;
pub mod config;
pub mod environment;
pub mod error;
pub mod table1;

pub use commands::{eval_policy, qlearn, solve_exact, EvalReport, QLearnReport, SolveReport};
pub use config::{ExperimentConfig, Scenario};
pub use error::{CliError, Result};
