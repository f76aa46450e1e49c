use rand::Rng;

use qh_core::env::{inventory_mdp, random_mdp, InventoryParams};
use qh_core::{GenerativeModel, TabularMdp, Transition};

use crate::config::{EnvironmentSource, ExperimentConfig};
use crate::error::{CliError, Result};

/// Sampling side of a configured environment.
#[derive(Debug, Clone)]
pub enum EnvModel {
    /// Demand-driven sampled rewards.
    Inventory(InventoryParams),
    /// Expected rewards emitted deterministically.
    Tabular(TabularMdp),
}

impl GenerativeModel for EnvModel {
    fn num_states(&self) -> usize {
        match self {
            EnvModel::Inventory(p) => p.num_states(),
            EnvModel::Tabular(m) => GenerativeModel::num_states(m),
        }
    }

    fn num_actions(&self) -> usize {
        match self {
            EnvModel::Inventory(p) => p.num_actions(),
            EnvModel::Tabular(m) => GenerativeModel::num_actions(m),
        }
    }

    fn reward_bound(&self) -> f64 {
        match self {
            EnvModel::Inventory(p) => p.reward_bound(),
            EnvModel::Tabular(m) => GenerativeModel::reward_bound(m),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Transition {
        match self {
            EnvModel::Inventory(p) => p.sample(s, a, rng),
            EnvModel::Tabular(m) => m.sample(s, a, rng),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedEnvironment {
    /// Expected-reward model for the exact solvers.
    pub mdp: TabularMdp,
    pub model: EnvModel,
    /// True for the default inventory instance with `sigma = 0.3, gamma = 0.9`.
    pub is_reference_instance: bool,
}

pub fn load_environment(cfg: &ExperimentConfig) -> Result<LoadedEnvironment> {
    let source = cfg.environment_source().map_err(CliError::InvalidConfig)?;
    let is_reference_instance = matches!(&source, EnvironmentSource::Inventory(p) if *p == InventoryParams::default())
        && cfg.discount.sigma() == 0.3
        && cfg.discount.gamma() == 0.9;
    let (mdp, model) = match source {
        EnvironmentSource::Inventory(params) => (inventory_mdp(&params)?, EnvModel::Inventory(params)),
        EnvironmentSource::Random(spec) => {
            let mdp = random_mdp(&spec).map_err(|e| CliError::InvalidConfig(format!("environment.random: {e}")))?;
            (mdp.clone(), EnvModel::Tabular(mdp))
        }
        EnvironmentSource::MdpFile(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let mdp: TabularMdp = serde_json::from_str(&text).map_err(|e| CliError::Config {
                path: path.clone(),
                message: e.to_string(),
            })?;
            (mdp.clone(), EnvModel::Tabular(mdp))
        }
    };
    Ok(LoadedEnvironment {
        mdp,
        model,
        is_reference_instance,
    })
}
