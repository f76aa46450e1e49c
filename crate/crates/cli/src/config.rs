//! TOML experiment configuration. The schema is documented in `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qh_core::env::{InventoryParams, RandomMdpSpec};
use qh_core::{DiscountParams, SolverConfig, StationaryPolicy, StepSizeSchedule};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentConfig,
    pub discount: DiscountParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory that relative paths in the file resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Exactly one of the three sources must be present.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub inventory: Option<InventoryParams>,
    pub random: Option<RandomMdpSpec>,
    pub mdp_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSource {
    Inventory(InventoryParams),
    Random(RandomMdpSpec),
    MdpFile(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Behavior uniform, target `(mu*, pi*)`.
    FullyOffPolicy,
    /// Behavior uniform, target `(mu*, uniform)`.
    OffPolicyInitial,
    /// Behavior uniform, target `(uniform, pi*)`.
    OffPolicyStationary,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::FullyOffPolicy,
        Scenario::OffPolicyInitial,
        Scenario::OffPolicyStationary,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::FullyOffPolicy => "fully-off-policy",
            Scenario::OffPolicyInitial => "off-policy-initial",
            Scenario::OffPolicyStationary => "off-policy-stationary",
        }
    }
}

/// Explicit behavior and target policies for `eval-policy`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitPolicies {
    pub behavior: StationaryPolicy,
    pub initial: StationaryPolicy,
    pub tail: StationaryPolicy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmConfig {
    pub schedule: StepSizeSchedule,
    pub num_sweeps: u64,
    pub seeds: Vec<u64>,
    pub scenario: Option<Scenario>,
    pub policies: Option<ExplicitPolicies>,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            schedule: StepSizeSchedule::default(),
            num_sweeps: 200_000,
            seeds: vec![1, 2, 3, 4, 5],
            scenario: None,
            policies: None,
        }
    }
}

/// File names may contain `{seed}` and `{scenario}` placeholders.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub qlearn_csv: String,
    pub eval_csv: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            qlearn_csv: "qlearn_seed{seed}.csv".into(),
            eval_csv: "eval_{scenario}_seed{seed}.csv".into(),
        }
    }
}

impl OutputConfig {
    pub fn qlearn_file(&self, seed: u64) -> String {
        self.qlearn_csv.replace("{seed}", &seed.to_string())
    }

    pub fn eval_file(&self, scenario: &str, seed: u64) -> String {
        self.eval_csv
            .replace("{scenario}", scenario)
            .replace("{seed}", &seed.to_string())
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.environment_source()?;
        self.solver.validate().map_err(|e| format!("solver: {e}"))?;
        if self.algorithm.scenario.is_some() && self.algorithm.policies.is_some() {
            return Err("algorithm: give either `scenario` or `policies`, not both".into());
        }
        Ok(())
    }

    pub fn environment_source(&self) -> std::result::Result<EnvironmentSource, String> {
        let env = &self.environment;
        let given = [env.inventory.is_some(), env.random.is_some(), env.mdp_file.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(format!(
                "environment: exactly one of `inventory`, `random`, `mdp_file` is required, found {given}"
            ));
        }
        Ok(if let Some(p) = &env.inventory {
            EnvironmentSource::Inventory(p.clone())
        } else if let Some(r) = &env.random {
            EnvironmentSource::Random(r.clone())
        } else {
            EnvironmentSource::MdpFile(self.base_dir.join(env.mdp_file.as_ref().unwrap()))
        })
    }

    /// Seeds for stochastic runs, after an optional override.
    pub fn seeds(&self, seed_override: Option<u64>) -> Result<Vec<u64>> {
        let seeds = match seed_override {
            Some(s) => vec![s],
            None => self.algorithm.seeds.clone(),
        };
        if seeds.is_empty() {
            return Err(CliError::InvalidConfig("algorithm.seeds must not be empty".into()));
        }
        Ok(seeds)
    }

    /// The shipped inventory experiment.
    pub fn reference() -> Self {
        Self {
            environment: EnvironmentConfig {
                inventory: Some(InventoryParams::default()),
                ..Default::default()
            },
            discount: DiscountParams::new(0.3, 0.9).expect("valid"),
            solver: SolverConfig::default(),
            algorithm: AlgorithmConfig::default(),
            output: OutputConfig::default(),
            base_dir: PathBuf::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[environment.inventory]
capacity = 2
unit_cost = 5.0
holding_cost = 2.0
price = 9.0
demand_pmf = [0.2, 0.3, 0.5]

[discount]
sigma = 0.3
gamma = 0.9
"#;

    #[test]
    fn minimal_uses_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.algorithm.num_sweeps, 200_000);
        assert_eq!(cfg.algorithm.seeds.len(), 5);
        assert_eq!(
            cfg.environment_source().unwrap(),
            EnvironmentSource::Inventory(InventoryParams::default())
        );
        assert_eq!(cfg.output.eval_file("fully-off-policy", 3), "eval_fully-off-policy_seed3.csv");
    }

    #[test]
    fn gamma_one_rejected_with_location() {
        let err = ExperimentConfig::from_toml_str(&MINIMAL.replace("gamma = 0.9", "gamma = 1.0")).unwrap_err();
        assert!(err.contains("gamma"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn two_environments_rejected() {
        let text = format!("{MINIMAL}\n[environment.random]\nnum_states = 2\nnum_actions = 2\nreward_range = [0.0, 1.0]\nseed = 1\n");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.contains("exactly one"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = ExperimentConfig::from_toml_str(&format!("{MINIMAL}\n[algorithm]\nnum_sweep = 3\n")).unwrap_err();
        assert!(err.contains("num_sweep"), "{err}");
    }

    #[test]
    fn scenario_names() {
        let cfg = ExperimentConfig::from_toml_str(&format!(
            "{MINIMAL}\n[algorithm]\nscenario = \"off-policy-initial\"\nseeds = []\n"
        ))
        .unwrap();
        assert_eq!(cfg.algorithm.scenario, Some(Scenario::OffPolicyInitial));
        assert!(cfg.seeds(None).is_err());
        assert_eq!(cfg.seeds(Some(9)).unwrap(), vec![9]);
    }
}
