use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use qh_core::{
    optimal_qh_solution, run_policy_eval, run_qlearning, EvalProblem, EvalReference, OneStepPolicy,
    QReference, QTable, QhSolution, StationaryPolicy, ValueVector,
};

use crate::config::{ExperimentConfig, Scenario};
use crate::environment::{load_environment, LoadedEnvironment};
use crate::error::{CliError, Result};
use crate::table1::Comparison;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn actions(pi: &StationaryPolicy) -> Vec<usize> {
    pi.as_deterministic().expect("greedy policies are deterministic")
}

#[derive(Debug, Serialize)]
struct PolicyFile {
    mu_star: Vec<usize>,
    pi_star: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: QhSolution,
    /// Present when the environment is the reference inventory instance.
    pub comparison: Option<Comparison>,
}

impl SolveReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let sol = &self.solution;
        writeln!(out, "value iteration converged in {} iterations", sol.iterations).unwrap();
        writeln!(out, "mu*  = {:?}", actions(&sol.mu_star)).unwrap();
        writeln!(out, "pi*  = {:?}", actions(&sol.pi_star)).unwrap();
        writeln!(out, "V*   = {:?}", sol.v_star.as_slice()).unwrap();
        if let Some(cmp) = &self.comparison {
            out.push_str(&cmp.render());
        }
        out
    }
}

/// Exact two-stage solve; writes `q_exp.json`, `q_qh.json`, `v_star.json`
/// and `policies.json` to `out`.
pub fn solve_exact(cfg: &ExperimentConfig, out: &Path) -> Result<SolveReport> {
    let env = load_environment(cfg)?;
    let solution = optimal_qh_solution(&env.mdp, &cfg.discount, &cfg.solver)?;
    write_file(out, "q_exp.json", &to_json(&solution.q_exp))?;
    write_file(out, "q_qh.json", &to_json(&solution.q_qh))?;
    write_file(out, "v_star.json", &to_json(&solution.v_star))?;
    write_file(
        out,
        "policies.json",
        &to_json(&PolicyFile {
            mu_star: actions(&solution.mu_star),
            pi_star: actions(&solution.pi_star),
        }),
    )?;
    let comparison = env
        .is_reference_instance
        .then(|| Comparison::new(&solution.q_qh, &solution.q_exp));
    if let Some(cmp) = &comparison {
        write_file(out, "table1_comparison.txt", &cmp.render())?;
    }
    Ok(SolveReport {
        solution,
        comparison,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub mu_hat: Vec<usize>,
    pub pi_hat: Vec<usize>,
    pub matches: bool,
    pub final_err_z_sup: Option<f64>,
    pub final_err_q_sup: Option<f64>,
    #[serde(skip)]
    pub final_z: QTable,
    #[serde(skip)]
    pub final_q: QTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct QLearnReport {
    pub num_sweeps: u64,
    pub mu_star: Vec<usize>,
    pub pi_star: Vec<usize>,
    pub seeds: Vec<SeedOutcome>,
}

impl QLearnReport {
    pub fn matches(&self) -> usize {
        self.seeds.iter().filter(|s| s.matches).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "exact: mu* = {:?}, pi* = {:?}", self.mu_star, self.pi_star).unwrap();
        for s in &self.seeds {
            writeln!(
                out,
                "seed {:>4}: mu_hat = {:?}, pi_hat = {:?}, match = {}, |Z - Q_exp|_inf = {}",
                s.seed,
                s.mu_hat,
                s.pi_hat,
                s.matches,
                s.final_err_z_sup.map_or("-".into(), |e| format!("{e:.4}"))
            )
            .unwrap();
        }
        writeln!(out, "{}/{} seeds recovered the exact policy pair", self.matches(), self.seeds.len()).unwrap();
        out
    }
}

/// QH Q-learning per seed; writes one CSV per seed and `qlearn_summary.json`.
pub fn qlearn(cfg: &ExperimentConfig, out: &Path, seed_override: Option<u64>) -> Result<QLearnReport> {
    let seeds = cfg.seeds(seed_override)?;
    let env = load_environment(cfg)?;
    let exact = optimal_qh_solution(&env.mdp, &cfg.discount, &cfg.solver)?;
    let reference = QReference {
        q_exp: exact.q_exp.clone(),
        q_qh: exact.q_qh.clone(),
    };
    let (mu_star, pi_star) = (actions(&exact.mu_star), actions(&exact.pi_star));
    let num_sweeps = cfg.algorithm.num_sweeps;

    let runs: Vec<_> = seeds
        .par_iter()
        .map(|&seed| {
            let run = run_qlearning(&env.model, &cfg.discount, &cfg.algorithm.schedule, num_sweeps, seed, Some(&reference));
            (seed, run)
        })
        .collect();

    let mut outcomes = Vec::with_capacity(runs.len());
    for (seed, run) in runs {
        write_file(out, &cfg.output.qlearn_file(seed), &run.log.to_csv_string())?;
        let (mu_hat, pi_hat) = (actions(&run.mu_hat), actions(&run.pi_hat));
        let last = run.log.last();
        outcomes.push(SeedOutcome {
            seed,
            matches: num_sweeps > 0 && mu_hat == mu_star && pi_hat == pi_star,
            mu_hat,
            pi_hat,
            final_err_z_sup: last.map(|r| r.errors[0]),
            final_err_q_sup: last.map(|r| r.errors[1]),
            final_z: run.state.z,
            final_q: run.state.q,
        });
    }
    let report = QLearnReport {
        num_sweeps,
        mu_star,
        pi_star,
        seeds: outcomes,
    };
    write_file(out, "qlearn_summary.json", &to_json(&report))?;
    Ok(report)
}

/// Behavior and target policies for a scenario preset.
pub fn scenario_policies(
    scenario: Scenario,
    exact: &QhSolution,
) -> qh_core::Result<(StationaryPolicy, OneStepPolicy)> {
    let uniform = StationaryPolicy::uniform(exact.mu_star.num_states(), exact.mu_star.num_actions())?;
    let target = match scenario {
        Scenario::FullyOffPolicy => OneStepPolicy::new(exact.mu_star.clone(), exact.pi_star.clone())?,
        Scenario::OffPolicyInitial => OneStepPolicy::new(exact.mu_star.clone(), uniform.clone())?,
        Scenario::OffPolicyStationary => OneStepPolicy::new(uniform.clone(), exact.pi_star.clone())?,
    };
    Ok((uniform, target))
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSeedOutcome {
    pub seed: u64,
    pub final_err_w_l2: Option<f64>,
    pub final_err_v_l2: Option<f64>,
    pub final_w: ValueVector,
    pub final_v: ValueVector,
    /// `err_V_l2` at sweep 1000, when the run got that far.
    pub err_v_l2_at_1000: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub scenario: String,
    pub num_sweeps: u64,
    pub rho_max_tail: f64,
    pub rho_max_initial: f64,
    pub reference_w: ValueVector,
    pub reference_v: ValueVector,
    pub seeds: Vec<EvalSeedOutcome>,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "scenario {}: {} sweeps", self.scenario, self.num_sweeps).unwrap();
        writeln!(out, "rho_max: tail {:.3}, initial {:.3}", self.rho_max_tail, self.rho_max_initial).unwrap();
        writeln!(out, "V reference = {:?}", self.reference_v.as_slice()).unwrap();
        for s in &self.seeds {
            writeln!(
                out,
                "seed {:>4}: |W - W*|_2 = {}, |V - V*|_2 = {}",
                s.seed,
                s.final_err_w_l2.map_or("-".into(), |e| format!("{e:.4}")),
                s.final_err_v_l2.map_or("-".into(), |e| format!("{e:.4}"))
            )
            .unwrap();
        }
        out
    }
}

fn eval_target(
    cfg: &ExperimentConfig,
    env: &LoadedEnvironment,
) -> Result<(String, StationaryPolicy, OneStepPolicy)> {
    if let Some(p) = &cfg.algorithm.policies {
        let target = OneStepPolicy::new(p.initial.clone(), p.tail.clone())?;
        return Ok(("explicit".into(), p.behavior.clone(), target));
    }
    let scenario = cfg.algorithm.scenario.ok_or_else(|| {
        CliError::InvalidConfig("eval-policy needs algorithm.scenario or algorithm.policies".into())
    })?;
    let exact = optimal_qh_solution(&env.mdp, &cfg.discount, &cfg.solver)?;
    let (behavior, target) = scenario_policies(scenario, &exact)?;
    Ok((scenario.name().into(), behavior, target))
}

/// Off-policy evaluation per seed; writes `sweep,err_W_l2,err_V_l2` CSVs and
/// `eval_summary.json`.
pub fn eval_policy(cfg: &ExperimentConfig, out: &Path, seed_override: Option<u64>) -> Result<EvalReport> {
    let seeds = cfg.seeds(seed_override)?;
    let env = load_environment(cfg)?;
    let (name, behavior, target) = eval_target(cfg, &env)?;
    let problem = EvalProblem::new(&env.model, behavior, target.clone(), cfg.discount, cfg.algorithm.schedule, seeds[0])
        .map_err(|e| match e {
            qh_core::Error::CoverageViolation { .. } => CliError::Coverage(e),
            other => CliError::Solver(other),
        })?;
    let reference = EvalReference::exact(&env.mdp, &cfg.discount, &target, &cfg.solver)?;
    let num_sweeps = cfg.algorithm.num_sweeps;

    let runs: Vec<_> = seeds
        .par_iter()
        .map(|&seed| (seed, run_policy_eval(&problem.with_seed(seed), num_sweeps, Some(&reference))))
        .collect();

    let mut outcomes = Vec::with_capacity(runs.len());
    for (seed, (state, log)) in runs {
        write_file(out, &cfg.output.eval_file(&name, seed), &log.to_csv_string())?;
        let last = log.last();
        outcomes.push(EvalSeedOutcome {
            seed,
            final_err_w_l2: last.map(|r| r.errors[0]),
            final_err_v_l2: last.map(|r| r.errors[1]),
            err_v_l2_at_1000: log.at_sweep(1000).map(|r| r.errors[1]),
            final_w: state.w,
            final_v: state.v,
        });
    }
    let report = EvalReport {
        scenario: name,
        num_sweeps,
        rho_max_tail: problem.tail_ratios().max(),
        rho_max_initial: problem.initial_ratios().max(),
        reference_w: reference.tail,
        reference_v: reference.one_step,
        seeds: outcomes,
    };
    write_file(out, "eval_summary.json", &to_json(&report))?;
    Ok(report)
}
