use qh_core::env::{inventory_mdp, InventoryParams};
use qh_core::policy_eval::{importance_ratios, EvalReference};
use qh_core::{
    optimal_qh_solution, run_policy_eval, DiscountParams, EvalProblem, OneStepPolicy, QhSolution,
    SolverConfig, StationaryPolicy, StepSizeSchedule, TabularMdp,
};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn setup() -> (InventoryParams, TabularMdp, DiscountParams, QhSolution) {
    let model = InventoryParams::default();
    let mdp = inventory_mdp(&model).unwrap();
    let params = DiscountParams::new(0.3, 0.9).unwrap();
    let sol = optimal_qh_solution(&mdp, &params, &SolverConfig::default()).unwrap();
    (model, mdp, params, sol)
}

fn uniform() -> StationaryPolicy {
    StationaryPolicy::uniform(3, 3).unwrap()
}

#[test]
fn initial_ratio_max_for_optimal_first_step() {
    let (_, _, _, sol) = setup();
    let r = importance_ratios(&uniform(), &sol.mu_star).unwrap();
    assert!((r.max() - 3.0).abs() < 1e-12);
}

#[test]
fn identical_seeds_are_bit_identical() {
    let (model, _, params, sol) = setup();
    let problem = EvalProblem::new(&model, uniform(), sol.policy(), params, StepSizeSchedule::default(), 42).unwrap();
    let (a, _) = run_policy_eval(&problem, 5_000, None);
    let (b, _) = run_policy_eval(&problem, 5_000, None);
    assert_eq!(a, b);
    let (c, _) = run_policy_eval(&problem.with_seed(43), 5_000, None);
    assert_ne!(a, c);
}

/// Mean (over seeds) error at sweeps 10, 100, ..., 10^5 must not increase.
fn assert_decade_decay(model: &InventoryParams, mdp: &TabularMdp, params: DiscountParams, behavior: StationaryPolicy, target: OneStepPolicy) {
    let reference = EvalReference::exact(mdp, &params, &target, &SolverConfig::default()).unwrap();
    let problem = EvalProblem::new(model, behavior, target, params, StepSizeSchedule::default(), 0).unwrap();
    let checkpoints = [10u64, 100, 1_000, 10_000, 100_000];
    let mut means = [0.0; 5];
    for seed in SEEDS {
        let (_, log) = run_policy_eval(&problem.with_seed(seed), 100_000, Some(&reference));
        assert_eq!(log.len(), 100_000);
        for (m, &k) in means.iter_mut().zip(&checkpoints) {
            *m += log.at_sweep(k).unwrap().errors[1] / SEEDS.len() as f64;
        }
    }
    eprintln!("decade means {means:?}");
    for w in means.windows(2) {
        assert!(w[1] <= w[0], "mean errors by decade {means:?}");
    }
}

#[test]
fn decade_decay_in_all_scenarios() {
    let (model, mdp, params, sol) = setup();
    let targets = [
        sol.policy(),
        OneStepPolicy::new(sol.mu_star.clone(), uniform()).unwrap(),
        OneStepPolicy::new(uniform(), sol.pi_star.clone()).unwrap(),
    ];
    for target in targets {
        assert_decade_decay(&model, &mdp, params, uniform(), target);
    }
}

#[test]
fn on_policy_uniform_target_converges() {
    let (model, mdp, params, _) = setup();
    let target = OneStepPolicy::stationary(uniform());
    assert_decade_decay(&model, &mdp, params, uniform(), target.clone());

    let reference = EvalReference::exact(&mdp, &params, &target, &SolverConfig::default()).unwrap();
    let problem = EvalProblem::new(&model, uniform(), target, params, StepSizeSchedule::default(), 0).unwrap();
    for seed in SEEDS {
        let (state, log) = run_policy_eval(&problem.with_seed(seed), 200_000, Some(&reference));
        // on-policy: both iterates see the same targets with unit weights
        assert_eq!(state.w, state.v);
        let early = log.at_sweep(1_000).unwrap().errors[1];
        let last = log.last().unwrap().errors[1];
        assert!(last < early, "seed {seed}: {early} -> {last}");
        assert!(last < 1.0, "seed {seed}: final L2 error {last}");
    }
}

#[test]
fn coverage_is_checked_before_running() {
    let (model, _, params, sol) = setup();
    let behavior = StationaryPolicy::from_rows(&[
        vec![0.5, 0.0, 0.5],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    ])
    .unwrap();
    let err = EvalProblem::new(&model, behavior, sol.policy(), params, StepSizeSchedule::default(), 0).unwrap_err();
    assert_eq!(err, qh_core::Error::CoverageViolation { state: 0, action: 1, target: 1.0 });
}
