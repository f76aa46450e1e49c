use qh_core::env::{inventory_mdp, mc_qh_return, InventoryParams, McConfig, PolicySequence};
use qh_core::{
    eval_one_step_qh, eval_stationary_qh, exp_value_iteration, optimal_qh_solution,
    qh_value_from_exp_tail, DiscountParams, OneStepPolicy, SolverConfig, StationaryPolicy,
    TabularMdp,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// two-decimal printed values; exact cells can sit 0.01 away
const PRINTED_TOL: f64 = 0.01 + 1e-9;

fn setup() -> (TabularMdp, DiscountParams) {
    (
        inventory_mdp(&InventoryParams::default()).unwrap(),
        DiscountParams::new(0.3, 0.9).unwrap(),
    )
}

/// V_pi^gamma by truncated Neumann series, independent of the solver.
fn neumann_exp_value(mdp: &TabularMdp, gamma: f64, actions: &[usize]) -> Vec<f64> {
    let n = mdp.num_states();
    let mut total = vec![0.0; n];
    let mut term: Vec<f64> = (0..n).map(|s| mdp.reward(s, actions[s])).collect();
    for _ in 0..600 {
        for (t, x) in total.iter_mut().zip(&term) {
            *t += x;
        }
        term = (0..n)
            .map(|s| gamma * (0..n).map(|k| mdp.prob(s, actions[s], k) * term[k]).sum::<f64>())
            .collect();
    }
    total
}

fn all_deterministic(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..m.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let a = code % m;
                    code /= m;
                    a
                })
                .collect()
        })
        .collect()
}

#[test]
fn exponential_values_match_reference() {
    let (mdp, params) = setup();
    let sol = exp_value_iteration(&mdp, params.gamma(), &SolverConfig::default()).unwrap();
    assert!((sol.q.get(2, 0) - 44.50).abs() <= PRINTED_TOL);
    assert!((sol.q.get(0, 1) - 33.75).abs() <= PRINTED_TOL);
    assert_eq!(sol.q.greedy_actions(), vec![2, 1, 0]);
}

#[test]
fn optimal_pair_and_qh_values() {
    let (mdp, params) = setup();
    let sol = optimal_qh_solution(&mdp, &params, &SolverConfig::default()).unwrap();
    assert_eq!(sol.mu_star.as_deterministic().unwrap(), vec![1, 0, 0]);
    assert_eq!(sol.pi_star.as_deterministic().unwrap(), vec![2, 1, 0]);
    assert!((sol.q_qh.get(0, 1) - 11.38).abs() <= PRINTED_TOL);
    assert!((sol.q_qh.get(2, 0) - 20.55).abs() <= PRINTED_TOL);
    for s in 0..3 {
        for a in 0..3 {
            let via_exp = 0.7 * mdp.reward(s, a) + 0.3 * sol.q_exp.get(s, a);
            assert!((via_exp - sol.q_qh.get(s, a)).abs() < 1e-9);
        }
    }
}

#[test]
fn v_star_equals_best_of_all_deterministic_pairs() {
    let (mdp, params) = setup();
    let (sigma, gamma) = (params.sigma(), params.gamma());
    let mut best = [f64::NEG_INFINITY; 3];
    let policies = all_deterministic(3, 3);
    for tail in &policies {
        let v_tail = neumann_exp_value(&mdp, gamma, tail);
        for first in &policies {
            for s in 0..3 {
                let a = first[s];
                let cont: f64 = (0..3).map(|k| mdp.prob(s, a, k) * v_tail[k]).sum();
                best[s] = best[s].max(mdp.reward(s, a) + sigma * gamma * cont);
            }
        }
    }
    let sol = optimal_qh_solution(&mdp, &params, &SolverConfig::default()).unwrap();
    let from_tail = qh_value_from_exp_tail(&mdp, &params, &sol.mu_star, &sol.v_exp).unwrap();
    for s in 0..3 {
        assert!((from_tail[s] - best[s]).abs() < 1e-8, "state {s}: {} vs {}", from_tail[s], best[s]);
        assert!((sol.v_star[s] - best[s]).abs() < 1e-8);
    }
}

#[test]
fn random_deterministic_pairs_are_dominated() {
    let (mdp, params) = setup();
    let cfg = SolverConfig::default();
    let sol = optimal_qh_solution(&mdp, &params, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let mu: Vec<usize> = (0..3).map(|_| rng.gen_range(0..3)).collect();
        let pi: Vec<usize> = (0..3).map(|_| rng.gen_range(0..3)).collect();
        let policy = OneStepPolicy::new(
            StationaryPolicy::deterministic(&mu, 3).unwrap(),
            StationaryPolicy::deterministic(&pi, 3).unwrap(),
        )
        .unwrap();
        let v = eval_one_step_qh(&mdp, &params, &policy, &cfg).unwrap();
        for s in 0..3 {
            assert!(v[s] <= sol.v_star[s] + 1e-8, "mu={mu:?} pi={pi:?} s={s}");
        }
    }
}

#[test]
fn exact_evaluations_match_monte_carlo() {
    let (mdp, params) = setup();
    let cfg = SolverConfig::default();
    let sol = optimal_qh_solution(&mdp, &params, &cfg).unwrap();
    let model = InventoryParams::default();
    let mc = McConfig {
        horizon: 300,
        num_episodes: 100_000,
        max_bias: Some(1e-6),
    };

    let stationary = eval_stationary_qh(&mdp, &params, &sol.pi_star, &cfg).unwrap();
    let one_step = eval_one_step_qh(&mdp, &params, &sol.policy(), &cfg).unwrap();
    let cases = [
        (PolicySequence::new(vec![], sol.pi_star.clone()), &stationary),
        (PolicySequence::from(sol.policy()), &one_step),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (seq, exact) in &cases {
        for s in 0..3 {
            let est = mc_qh_return(&model, &params, seq, s, &mc, &mut rng).unwrap();
            assert!(
                est.contains(exact[s]),
                "state {s}: exact {} vs MC {} +- {}",
                exact[s],
                est.mean,
                est.tolerance_99()
            );
        }
    }
}
