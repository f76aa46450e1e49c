use qh_core::env::{inventory_mdp, inventory_sample, InventoryParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 1_000_000;

/// Upper 0.001 quantiles of chi-squared with 1..=4 degrees of freedom.
const CHI2_999: [f64; 4] = [10.828, 13.816, 16.266, 18.467];

#[test]
fn sampled_reward_mean_matches_expectation() {
    let params = InventoryParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..DRAWS {
        let r = inventory_sample(&params, 2, 0, &mut rng).reward;
        sum += r;
        sum_sq += r * r;
    }
    let n = DRAWS as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean) * n / (n - 1.0) / n).sqrt();
    assert!((mean - 10.3).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn sampled_transitions_fit_kernel() {
    let params = InventoryParams::default();
    let mdp = inventory_mdp(&params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for s in 0..3 {
        for a in 0..3 {
            let row = mdp.transition_row(s, a);
            let mut counts = [0usize; 3];
            for _ in 0..DRAWS {
                counts[inventory_sample(&params, s, a, &mut rng).next_state] += 1;
            }
            let support: Vec<usize> = (0..3).filter(|&k| row[k] > 0.0).collect();
            for k in 0..3 {
                if row[k] == 0.0 {
                    assert_eq!(counts[k], 0);
                }
            }
            if support.len() < 2 {
                continue;
            }
            let chi2: f64 = support
                .iter()
                .map(|&k| {
                    let expected = row[k] * DRAWS as f64;
                    (counts[k] as f64 - expected).powi(2) / expected
                })
                .sum();
            assert!(chi2 < CHI2_999[support.len() - 2], "(s={s}, a={a}) chi2 {chi2}");
        }
    }
}
