mod common;

use common::{nakamoto_mc, vote_permanence_mc};
use prism_core::baseline::{auto_depth, nakamoto_reversal, prism_vote_aggregation, prism_vote_aggregation_ln};
use prism_core::confirmation::vote_permanence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

const TRIALS: u32 = 100_000;

fn within_3_sigma(analytic: f64, mc: f64) -> bool {
    let sigma = (analytic * (1.0 - analytic) / TRIALS as f64).sqrt();
    (analytic - mc).abs() <= 3.0 * sigma + 0.5 / TRIALS as f64
}

#[test]
fn vote_permanence_matches_race_simulation() {
    let mut failures = Vec::new();
    for (i, beta) in [0.2, 0.3].into_iter().enumerate() {
        for (j, adv) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            for d in 1..=6u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 * i as u64 + 100 * j as u64 + d);
                let analytic = vote_permanence(d, adv, beta).unwrap();
                let mc = vote_permanence_mc(d, adv, beta, TRIALS, &mut rng);
                if !within_3_sigma(analytic, mc) {
                    failures.push(format!("d={d} adv={adv} beta={beta}: analytic {analytic:.5} mc {mc:.5}"));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn nakamoto_matches_race_simulation() {
    for (i, (k, beta)) in [(1, 0.1), (2, 0.3), (6, 0.1), (6, 0.3), (12, 0.3), (24, 0.3)].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + i as u64);
        let analytic = nakamoto_reversal(k, beta).unwrap();
        let mc = nakamoto_mc(k, beta, TRIALS, &mut rng);
        assert!(within_3_sigma(analytic, mc), "k={k} beta={beta}: analytic {analytic} mc {mc}");
    }
}

#[test]
fn nakamoto_six_deep_over_a_million_races() {
    let trials = 1_000_000;
    for (i, beta) in [0.1, 0.3].into_iter().enumerate() {
        let analytic = nakamoto_reversal(6, beta).unwrap();
        let mc = nakamoto_mc(6, beta, trials, &mut ChaCha8Rng::seed_from_u64(900 + i as u64));
        let sigma = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        assert!((analytic - mc).abs() <= 3.0 * sigma + 0.5 / trials as f64, "beta={beta}: analytic {analytic} mc {mc}");
    }
}

#[test]
fn aggregation_matches_binomial_survival() {
    for (m, p) in [(1u32, 0.3), (10, 0.2), (101, 0.45), (1000, 0.45), (1000, 0.3), (2000, 0.45)] {
        let need = m.div_ceil(2) as u64;
        let oracle = Binomial::new(p, m as u64).unwrap().sf(need - 1);
        let ours = prism_vote_aggregation(m, p).unwrap();
        assert!((ours - oracle).abs() <= 1e-9 * oracle.max(1e-300) + 1e-300, "m={m} p={p}: {ours} vs {oracle}");
    }
}

#[test]
fn aggregation_log_stays_finite_deep_in_the_tail() {
    let ln = prism_vote_aggregation_ln(1000, 1e-6).unwrap();
    assert!(ln.is_finite() && ln < -5000.0);
    assert!((prism_vote_aggregation_ln(10, 0.2).unwrap().exp() - prism_vote_aggregation(10, 0.2).unwrap()).abs() < 1e-15);
}

#[test]
fn auto_depth_is_minimal() {
    for (beta, eps) in [(0.1, 1e-3), (0.3, 1e-3), (0.3, 1e-5), (0.4, 1e-2)] {
        let k = auto_depth(beta, eps).unwrap();
        assert!(nakamoto_reversal(k, beta).unwrap() <= eps);
        if k > 1 {
            assert!(nakamoto_reversal(k - 1, beta).unwrap() > eps);
        }
    }
}
