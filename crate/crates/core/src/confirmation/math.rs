//! Numerical kernels: Poisson terms in log space, vote permanence and the
//! Gaussian tail quantiles used for confidence bounds.

use serde::{Deserialize, Serialize};

use super::ConfirmationError;

/// `ln(n!)`, exact summation for small `n` and a Stirling series beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + inv / 12.0 - inv * inv2 / 360.0
        + inv * inv2 * inv2 / 1260.0
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Poisson probability mass `P[X = k]` for mean `lambda`, computed in log
/// space so that large `k` or `lambda` neither overflows nor underflows early.
pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + k as f64 * lambda.ln() - ln_factorial(k)).exp()
}

/// Expected number of private adversarial blocks on a voter chain while the
/// honest chain grew by `mean_depth` blocks:
/// `d̄_A = β d̄ / ((1 − α)(1 − β))`, with `α` the honest forking rate.
pub fn adversary_depth(mean_depth: f64, fork_rate: f64, beta: f64) -> Result<f64, ConfirmationError> {
    check_beta(beta)?;
    if !(0.0..1.0).contains(&fork_rate) {
        return Err(ConfirmationError::Parameter { name: "fork_rate", value: fork_rate });
    }
    if !(mean_depth >= 0.0 && mean_depth.is_finite()) {
        return Err(ConfirmationError::Parameter { name: "mean_depth", value: mean_depth });
    }
    Ok(beta * mean_depth / ((1.0 - fork_rate) * (1.0 - beta)))
}

pub(crate) fn check_beta(beta: f64) -> Result<(), ConfirmationError> {
    if beta > 0.0 && beta < 0.5 {
        Ok(())
    } else {
        Err(ConfirmationError::Parameter { name: "beta", value: beta })
    }
}

/// Probability that a vote at depth `depth` is never removed by a private
/// chain, when the adversary's head start is Poisson with mean `adv_depth`
/// and it then races at relative rate `r = β / (1 − β)`:
///
/// `P = Σ_{k=0}^{d} f_Pois(k; d̄_A) (1 − r^{d+1−k})`.
pub fn vote_permanence(depth: u64, adv_depth: f64, beta: f64) -> Result<f64, ConfirmationError> {
    check_beta(beta)?;
    if depth == 0 {
        return Err(ConfirmationError::Parameter { name: "depth", value: 0.0 });
    }
    if !(adv_depth >= 0.0 && adv_depth.is_finite()) {
        return Err(ConfirmationError::Parameter { name: "adv_depth", value: adv_depth });
    }
    let r = beta / (1.0 - beta);
    let p: f64 = (0..=depth)
        .map(|k| poisson_pmf(k, adv_depth) * (1.0 - r.powi((depth + 1 - k) as i32)))
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// How the Gaussian tail quantile is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMode {
    /// `sqrt(ln(1/ε²) − ln ln(1/ε²) − ln 2π)`; an error when the radicand is
    /// not positive.
    ClosedForm,
    /// The inverse normal CDF `Φ⁻¹(1 − ε)`.
    Exact,
    /// Closed form when valid, otherwise exact.
    #[default]
    Auto,
}

/// Closed-form tail quantile, or `None` when `ε` is too large for it.
pub fn closed_form_quantile(epsilon: f64) -> Option<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return None;
    }
    let l = (1.0 / (epsilon * epsilon)).ln();
    if l <= 1.0 {
        return None;
    }
    let w = l - l.ln() - (2.0 * std::f64::consts::PI).ln();
    (w > 0.0).then(|| w.sqrt())
}

/// `Φ⁻¹(1 − ε)` via Acklam's rational approximation (relative error below
/// 1.2e-9).
pub fn exact_quantile(epsilon: f64) -> f64 {
    inverse_normal_cdf(1.0 - epsilon)
}

pub fn quantile(epsilon: f64, mode: QuantileMode) -> Result<f64, ConfirmationError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(ConfirmationError::Parameter { name: "epsilon", value: epsilon });
    }
    match mode {
        QuantileMode::ClosedForm => closed_form_quantile(epsilon).ok_or(ConfirmationError::ClosedFormInvalid { epsilon }),
        QuantileMode::Exact => Ok(exact_quantile(epsilon)),
        QuantileMode::Auto => Ok(closed_form_quantile(epsilon).unwrap_or_else(|| exact_quantile(epsilon))),
    }
}

fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const LOW: f64 = 0.02425;
    if p < LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_direct_sum_at_the_seam() {
        for n in [31u64, 32, 33, 100, 500] {
            let direct: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
            assert!((ln_factorial(n) - direct).abs() < 1e-9 * direct.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn closed_form_quantile_values() {
        assert!((closed_form_quantile(1e-3).unwrap() - 3.058).abs() < 1e-3);
        assert!((closed_form_quantile(1e-6).unwrap() - 4.741).abs() < 1e-3);
        assert_eq!(closed_form_quantile(0.3), None);
    }

    #[test]
    fn exact_quantile_values() {
        assert!((exact_quantile(1e-3) - 3.090_232_306).abs() < 1e-6);
        assert!((exact_quantile(0.025) - 1.959_963_985).abs() < 1e-6);
        assert!((exact_quantile(1e-6) - 4.753_424_309).abs() < 1e-6);
    }

    #[test]
    fn closed_form_errors_when_invalid() {
        assert!(matches!(quantile(0.3, QuantileMode::ClosedForm), Err(ConfirmationError::ClosedFormInvalid { .. })));
        assert!((quantile(0.3, QuantileMode::Auto).unwrap() - exact_quantile(0.3)).abs() < 1e-12);
    }

    #[test]
    fn permanence_zero_head_start_is_gamblers_ruin() {
        let beta = 0.3f64;
        let r = beta / (1.0 - beta);
        for d in 1..7u64 {
            let p = vote_permanence(d, 0.0, beta).unwrap();
            assert!((p - (1.0 - r.powi(d as i32 + 1))).abs() < 1e-12);
        }
    }

    #[test]
    fn adversary_depth_example() {
        let v = adversary_depth(10.0, 0.0, 0.25).unwrap();
        assert!((v - 10.0 / 3.0).abs() < 1e-12);
        assert!(adversary_depth(1.0, 0.0, 0.5).is_err());
    }
    #[test]
    fn adversary_depth_substitutions() {
        assert!((adversary_depth(2.0, 0.0, 0.3).unwrap() - 0.6 / 0.7).abs() < 1e-12);
        assert!((adversary_depth(2.0, 0.1, 0.3).unwrap() - 0.6 / (0.9 * 0.7)).abs() < 1e-12);
        assert!(adversary_depth(2.0, 0.0, 1e-12).unwrap() < 1e-11);
    }

    #[test]
    fn permanence_without_adversary_is_poisson_cdf() {
        use statrs::distribution::{DiscreteCDF, Poisson};
        for (d, adv) in [(1u64, 0.5), (3, 2.0), (6, 1.0)] {
            let p = vote_permanence(d, adv, 1e-9).unwrap();
            let cdf = Poisson::new(adv).unwrap().cdf(d);
            assert!((p - cdf).abs() < 1e-6, "d={d} adv={adv}: {p} vs {cdf}");
        }
    }

    #[test]
    fn gaussian_lower_bound_close_to_exact_quantile() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let (mu, sigma) = (100.0, 5.0);
        let exact = Normal::new(mu, sigma).unwrap().inverse_cdf(1e-3);
        let approx = mu - closed_form_quantile(1e-3).unwrap() * sigma;
        assert!((approx - exact).abs() < 0.5, "{approx} vs {exact}");
    }
}
