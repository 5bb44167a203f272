use thiserror::Error;

use crate::confirmation::{ln_choose, poisson_pmf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("parameter `{name}` out of range: {value}")]
    Parameter { name: &'static str, value: f64 },
}

fn check_beta(beta: f64) -> Result<(), AnalyticError> {
    if beta > 0.0 && beta < 0.5 {
        Ok(())
    } else {
        Err(AnalyticError::Parameter { name: "beta", value: beta })
    }
}

/// Probability that an adversary with hash-power share `beta` ever
/// overtakes a block buried under `k` honest blocks.
///
/// While the honest chain grows by `k` blocks the adversary's private chain
/// grows by a Poisson number of blocks with mean `k·β/(1−β)`; from a deficit
/// of `z` it catches up with probability `(β/(1−β))^z`.
pub fn nakamoto_reversal(k: u32, beta: f64) -> Result<f64, AnalyticError> {
    check_beta(beta)?;
    if k == 0 {
        return Err(AnalyticError::Parameter { name: "k", value: 0.0 });
    }
    let r = beta / (1.0 - beta);
    let lambda = k as f64 * r;
    let safe: f64 = (0..=k as u64).map(|j| poisson_pmf(j, lambda) * (1.0 - r.powi((k as u64 - j) as i32))).sum();
    Ok((1.0 - safe).clamp(0.0, 1.0))
}

/// `P[X ≥ ⌈m/2⌉]` for `X ~ Binomial(m, p)`: the chance that independent
/// per-chain reversals flip at least half of `m` votes.
pub fn prism_vote_aggregation(m: u32, p: f64) -> Result<f64, AnalyticError> {
    Ok(prism_vote_aggregation_ln(m, p)?.exp().min(1.0))
}

/// Natural logarithm of [`prism_vote_aggregation`], finite far below the
/// smallest positive `f64`.
pub fn prism_vote_aggregation_ln(m: u32, p: f64) -> Result<f64, AnalyticError> {
    if m == 0 {
        return Err(AnalyticError::Parameter { name: "m", value: 0.0 });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalyticError::Parameter { name: "p", value: p });
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let need = m.div_ceil(2) as u64;
    let m = m as u64;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let terms: Vec<f64> = (need..=m).map(|j| ln_choose(m, j) + j as f64 * lp + (m - j) as f64 * lq).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    Ok((max + sum.ln()).min(0.0))
}

/// Smallest depth whose reversal probability is at most `epsilon`.
pub fn auto_depth(beta: f64, epsilon: f64) -> Result<u32, AnalyticError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalyticError::Parameter { name: "epsilon", value: epsilon });
    }
    for k in 1..=10_000 {
        if nakamoto_reversal(k, beta)? <= epsilon {
            return Ok(k);
        }
    }
    Err(AnalyticError::Parameter { name: "epsilon", value: epsilon })
}
