//! Curve data for external plotting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baseline::{nakamoto_reversal, prism_vote_aggregation_ln};
use crate::config::{ExperimentConfig, Protocol, Scenario};
use crate::mining::Jitter;
use crate::netsim::{self, security_constraint, utilization_bound};

/// Reversal probability against confirmation depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRow {
    pub k: u32,
    /// One longest chain, `k` blocks deep.
    pub longest_chain: f64,
    /// Probability that at least half of `m` independent voter chains,
    /// each `k` deep, are reversed.
    pub prism: f64,
    pub longest_chain_log10: f64,
    pub prism_log10: f64,
}

/// Reliability of a `k`-deep block on one chain versus `k`-deep votes on
/// `m` chains, for every `k` in `ks`.
pub fn reliability_depth(beta: f64, m: u32, ks: impl IntoIterator<Item = u32>) -> Result<Vec<ReliabilityRow>, HarnessError> {
    let bad = |e: crate::baseline::AnalyticError| HarnessError::Parameter { name: "beta", reason: e.to_string() };
    ks.into_iter()
        .map(|k| {
            let single = nakamoto_reversal(k, beta).map_err(bad)?;
            let ln = prism_vote_aggregation_ln(m, single).map_err(bad)?;
            Ok(ReliabilityRow {
                k,
                longest_chain: single,
                prism: ln.exp(),
                longest_chain_log10: single.log10(),
                prism_log10: ln / std::f64::consts::LN_10,
            })
        })
        .collect()
}

/// Bandwidth utilization allowed by the security constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilizationRow {
    pub beta: f64,
    pub max_f_delta: f64,
    pub hops: f64,
    pub utilization: f64,
}

pub fn utilization(betas: &[f64], hops: f64) -> Result<Vec<UtilizationRow>, HarnessError> {
    betas
        .iter()
        .map(|&beta| {
            let f_delta = security_constraint(beta)?;
            Ok(UtilizationRow { beta, max_f_delta: f_delta, hops, utilization: utilization_bound(f_delta, hops)? })
        })
        .collect()
}

/// Shape of the jitter grid in a spam curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterFamily {
    /// Grid values are the maximum `J` of a uniform jitter on `[0, J]`.
    Uniform,
    /// Grid values are the rate `λ` of an exponential jitter.
    Exponential,
}

impl JitterFamily {
    pub fn jitter(self, param: f64) -> Jitter {
        match (self, param) {
            (_, p) if p <= 0.0 => Jitter::None,
            (JitterFamily::Uniform, max) => Jitter::Uniform { max },
            (JitterFamily::Exponential, rate) => Jitter::Exponential { mean: 1.0 / rate },
        }
    }
}

/// Spam reaching transaction blocks against jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamRow {
    pub param: f64,
    /// `1 − e^{−λΔ}` for exponential jitter; absent for uniform jitter.
    pub bound: Option<f64>,
    /// Mean over seeds of spam copies mined per set per victim.
    pub simulated: Option<f64>,
    /// The same, divided by its value without jitter.
    pub simulated_vs_no_jitter: Option<f64>,
}

/// Analytic bound for exponential jitter of rate `rate` and delay `delta`.
pub fn spam_bound(rate: f64, delta: f64) -> f64 {
    1.0 - (-rate * delta).exp()
}

/// Spam curve over `params`. With a `base` config whose scenario is spam,
/// each point is also simulated on every seed.
pub fn spam_jitter(
    family: JitterFamily,
    params: &[f64],
    delta: f64,
    base: Option<&ExperimentConfig>,
    seeds: &[u64],
) -> Result<Vec<SpamRow>, HarnessError> {
    let simulate = |jitter: Jitter| -> Result<f64, HarnessError> {
        let mut cfg = base.expect("checked").clone();
        cfg.jitter = jitter;
        let runs: Vec<f64> = seeds
            .par_iter()
            .map(|&s| netsim::run(&cfg, s).map(|o| o.report.spam.map_or(0.0, |sp| sp.normalized_by_victims)))
            .collect::<Result<_, _>>()?;
        Ok(runs.iter().sum::<f64>() / runs.len() as f64)
    };
    if let Some(cfg) = base {
        if cfg.protocol != Protocol::Prism || !matches!(cfg.adversary.scenario, Scenario::Spam { .. }) {
            return Err(HarnessError::Parameter { name: "scenario", reason: "spam curves need a prism spam scenario".into() });
        }
        if seeds.is_empty() {
            return Err(HarnessError::Parameter { name: "seeds", reason: "at least one seed is required".into() });
        }
    }
    let reference = base.map(|_| simulate(Jitter::None)).transpose()?;
    params
        .iter()
        .map(|&p| {
            let simulated = base.map(|_| simulate(family.jitter(p))).transpose()?;
            Ok(SpamRow {
                param: p,
                bound: (family == JitterFamily::Exponential).then(|| spam_bound(p, delta)),
                simulated,
                simulated_vs_no_jitter: match (simulated, reference) {
                    (Some(s), Some(r)) if r > 0.0 => Some(s / r),
                    _ => None,
                },
            })
        })
        .collect()
}
