//! Vote-based confirmation and ledger formation.
//!
//! For each proposer level the votes on the voter chains' longest chains are
//! tallied with their depths. Each vote is permanent with a probability
//! given by [`vote_permanence`]; summing these gives a Gaussian estimate of
//! each candidate's eventual vote count, from which a lower bound `⌊v_i⌋` at
//! confidence `1 − ε` follows. Votes not yet accounted for are assumed to go
//! to an unseen private block, with upper bound `⌈v_A⌉ = m − Σ ⌊v_i⌋`.
//!
//! A leader is confirmed when its lower bound beats every other upper bound.
//! A weaker rule confirms a *set* of possible leaders, which is enough for
//! fast transaction confirmation by list decoding.

mod ledger;
mod math;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ledger::{
    build_ledger, confirmed_leaders, confirmed_ledger, is_tx_confirmed, LedgerCursor, LedgerError,
    MAX_LIST_DECODING_LEDGERS,
};
pub use math::{
    adversary_depth, closed_form_quantile, exact_quantile, ln_choose, ln_factorial, poisson_pmf, quantile,
    vote_permanence, QuantileMode,
};

use crate::chain::ChainState;
use crate::digest::Digest;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfirmationError {
    #[error("parameter `{name}` out of range: {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("closed-form quantile is undefined for epsilon = {epsilon}; use QuantileMode::Exact")]
    ClosedFormInvalid { epsilon: f64 },
}

/// Security parameters of the confirmation rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfirmationParams {
    pub beta: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub quantile: QuantileMode,
}

impl ConfirmationParams {
    pub fn new(beta: f64, epsilon: f64) -> Self {
        ConfirmationParams { beta, epsilon, quantile: QuantileMode::Auto }
    }
}

/// One proposer block and the depths of its votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub block: Digest,
    pub depths: Vec<u64>,
}

/// Votes on one proposer level as seen by one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteTally {
    pub level: u64,
    pub candidates: Vec<Candidate>,
    pub fork_rate: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub voter_chains: u32,
}

impl VoteTally {
    /// Mean depth over all tallied votes; zero when there are none.
    pub fn mean_depth(&self) -> f64 {
        let (sum, n) = self
            .candidates
            .iter()
            .flat_map(|c| c.depths.iter())
            .fold((0u64, 0u64), |(s, n), d| (s + d, n + 1));
        if n == 0 {
            0.0
        } else {
            sum as f64 / n as f64
        }
    }

    pub fn vote_count(&self) -> usize {
        self.candidates.iter().map(|c| c.depths.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateBounds {
    pub block: Digest,
    pub votes: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBounds {
    pub candidates: Vec<CandidateBounds>,
    pub private_upper: f64,
    pub mean_depth: f64,
    pub adversary_depth: f64,
    pub quantile: f64,
}

/// Collects the votes on `level` from `state`'s voter chains, using the
/// state's current voter forking rate as `α`.
pub fn tally_level(state: &ChainState, level: u64, params: &ConfirmationParams) -> VoteTally {
    let mut candidates: Vec<Candidate> =
        state.proposers_at(level).iter().map(|d| Candidate { block: *d, depths: Vec::new() }).collect();
    for chain in 0..state.voter_chains() {
        if let Some((d, depth)) = state.vote_and_depth(chain, level) {
            if let Some(c) = candidates.iter_mut().find(|c| c.block == d) {
                c.depths.push(depth);
            }
        }
    }
    VoteTally {
        level,
        candidates,
        fork_rate: state.voter_forking_rate(),
        beta: params.beta,
        epsilon: params.epsilon,
        voter_chains: state.voter_chains(),
    }
}

/// Bounds using the closed-form quantile. Fails when `ε` is outside the
/// closed form's domain; [`confidence_bounds_with`] offers a fallback.
pub fn confidence_bounds(tally: &VoteTally) -> Result<ConfidenceBounds, ConfirmationError> {
    confidence_bounds_with(tally, QuantileMode::ClosedForm)
}

pub fn confidence_bounds_with(tally: &VoteTally, mode: QuantileMode) -> Result<ConfidenceBounds, ConfirmationError> {
    let z = quantile(tally.epsilon, mode)?;
    let mean_depth = tally.mean_depth();
    let adv = adversary_depth(mean_depth, tally.fork_rate, tally.beta)?;
    let mut cache: Vec<Option<f64>> = Vec::new();
    let mut permanence = |d: u64| -> Result<f64, ConfirmationError> {
        let i = d as usize;
        if i >= cache.len() {
            cache.resize(i + 1, None);
        }
        if let Some(p) = cache[i] {
            return Ok(p);
        }
        let p = vote_permanence(d, adv, tally.beta)?;
        cache[i] = Some(p);
        Ok(p)
    };
    let mut candidates = Vec::with_capacity(tally.candidates.len());
    for c in &tally.candidates {
        let (mut mean, mut var) = (0.0, 0.0);
        for &d in &c.depths {
            let p = permanence(d.max(1))?;
            mean += p;
            var += p * (1.0 - p);
        }
        let std_dev = var.sqrt();
        let lower = (mean - z * std_dev).max(0.0);
        candidates.push(CandidateBounds { block: c.block, votes: c.depths.len(), mean, std_dev, lower, upper: 0.0 });
    }
    let m = tally.voter_chains as f64;
    let private_upper = (m - candidates.iter().map(|c| c.lower).sum::<f64>()).clamp(0.0, m);
    for c in &mut candidates {
        c.upper = (c.lower + private_upper).min(m);
    }
    Ok(ConfidenceBounds { candidates, private_upper, mean_depth, adversary_depth: adv, quantile: z })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderDecision {
    Confirmed(Digest),
    Unconfirmed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetDecision {
    Confirmed(Vec<Digest>),
    Unconfirmed,
}

fn bounds_or_unconfirmed(tally: &VoteTally) -> Option<ConfidenceBounds> {
    if tally.candidates.is_empty() {
        return None;
    }
    confidence_bounds_with(tally, QuantileMode::Auto).ok()
}

/// Applies the leader rule to precomputed bounds.
pub fn leader_from_bounds(bounds: &ConfidenceBounds) -> LeaderDecision {
    let Some(best) = bounds
        .candidates
        .iter()
        .max_by(|a, b| a.lower.total_cmp(&b.lower).then(b.block.cmp(&a.block)))
    else {
        return LeaderDecision::Unconfirmed;
    };
    let beats_others = bounds.candidates.iter().filter(|c| c.block != best.block).all(|c| best.lower > c.upper);
    if best.votes > 0 && beats_others && best.lower > bounds.private_upper {
        LeaderDecision::Confirmed(best.block)
    } else {
        LeaderDecision::Unconfirmed
    }
}

/// Applies the proposer-set rule to precomputed bounds.
pub fn proposer_set_from_bounds(bounds: &ConfidenceBounds) -> SetDecision {
    let Some(max_lower) = bounds.candidates.iter().map(|c| c.lower).max_by(f64::total_cmp) else {
        return SetDecision::Unconfirmed;
    };
    if !(bounds.private_upper < max_lower) {
        return SetDecision::Unconfirmed;
    }
    let set: Vec<Digest> = bounds.candidates.iter().filter(|c| c.upper >= max_lower).map(|c| c.block).collect();
    SetDecision::Confirmed(set)
}

/// Confirms the leader when its lower bound exceeds the upper bound of every
/// other known candidate and of a hypothetical private block.
pub fn try_confirm_leader(tally: &VoteTally) -> LeaderDecision {
    bounds_or_unconfirmed(tally).map_or(LeaderDecision::Unconfirmed, |b| leader_from_bounds(&b))
}

/// Confirms the set of candidates that could still become leader, once no
/// private block can join that set.
pub fn try_confirm_proposer_set(tally: &VoteTally) -> SetDecision {
    bounds_or_unconfirmed(tally).map_or(SetDecision::Unconfirmed, |b| proposer_set_from_bounds(&b))
}

/// One line of the confirmation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub level: u64,
    pub votes: usize,
    pub mean_depth: f64,
    pub adversary_depth: f64,
    pub private_upper: f64,
    pub candidates: Vec<CandidateBounds>,
    pub decision: LeaderDecision,
}

impl TraceRecord {
    pub fn new(time: f64, level: u64, tally: &VoteTally, bounds: &ConfidenceBounds, decision: LeaderDecision) -> Self {
        TraceRecord {
            time,
            level,
            votes: tally.vote_count(),
            mean_depth: bounds.mean_depth,
            adversary_depth: bounds.adversary_depth,
            private_upper: bounds.private_upper,
            candidates: bounds.candidates.clone(),
            decision,
        }
    }
}
