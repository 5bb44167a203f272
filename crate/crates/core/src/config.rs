//! Experiment configuration, named profiles and validation.
//!
//! Configurations are JSON. A run starts from a named profile, deep-merges a
//! user file on top, then validates. Every validation error names the
//! offending field.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::chain::VoteMode;
use crate::confirmation::{ConfirmationParams, QuantileMode};
use crate::crypto::SignatureScheme;
use crate::mining::Jitter;
use crate::sortition::SortitionParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown profile `{0}` (expected `desk` or `paper-shape`)")]
    UnknownProfile(String),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Prism,
    LongestChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyKind {
    RandomRegular { degree: usize },
    Ring,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub nodes: usize,
    pub topology: TopologyKind,
    /// One-way propagation delay per link, seconds.
    pub link_delay: f64,
    /// Per-link bandwidth, bytes per second.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrismConfig {
    pub voter_chains: u32,
    /// Transaction-block mining rate (blocks/s, whole network).
    pub tx_rate: f64,
    /// Proposer-block mining rate (blocks/s, whole network).
    pub proposer_rate: f64,
    /// Mining rate of each voter chain (blocks/s, whole network).
    pub voter_rate: f64,
    pub tx_block_capacity: usize,
    pub vote_mode: VoteMode,
    pub validate_blocks: bool,
}

impl PrismConfig {
    pub fn sortition(&self) -> SortitionParams {
        SortitionParams {
            voter_chains: self.voter_chains,
            tx_rate: self.tx_rate,
            proposer_rate: self.proposer_rate,
            voter_rate: self.voter_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongestChainConfig {
    /// Block mining rate (blocks/s, whole network).
    pub block_rate: f64,
    pub block_capacity: usize,
    /// Confirmation depth; derived from (β, ε) when absent.
    pub depth: Option<u32>,
    /// Validate transactions against the miner's tip ledger before mining.
    pub validate_before_mining: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Workload {
    None,
    /// Poisson arrivals at `tps` transactions per second, split evenly over
    /// all nodes.
    Poisson { tps: f64 },
    /// Every miner always has a full transaction block's worth pending.
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    None,
    PrivateDoubleSpend {
        /// Simulated time at which the attack picks its target level.
        attack_start: f64,
        /// Extra winning chains required beyond a bare majority.
        #[serde(default)]
        release_margin: u32,
        /// Release time; defaults to the end of the run.
        #[serde(default)]
        release_timeout: Option<f64>,
    },
    Censorship,
    Balancing {
        /// Mine a competing proposer block at every new level.
        #[serde(default = "yes")]
        compete_every_level: bool,
    },
    Spam {
        /// Conflict sets per second.
        rate: f64,
        /// Number of honest victim nodes receiving each set.
        victims: usize,
        start: f64,
        stop: f64,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    /// Total adversarial hash-power share.
    pub power: f64,
    /// Number of adversarial nodes (the highest node ids).
    pub nodes: usize,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    /// Simulated seconds of mining.
    pub duration: f64,
    /// Extra seconds after `duration` during which mining and propagation
    /// continue; nothing that happens after `duration` is measured.
    pub drain: f64,
    /// Fraction of `duration` discarded before measuring.
    pub warmup_fraction: f64,
    pub checkpoint_interval: f64,
    pub network: NetworkConfig,
    pub prism: PrismConfig,
    pub longest_chain: LongestChainConfig,
    pub confirmation: ConfirmationParams,
    pub workload: Workload,
    pub signature: SignatureScheme,
    pub jitter: Jitter,
    pub adversary: AdversaryConfig,
    /// Permit β ≥ 0.5 (for exploring insecure regimes).
    pub allow_unsafe_beta: bool,
    /// Record the confirmation trace.
    pub trace: bool,
}

/// The named base profile as JSON.
pub fn profile(name: &str) -> Result<Value, ConfigError> {
    let desk = serde_json::json!({
        "protocol": "prism",
        "duration": 300.0,
        "drain": 30.0,
        "warmup_fraction": 0.2,
        "checkpoint_interval": 30.0,
        "network": {
            "nodes": 20,
            "topology": { "kind": "random_regular", "degree": 4 },
            "link_delay": 0.12,
            "bandwidth": 1.25e6
        },
        "prism": {
            "voter_chains": 100,
            "tx_rate": 1.0,
            "proposer_rate": 0.1,
            "voter_rate": 0.1,
            "tx_block_capacity": 228,
            "vote_mode": "first_seen",
            "validate_blocks": true
        },
        "longest_chain": {
            "block_rate": 0.1,
            "block_capacity": 228,
            "depth": null,
            "validate_before_mining": true
        },
        "confirmation": { "beta": 0.3, "epsilon": 1e-3, "quantile": "auto" },
        "workload": { "kind": "poisson", "tps": 50.0 },
        "signature": "mock",
        "jitter": { "kind": "none" },
        "adversary": { "power": 0.0, "nodes": 0, "scenario": { "kind": "none" } },
        "allow_unsafe_beta": false,
        "trace": false
    });
    match name {
        "desk" => Ok(desk),
        "paper-shape" => {
            let mut v = desk;
            merge(&mut v, serde_json::json!({ "prism": { "voter_chains": 1000 }, "duration": 600.0 }));
            Ok(v)
        }
        other => Err(ConfigError::UnknownProfile(other.to_string())),
    }
}

/// Recursively merges `overlay` into `base`; objects merge key by key, any
/// other value replaces.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

impl ExperimentConfig {
    /// The profile with `overlay` merged on top, validated.
    pub fn from_profile(name: &str, overlay: Option<Value>) -> Result<Self, ConfigError> {
        let mut v = profile(name)?;
        if let Some(o) = overlay {
            merge(&mut v, o);
        }
        let cfg: ExperimentConfig = serde_json::from_value(v)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The desk profile, unvalidated, for programmatic tweaking.
    pub fn desk() -> Self {
        serde_json::from_value(profile("desk").expect("built-in")).expect("built-in profile parses")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let beta = self.confirmation.beta;
        if !(beta > 0.0 && beta < 1.0) {
            return Err(invalid("beta", format!("confirmation.beta must be in (0, 1), got {beta}")));
        }
        if beta >= 0.5 && !self.allow_unsafe_beta {
            return Err(invalid("beta", format!("confirmation.beta = {beta} is not below 0.5; set allow_unsafe_beta to override")));
        }
        let power = self.adversary.power;
        if !(0.0..1.0).contains(&power) {
            return Err(invalid("beta", format!("adversary.power must be in [0, 1), got {power}")));
        }
        if power >= 0.5 && !self.allow_unsafe_beta {
            return Err(invalid("beta", format!("adversary.power = {power} is not below 0.5; set allow_unsafe_beta to override")));
        }
        if !(self.confirmation.epsilon > 0.0 && self.confirmation.epsilon < 0.5) {
            return Err(invalid("epsilon", "confirmation.epsilon must be in (0, 0.5)"));
        }
        if self.confirmation.quantile == QuantileMode::ClosedForm
            && crate::confirmation::closed_form_quantile(self.confirmation.epsilon).is_none()
        {
            return Err(invalid("epsilon", "closed-form quantile undefined; use quantile = exact or auto"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid("duration", "must be positive"));
        }
        if !(self.drain >= 0.0) {
            return Err(invalid("drain", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(invalid("warmup_fraction", "must be in [0, 1)"));
        }
        if !(self.checkpoint_interval > 0.0) {
            return Err(invalid("checkpoint_interval", "must be positive"));
        }
        let n = self.network.nodes;
        if n == 0 {
            return Err(invalid("nodes", "need at least one node"));
        }
        if !(self.network.link_delay >= 0.0) {
            return Err(invalid("link_delay", "must be non-negative"));
        }
        if !(self.network.bandwidth > 0.0) {
            return Err(invalid("bandwidth", "must be positive"));
        }
        if let TopologyKind::RandomRegular { degree } = self.network.topology {
            if n > 1 && (degree == 0 || degree >= n || (degree * n) % 2 == 1) {
                return Err(invalid("topology", format!("no {degree}-regular graph on {n} nodes")));
            }
        }
        self.prism.sortition().validate().map_err(|e| invalid("prism", e.to_string()))?;
        if self.prism.tx_block_capacity == 0 {
            return Err(invalid("tx_block_capacity", "must be positive"));
        }
        if !(self.longest_chain.block_rate > 0.0) {
            return Err(invalid("block_rate", "must be positive"));
        }
        if let Some(0) = self.longest_chain.depth {
            return Err(invalid("depth", "must be at least 1"));
        }
        if let Workload::Poisson { tps } = self.workload {
            if !(tps >= 0.0 && tps.is_finite()) {
                return Err(invalid("workload", "tps must be non-negative"));
            }
        }
        if self.adversary.nodes >= n && self.adversary.nodes > 0 {
            return Err(invalid("adversary", "at least one honest node is required"));
        }
        if self.adversary.power > 0.0 && self.adversary.nodes == 0 {
            return Err(invalid("adversary", "power is positive but no adversarial nodes are configured"));
        }
        match self.adversary.scenario {
            Scenario::Spam { rate, victims, start, stop } => {
                if !(rate > 0.0) || victims == 0 || victims > n - self.adversary.nodes || !(stop > start) {
                    return Err(invalid("scenario", "spam needs rate > 0, 1..=honest victims, stop > start"));
                }
            }
            Scenario::None => {}
            _ if self.adversary.nodes == 0 => {
                return Err(invalid("scenario", "attack scenario without adversarial nodes"));
            }
            _ => {}
        }
        if matches!(self.adversary.scenario, Scenario::Balancing { .. }) && self.prism.vote_mode != VoteMode::MostVoted {
            return Err(invalid("vote_mode", "the balancing scenario requires vote_mode = most_voted"));
        }
        Ok(())
    }

    /// Stable digest of the configuration (hex SHA-256 of its JSON form).
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("serializable");
        crate::digest::Digest::hash(&json).to_hex()
    }
}
