//! Deterministic discrete-event network simulator.
//!
//! Nodes sit on an undirected [`Topology`]. Each directed link is a FIFO
//! queue with the configured bandwidth and propagation delay. A node relays
//! a block to all neighbours except the one it came from once it has stored
//! it, and asks the sender for any dependency it is missing. Mining is a
//! Poisson process per node, with the superblock assembled from the node's
//! view at the instant of success.
//!
//! All randomness comes from ChaCha streams derived from the run seed, the
//! node id and a stream name, and events are ordered by `(time, sequence)`,
//! so a run is a pure function of its configuration and seed.

mod events;
mod link;
mod model;
mod observer;
mod prism;
mod topology;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use events::EventQueue;
pub use link::LinkQueues;
pub use model::{delay_model, forking_rate_approx, security_constraint, utilization_bound};
pub use observer::Observer;
pub use prism::PrismSim;
pub(crate) use prism::{coins_needed, scenario_name};
pub use topology::Topology;

use crate::config::{ConfigError, ExperimentConfig, Protocol};
use crate::metrics::SimOutput;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("topology: {0}")]
    Topology(String),
    #[error("parameter `{name}` out of range: {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("scenario `{0}` is not supported by this protocol")]
    Unsupported(&'static str),
}

/// A ChaCha stream keyed by `(seed, node, stream)`.
pub fn stream_rng(seed: u64, node: u64, stream: &str) -> ChaCha8Rng {
    let key = crate::digest::Digest::hash_parts(&[&seed.to_le_bytes(), &node.to_le_bytes(), stream.as_bytes()]);
    ChaCha8Rng::from_seed(key.0)
}

/// Per-node hash power: honest nodes share `1 − β` equally and the last
/// `adversarial` nodes share `β` equally.
pub fn hash_powers(nodes: usize, adversarial: usize, beta: f64) -> Vec<f64> {
    let honest = nodes - adversarial;
    (0..nodes)
        .map(|i| if i < honest { (1.0 - if adversarial > 0 { beta } else { 0.0 }) / honest as f64 } else { beta / adversarial as f64 })
        .collect()
}

/// Runs one simulation of the configured protocol.
pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<SimOutput, SimError> {
    cfg.validate()?;
    match cfg.protocol {
        Protocol::Prism => Ok(PrismSim::new(cfg, seed)?.run()),
        Protocol::LongestChain => Ok(crate::baseline::LongestChainSim::new(cfg, seed)?.run()),
    }
}
