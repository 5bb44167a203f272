//! Prism: a proof-of-work consensus protocol that factors the blockchain
//! into transaction blocks, one proposer chain and many voter chains, plus a
//! deterministic discrete-event simulator for studying it.
//!
//! The crate is organised bottom-up:
//!
//! * [`digest`], [`codec`], [`merkle`], [`crypto`], [`block`], [`sortition`]
//!   and [`validate`] define the data model;
//! * [`ledger`] holds UTXO transactions and sanitization;
//! * [`mining`] assembles superblocks and manages the mempool;
//! * [`chain`] is the per-node view of the block DAG;
//! * [`confirmation`] turns votes into a confirmed ledger;
//! * [`netsim`], [`adversary`] and [`baseline`] simulate networks of honest and
//!   adversarial miners running Prism or a longest-chain protocol;
//! * [`config`], [`metrics`] and [`harness`] drive experiments.

pub mod adversary;
pub mod baseline;
pub mod block;
pub mod chain;
pub mod codec;
pub mod config;
pub mod confirmation;
pub mod crypto;
pub mod digest;
pub mod harness;
pub mod ledger;
pub mod merkle;
pub mod metrics;
pub mod mining;
pub mod netsim;
pub mod sortition;
#[cfg(test)]
mod testutil;
pub mod validate;
pub mod workload;

pub use digest::Digest;
