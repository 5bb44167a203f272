//! Superblock assembly, simulated proof of work and the miner's mempool.
//!
//! Mining is modelled as a Poisson process: a node with hash-power share `p`
//! finds a superblock after an exponential delay with rate `f · p`, where `f`
//! is the total superblock rate. The outcome is then sortitioned into one
//! block type by a uniform draw.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{parent_leaf, Block, BlockType, Content, Header, SortitionProof};
use crate::digest::Digest;
use crate::ledger::{OutPoint, Transaction};
use crate::merkle::MerkleTree;
use crate::sortition::{sortition, SortitionParams};

/// Everything a miner needs to fill all `m + 2` slots of a superblock.
#[derive(Debug, Clone, Default)]
pub struct MinerContext {
    pub prp_parent: Digest,
    pub prp_parent_level: u64,
    pub vt_parent: Vec<Digest>,
    /// Transactions for the transaction slot, already capped at block size.
    pub tx_pool: Vec<Transaction>,
    pub unref_tx_pool: Vec<Digest>,
    /// Unreferenced proposer blocks, excluding `prp_parent`.
    pub unref_prp_pool: Vec<Digest>,
    /// Per voter chain: the votes still to be cast, in level order.
    pub votes_on_prp: Vec<Vec<Digest>>,
    pub hash_power: f64,
}

/// An assembled superblock before the nonce is found.
#[derive(Debug, Clone)]
pub struct Superblock {
    parents: Vec<Option<Digest>>,
    contents: Vec<Content>,
    parent_tree: MerkleTree,
    content_tree: MerkleTree,
    proposer_level: u64,
}

impl Superblock {
    pub fn parent_root(&self) -> Digest {
        self.parent_tree.root()
    }

    pub fn content_root(&self) -> Digest {
        self.content_tree.root()
    }

    pub fn slot_count(&self) -> usize {
        self.contents.len()
    }

    /// Header for a given nonce.
    pub fn header(&self, nonce: u64) -> Header {
        Header { parent_root: self.parent_root(), content_root: self.content_root(), nonce }
    }

    /// Prunes the superblock down to `kind`'s slot.
    pub fn into_block(mut self, kind: BlockType, nonce: u64, miner: u32) -> Block {
        let m = (self.contents.len() - 2) as u32;
        let slot = kind.slot(m) as usize;
        let proof = SortitionProof {
            parent: self.parent_tree.prove(slot).expect("slot in range"),
            content: self.content_tree.prove(slot).expect("slot in range"),
        };
        let level = matches!(kind, BlockType::Proposer).then_some(self.proposer_level);
        let content = std::mem::replace(&mut self.contents[slot], Content::Votes(Vec::new()));
        Block::from_parts(self.header(nonce), kind, self.parents[slot], level, content, proof, miner)
    }
}

/// Fills every slot from the context and commits to them.
pub fn assemble_superblock(ctx: &MinerContext) -> Superblock {
    let m = ctx.vt_parent.len();
    let mut parents = Vec::with_capacity(m + 2);
    let mut contents = Vec::with_capacity(m + 2);
    for i in 0..m {
        parents.push(Some(ctx.vt_parent[i]));
        contents.push(Content::Votes(ctx.votes_on_prp.get(i).cloned().unwrap_or_default()));
    }
    parents.push(None);
    contents.push(Content::Transactions(ctx.tx_pool.clone()));
    parents.push(Some(ctx.prp_parent));
    contents.push(Content::Proposer {
        proposer_refs: ctx.unref_prp_pool.iter().copied().filter(|d| *d != ctx.prp_parent).collect(),
        tx_block_refs: ctx.unref_tx_pool.clone(),
    });
    let parent_tree = MerkleTree::from_leaves(&parents.iter().map(|p| parent_leaf(p.as_ref())).collect::<Vec<_>>())
        .expect("m + 2 leaves");
    let content_tree =
        MerkleTree::from_leaf_hashes(contents.iter().map(Content::leaf_hash).collect()).expect("m + 2 leaves");
    Superblock { parents, contents, parent_tree, content_tree, proposer_level: ctx.prp_parent_level + 1 }
}

/// Draws the completion time of the next mining success, or `None` for a
/// node without hash power.
pub fn schedule_mining<R: Rng + ?Sized>(hash_power: f64, total_rate: f64, rng: &mut R, now: f64) -> Option<f64> {
    let rate = hash_power * total_rate;
    if !(rate > 0.0 && rate.is_finite()) {
        return None;
    }
    let exp = Exp::new(rate).expect("positive rate");
    Some(now + exp.sample(rng))
}

/// Assembles the superblock, sortitions it with `u` and returns the block.
pub fn finish_mining(ctx: &MinerContext, params: &SortitionParams, u: f64, nonce: u64, miner: u32) -> Block {
    let kind = sortition(u, params);
    assemble_superblock(ctx).into_block(kind, nonce, miner)
}

/// Release-delay policy applied to incoming transactions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Jitter {
    #[default]
    None,
    /// Uniform on `[0, max]` seconds.
    Uniform { max: f64 },
    /// Exponential with the given mean in seconds.
    Exponential { mean: f64 },
}

impl Jitter {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Jitter::None => 0.0,
            Jitter::Uniform { max } => rng.gen::<f64>() * max,
            Jitter::Exponential { mean } => {
                if mean <= 0.0 {
                    0.0
                } else {
                    Exp::new(1.0 / mean).expect("positive").sample(rng)
                }
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MempoolReject {
    #[error("transaction already pending")]
    Duplicate,
    #[error("transaction conflicts with a pending transaction")]
    Conflict,
}

#[derive(Debug, Clone)]
struct Entry {
    tx: Transaction,
    release_at: f64,
}

/// FIFO pool of pending transactions with per-transaction release times.
#[derive(Debug, Clone, Default)]
pub struct Mempool {
    entries: BTreeMap<u64, Entry>,
    seq_of: HashMap<Digest, u64>,
    spender: HashMap<OutPoint, Digest>,
    next_seq: u64,
}

impl Mempool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &Digest) -> bool {
        self.seq_of.contains_key(id)
    }

    /// Whether any pending transaction spends `op`.
    pub fn spends(&self, op: &OutPoint) -> bool {
        self.spender.contains_key(op)
    }

    pub fn insert(&mut self, tx: Transaction, release_at: f64) -> Result<(), MempoolReject> {
        if self.seq_of.contains_key(&tx.id()) {
            return Err(MempoolReject::Duplicate);
        }
        if tx.inputs().iter().any(|op| self.spender.contains_key(op)) {
            return Err(MempoolReject::Conflict);
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        for op in tx.inputs() {
            self.spender.insert(*op, tx.id());
        }
        self.seq_of.insert(tx.id(), seq);
        self.entries.insert(seq, Entry { tx, release_at });
        Ok(())
    }

    pub fn remove(&mut self, id: &Digest) -> Option<Transaction> {
        let seq = self.seq_of.remove(id)?;
        let e = self.entries.remove(&seq).expect("indexed entry");
        for op in e.tx.inputs() {
            self.spender.remove(op);
        }
        Some(e.tx)
    }

    /// Removes `tx` itself and every pending transaction sharing an input
    /// with it. Returns the ids removed.
    pub fn remove_conflicting(&mut self, tx: &Transaction) -> Vec<Digest> {
        let mut gone = Vec::new();
        if self.remove(&tx.id()).is_some() {
            gone.push(tx.id());
        }
        for op in tx.inputs() {
            if let Some(id) = self.spender.get(op).copied() {
                self.remove(&id);
                gone.push(id);
            }
        }
        gone
    }

    /// Up to `cap` released transactions in arrival order.
    pub fn eligible(&self, now: f64, cap: usize) -> Vec<Transaction> {
        self.entries.values().filter(|e| e.release_at <= now).take(cap).map(|e| e.tx.clone()).collect()
    }

    /// Number of released transactions, capped at `cap`.
    pub fn eligible_count(&self, now: f64, cap: usize) -> usize {
        self.entries.values().filter(|e| e.release_at <= now).take(cap).count()
    }

    /// Earliest release time strictly after `now`, if any.
    pub fn next_release_after(&self, now: f64) -> Option<f64> {
        self.entries.values().map(|e| e.release_at).filter(|t| *t > now).min_by(f64::total_cmp)
    }
}
