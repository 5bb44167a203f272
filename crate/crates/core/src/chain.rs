//! Per-node view of the block DAG.
//!
//! [`ChainState`] stores every block the node has accepted, the proposer
//! tree indexed by level, one voter tree per chain with its longest chain and
//! vote index, the pools of unreferenced blocks, an orphan buffer for blocks
//! whose dependencies are still missing, and the transaction mempool.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{genesis, Block, BlockType};
use crate::digest::Digest;
use crate::ledger::{OutPoint, Transaction, TxFormatError};
use crate::mining::{Mempool, MempoolReject, MinerContext};
use crate::sortition::SortitionParams;
use crate::validate::{validate_block, ValidationError};

/// How honest voters pick a proposer block at a level they have not voted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    /// The first proposer block received at that level.
    #[default]
    FirstSeen,
    /// The block with the most votes so far, ties broken by arrival.
    MostVoted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub sortition: SortitionParams,
    /// Maximum transactions per transaction block.
    pub tx_capacity: usize,
    pub vote_mode: VoteMode,
    /// Run [`validate_block`] on every received block.
    pub validate_blocks: bool,
}

impl ChainConfig {
    pub fn voter_chains(&self) -> u32 {
        self.sortition.voter_chains
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReceiveError {
    #[error("invalid block: {0}")]
    Invalid(#[from] ValidationError),
    #[error("block is inconsistent with its dependencies: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TxReject {
    #[error("malformed transaction: {0}")]
    BadSignature(TxFormatError),
    #[error("transaction conflicts with a pending or included transaction")]
    Conflict,
    #[error("transaction already known")]
    Duplicate,
}

/// One consequence of receiving a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateChange {
    Duplicate(Digest),
    /// Buffered until the listed dependencies arrive.
    Orphaned { block: Digest, missing: Vec<Digest> },
    /// A buffered block whose dependencies arrived but failed consistency
    /// checks; it is dropped.
    Dropped { block: Digest },
    TxBlockStored { block: Digest },
    ProposerStored { block: Digest, level: u64, new_parent: bool },
    VoterStored { block: Digest, chain: u32, new_tip: bool, reorg: bool },
}

impl StateChange {
    /// Whether the miner context may have changed.
    pub fn is_stored(&self) -> bool {
        matches!(
            self,
            StateChange::TxBlockStored { .. } | StateChange::ProposerStored { .. } | StateChange::VoterStored { .. }
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct ProposerMeta {
    level: u64,
    arrival: u64,
}

#[derive(Debug, Clone, Copy)]
struct VoterNode {
    parent: Digest,
    chainlen: u64,
    last_voted: u64,
}

/// One voter chain's block tree, longest chain and vote index.
#[derive(Debug, Clone)]
pub struct VoterTree {
    nodes: HashMap<Digest, VoterNode>,
    main: Vec<Digest>,
    main_pos: HashMap<Digest, usize>,
    /// `votes[l - 1]` = (voted proposer, main-chain position of the voter).
    votes: Vec<(Digest, usize)>,
}

impl VoterTree {
    fn new(chain: u32) -> Self {
        let g = genesis::voter(chain);
        let mut nodes = HashMap::new();
        nodes.insert(g, VoterNode { parent: g, chainlen: 0, last_voted: 0 });
        VoterTree { nodes, main: vec![g], main_pos: HashMap::from([(g, 0)]), votes: Vec::new() }
    }

    pub fn genesis(&self) -> Digest {
        self.main[0]
    }

    pub fn tip(&self) -> Digest {
        *self.main.last().expect("genesis present")
    }

    /// Length of the longest chain, not counting genesis.
    pub fn height(&self) -> u64 {
        (self.main.len() - 1) as u64
    }

    pub fn main_chain(&self) -> &[Digest] {
        &self.main
    }

    pub fn contains(&self, d: &Digest) -> bool {
        self.nodes.contains_key(d)
    }

    /// Number of blocks excluding genesis.
    pub fn block_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn chainlen(&self, d: &Digest) -> Option<u64> {
        self.nodes.get(d).map(|n| n.chainlen)
    }

    /// Highest proposer level voted on by `d` or its ancestors.
    pub fn last_voted(&self, d: &Digest) -> Option<u64> {
        self.nodes.get(d).map(|n| n.last_voted)
    }

    pub fn parent_of(&self, d: &Digest) -> Option<Digest> {
        self.nodes.get(d).filter(|_| *d != self.genesis()).map(|n| n.parent)
    }

    /// Highest level voted on along the longest chain.
    pub fn tip_last_voted(&self) -> u64 {
        self.votes.len() as u64
    }

    /// The main-chain vote at `level` and its depth (1 for a vote in the tip).
    pub fn vote_and_depth(&self, level: u64) -> Option<(Digest, u64)> {
        let (d, pos) = *self.votes.get(level.checked_sub(1)? as usize)?;
        Some((d, (self.main.len() - pos) as u64))
    }

    /// Main-chain position of the block that voted at `level`.
    pub fn vote_position(&self, level: u64) -> Option<usize> {
        self.votes.get(level.checked_sub(1)? as usize).map(|v| v.1)
    }

    /// Adds a voter block whose parent is present. Returns
    /// `(new_tip, reorg)`; `reorg` means the old tip left the longest chain.
    fn insert(&mut self, b: &Block, last_voted: u64, blocks: &HashMap<Digest, Arc<Block>>) -> (bool, bool) {
        let parent = b.parent().expect("voter parent");
        let node = VoterNode { parent, chainlen: self.nodes[&parent].chainlen + 1, last_voted };
        self.nodes.insert(b.digest(), node);
        if node.chainlen <= self.height() {
            return (false, false);
        }
        let mut path = vec![b.digest()];
        let mut cur = parent;
        while !self.main_pos.contains_key(&cur) {
            path.push(cur);
            cur = self.nodes[&cur].parent;
        }
        let fork = self.main_pos[&cur];
        let reorg = fork + 1 < self.main.len();
        for d in self.main.drain(fork + 1..) {
            self.main_pos.remove(&d);
        }
        while self.votes.last().is_some_and(|v| v.1 > fork) {
            self.votes.pop();
        }
        for v in path.into_iter().rev() {
            let pos = self.main.len();
            self.main.push(v);
            self.main_pos.insert(v, pos);
            let votes = if v == b.digest() { b.votes() } else { blocks[&v].votes() };
            self.votes.extend(votes.iter().map(|p| (*p, pos)));
        }
        (true, reorg)
    }
}

/// A node's full chain state.
#[derive(Debug, Clone)]
pub struct ChainState {
    cfg: ChainConfig,
    blocks: HashMap<Digest, Arc<Block>>,
    proposers: HashMap<Digest, ProposerMeta>,
    levels: Vec<Vec<Digest>>,
    prp_parent: Digest,
    voters: Vec<VoterTree>,
    voter_genesis: HashMap<Digest, u32>,
    unref_tx: IndexSet<Digest>,
    unref_prp: IndexSet<Digest>,
    orphans: HashMap<Digest, (Arc<Block>, usize)>,
    waiting: HashMap<Digest, Vec<Digest>>,
    mempool: Mempool,
    included: HashMap<OutPoint, Digest>,
    arrivals: u64,
    tx_block_count: usize,
}

impl ChainState {
    pub fn new(cfg: ChainConfig) -> Self {
        let g = genesis::proposer();
        let m = cfg.voter_chains();
        ChainState {
            cfg,
            blocks: HashMap::new(),
            proposers: HashMap::from([(g, ProposerMeta { level: 0, arrival: 0 })]),
            levels: vec![vec![g]],
            prp_parent: g,
            voters: (0..m).map(VoterTree::new).collect(),
            voter_genesis: (0..m).map(|i| (genesis::voter(i), i)).collect(),
            unref_tx: IndexSet::new(),
            unref_prp: IndexSet::new(),
            orphans: HashMap::new(),
            waiting: HashMap::new(),
            mempool: Mempool::new(),
            included: HashMap::new(),
            arrivals: 1,
            tx_block_count: 0,
        }
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn voter_chains(&self) -> u32 {
        self.cfg.voter_chains()
    }

    /// Whether `d` is stored (genesis blocks count as stored).
    pub fn contains(&self, d: &Digest) -> bool {
        self.blocks.contains_key(d) || self.proposers.contains_key(d) || self.voter_genesis_index(d).is_some()
    }

    fn voter_genesis_index(&self, d: &Digest) -> Option<u32> {
        self.voter_genesis.get(d).copied()
    }

    pub fn is_orphan(&self, d: &Digest) -> bool {
        self.orphans.contains_key(d)
    }

    pub fn orphan_count(&self) -> usize {
        self.orphans.len()
    }

    pub fn block(&self, d: &Digest) -> Option<&Arc<Block>> {
        self.blocks.get(d)
    }

    pub fn is_proposer(&self, d: &Digest) -> bool {
        self.proposers.contains_key(d)
    }

    pub fn is_tx_block(&self, d: &Digest) -> bool {
        self.blocks.get(d).is_some_and(|b| b.kind() == BlockType::Transaction)
    }

    pub fn proposer_level(&self, d: &Digest) -> Option<u64> {
        self.proposers.get(d).map(|p| p.level)
    }

    /// Proposer blocks at `level` in arrival order.
    pub fn proposers_at(&self, level: u64) -> &[Digest] {
        self.levels.get(level as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_level(&self) -> u64 {
        (self.levels.len() - 1) as u64
    }

    pub fn prp_parent(&self) -> Digest {
        self.prp_parent
    }

    pub fn voter_tree(&self, chain: u32) -> &VoterTree {
        &self.voters[chain as usize]
    }

    /// Longest chain of voter chain `chain`, genesis first.
    pub fn longest_chain(&self, chain: u32) -> &[Digest] {
        self.voters[chain as usize].main_chain()
    }

    pub fn vote_and_depth(&self, chain: u32, level: u64) -> Option<(Digest, u64)> {
        self.voters[chain as usize].vote_and_depth(level)
    }

    pub fn unreferenced_tx_blocks(&self) -> impl Iterator<Item = &Digest> {
        self.unref_tx.iter()
    }

    pub fn unreferenced_proposers(&self) -> impl Iterator<Item = &Digest> {
        self.unref_prp.iter()
    }

    pub fn mempool(&self) -> &Mempool {
        &self.mempool
    }

    pub fn tx_block_count(&self) -> usize {
        self.tx_block_count
    }

    pub fn proposer_block_count(&self) -> usize {
        self.proposers.len() - 1
    }

    pub fn voter_block_count(&self) -> usize {
        self.voters.iter().map(VoterTree::block_count).sum()
    }

    /// Votes per candidate at `level`, in candidate arrival order.
    pub fn vote_counts(&self, level: u64) -> Vec<(Digest, usize)> {
        let mut counts: Vec<(Digest, usize)> = self.proposers_at(level).iter().map(|d| (*d, 0)).collect();
        for t in &self.voters {
            if let Some((d, _)) = t.vote_and_depth(level) {
                if let Some(c) = counts.iter_mut().find(|c| c.0 == d) {
                    c.1 += 1;
                }
            }
        }
        counts
    }

    /// Candidate with the most main-chain votes, ties to the smaller digest.
    /// `None` when no chain votes at `level`.
    pub fn leader_by_votes(&self, level: u64) -> Option<Digest> {
        self.vote_counts(level)
            .into_iter()
            .filter(|c| c.1 > 0)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|c| c.0)
    }

    /// The proposer block honest voters currently pick at `level`.
    pub fn vote_choice(&self, level: u64) -> Option<Digest> {
        match self.cfg.vote_mode {
            VoteMode::FirstSeen => self.proposers_at(level).first().copied(),
            VoteMode::MostVoted => {
                let counts = self.vote_counts(level);
                let best = counts.iter().map(|c| c.1).max()?;
                counts.iter().find(|c| c.1 == best).map(|c| c.0)
            }
        }
    }

    /// Fraction of non-genesis voter blocks that are off their longest chain.
    pub fn voter_forking_rate(&self) -> f64 {
        let total = self.voter_block_count();
        if total == 0 {
            return 0.0;
        }
        let on_main: u64 = self.voters.iter().map(VoterTree::height).sum();
        (total as f64 - on_main as f64) / total as f64
    }

    /// Fraction of non-genesis proposer blocks that are not ancestors of the
    /// current proposer parent.
    pub fn proposer_forking_rate(&self) -> f64 {
        let total = self.proposer_block_count();
        if total == 0 {
            return 0.0;
        }
        let on_main = self.proposer_level(&self.prp_parent).unwrap_or(0) as usize;
        (total - on_main) as f64 / total as f64
    }

    /// Builds the context for mining at time `now`.
    pub fn miner_context(&self, now: f64, hash_power: f64) -> MinerContext {
        let max = self.max_level();
        let from = self.voters.iter().map(VoterTree::tip_last_voted).min().unwrap_or(max);
        let choices: Vec<Digest> =
            (from + 1..=max).map(|l| self.vote_choice(l).expect("levels are contiguous")).collect();
        let votes_on_prp = self
            .voters
            .iter()
            .map(|t| choices[(t.tip_last_voted() - from) as usize..].to_vec())
            .collect();
        MinerContext {
            prp_parent: self.prp_parent,
            prp_parent_level: max,
            vt_parent: self.voters.iter().map(VoterTree::tip).collect(),
            tx_pool: self.mempool.eligible(now, self.cfg.tx_capacity),
            unref_tx_pool: self.unref_tx.iter().copied().collect(),
            unref_prp_pool: self.unref_prp.iter().copied().filter(|d| *d != self.prp_parent).collect(),
            votes_on_prp,
            hash_power,
        }
    }

    /// Accepts a transaction into the mempool. It becomes eligible for
    /// inclusion at `release_at`.
    pub fn receive_transaction(&mut self, tx: Transaction, release_at: f64) -> Result<(), TxReject> {
        tx.check_well_formed().map_err(TxReject::BadSignature)?;
        if tx.inputs().iter().any(|op| self.included.contains_key(op)) {
            return Err(TxReject::Conflict);
        }
        self.mempool.insert(tx, release_at).map_err(|e| match e {
            MempoolReject::Duplicate => TxReject::Duplicate,
            MempoolReject::Conflict => TxReject::Conflict,
        })
    }

    /// Removes a pending transaction (e.g. one this node just mined).
    pub fn drop_pending(&mut self, id: &Digest) -> bool {
        self.mempool.remove(id).is_some()
    }

    /// Processes a received block. Blocks with missing dependencies are
    /// buffered; storing a block releases any orphans waiting on it.
    pub fn receive_block(&mut self, block: Arc<Block>) -> Result<Vec<StateChange>, ReceiveError> {
        let d = block.digest();
        if self.contains(&d) || self.orphans.contains_key(&d) {
            return Ok(vec![StateChange::Duplicate(d)]);
        }
        if self.cfg.validate_blocks {
            validate_block(&block, &self.cfg.sortition)?;
        }
        let missing: Vec<Digest> = {
            let mut seen = BTreeSet::new();
            block.dependencies().into_iter().filter(|x| !self.contains(x) && seen.insert(*x)).collect()
        };
        if !missing.is_empty() {
            for m in &missing {
                self.waiting.entry(*m).or_default().push(d);
            }
            self.orphans.insert(d, (block, missing.len()));
            return Ok(vec![StateChange::Orphaned { block: d, missing }]);
        }
        let first = self.store(&block)?;
        let mut changes = vec![first];
        let mut ready = vec![d];
        while let Some(done) = ready.pop() {
            for w in self.waiting.remove(&done).unwrap_or_default() {
                let Some(entry) = self.orphans.get_mut(&w) else { continue };
                entry.1 -= 1;
                if entry.1 == 0 {
                    let (b, _) = self.orphans.remove(&w).expect("present");
                    match self.store(&b) {
                        Ok(c) => {
                            changes.push(c);
                            ready.push(w);
                        }
                        Err(_) => changes.push(StateChange::Dropped { block: w }),
                    }
                }
            }
        }
        Ok(changes)
    }

    fn store(&mut self, b: &Arc<Block>) -> Result<StateChange, ReceiveError> {
        let d = b.digest();
        let change = match b.kind() {
            BlockType::Transaction => {
                for tx in b.transactions() {
                    self.mempool.remove_conflicting(tx);
                    for op in tx.inputs() {
                        self.included.entry(*op).or_insert(tx.id());
                    }
                }
                self.unref_tx.insert(d);
                self.tx_block_count += 1;
                StateChange::TxBlockStored { block: d }
            }
            BlockType::Proposer => {
                let parent = b.parent().expect("validated");
                let level = b.level().expect("validated");
                let plevel = self.proposer_level(&parent).ok_or(ReceiveError::Inconsistent("parent not a proposer"))?;
                if plevel + 1 != level {
                    return Err(ReceiveError::Inconsistent("level is not parent level + 1"));
                }
                if !b.proposer_refs().iter().all(|r| self.is_proposer(r)) {
                    return Err(ReceiveError::Inconsistent("reference is not a proposer block"));
                }
                if !b.tx_block_refs().iter().all(|r| self.is_tx_block(r)) {
                    return Err(ReceiveError::Inconsistent("reference is not a transaction block"));
                }
                self.arrivals += 1;
                self.proposers.insert(d, ProposerMeta { level, arrival: self.arrivals });
                if self.levels.len() as u64 == level {
                    self.levels.push(Vec::new());
                }
                self.levels[level as usize].push(d);
                self.unref_prp.shift_remove(&parent);
                for r in b.proposer_refs() {
                    self.unref_prp.shift_remove(r);
                }
                for r in b.tx_block_refs() {
                    self.unref_tx.shift_remove(r);
                }
                self.unref_prp.insert(d);
                let new_parent = level > self.proposer_level(&self.prp_parent).unwrap_or(0);
                if new_parent {
                    self.prp_parent = d;
                }
                StateChange::ProposerStored { block: d, level, new_parent }
            }
            BlockType::Voter(chain) => {
                let parent = b.parent().expect("validated");
                let tree = &self.voters[chain as usize];
                let last = tree.last_voted(&parent).ok_or(ReceiveError::Inconsistent("parent not on this chain"))?;
                for (k, v) in b.votes().iter().enumerate() {
                    if self.proposer_level(v) != Some(last + 1 + k as u64) {
                        return Err(ReceiveError::Inconsistent("votes are not on consecutive levels"));
                    }
                }
                let last_voted = last + b.votes().len() as u64;
                let (new_tip, reorg) = self.voters[chain as usize].insert(b, last_voted, &self.blocks);
                StateChange::VoterStored { block: d, chain, new_tip, reorg }
            }
        };
        self.blocks.insert(d, b.clone());
        Ok(change)
    }

    /// Order-independent summary of the state, used for comparisons and
    /// JSON export.
    pub fn snapshot(&self) -> ChainSnapshot {
        ChainSnapshot {
            blocks: self.blocks.keys().copied().collect(),
            proposer_levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(l, ds)| (l as u64, ds.iter().copied().collect()))
                .collect(),
            voter_heights: self.voters.iter().map(VoterTree::height).collect(),
            unreferenced_tx_blocks: self.unref_tx.iter().copied().collect(),
            unreferenced_proposers: self.unref_prp.iter().copied().collect(),
            orphans: self.orphans.keys().copied().collect(),
            max_level: self.max_level(),
        }
    }

    /// Arrival rank of a proposer block (lower is earlier).
    pub fn proposer_arrival(&self, d: &Digest) -> Option<u64> {
        self.proposers.get(d).map(|p| p.arrival)
    }
}

/// Arrival-order-free view of a [`ChainState`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSnapshot {
    pub blocks: BTreeSet<Digest>,
    pub proposer_levels: BTreeMap<u64, BTreeSet<Digest>>,
    pub voter_heights: Vec<u64>,
    pub unreferenced_tx_blocks: BTreeSet<Digest>,
    pub unreferenced_proposers: BTreeSet<Digest>,
    pub orphans: BTreeSet<Digest>,
    pub max_level: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{Keypair, SignatureScheme};
    use crate::ledger::TxOutput;
    use crate::mining::assemble_superblock;

    fn state(m: u32, vote_mode: VoteMode) -> ChainState {
        ChainState::new(ChainConfig {
            sortition: SortitionParams { voter_chains: m, tx_rate: 1.0, proposer_rate: 1.0, voter_rate: 1.0 },
            tx_capacity: 10,
            vote_mode,
            validate_blocks: true,
        })
    }

    fn mine(s: &ChainState, kind: BlockType, nonce: u64, edit: impl FnOnce(&mut MinerContext)) -> Arc<Block> {
        let mut ctx = s.miner_context(f64::INFINITY, 1.0);
        edit(&mut ctx);
        Arc::new(assemble_superblock(&ctx).into_block(kind, nonce, 0))
    }

    fn spend(seed: u8, to: u8) -> Transaction {
        let k = Keypair::from_seed(SignatureScheme::Mock, [seed; 32]);
        let to = Keypair::from_seed(SignatureScheme::Mock, [to; 32]).public();
        Transaction::signed(
            vec![OutPoint::new(Digest::hash(b"coin"), seed as u32)],
            vec![TxOutput { value: 1, owner: to }],
            &[&k],
        )
    }

    #[test]
    fn starts_at_genesis() {
        let s = state(3, VoteMode::FirstSeen);
        assert_eq!(s.max_level(), 0);
        assert_eq!(s.prp_parent(), genesis::proposer());
        assert_eq!(s.snapshot().voter_heights, vec![0, 0, 0]);
        assert_eq!(s.leader_by_votes(1), None);
    }

    #[test]
    fn voter_block_votes_on_the_new_level() {
        let mut s = state(2, VoteMode::FirstSeen);
        let p = mine(&s, BlockType::Proposer, 1, |_| {});
        let changes = s.receive_block(p.clone()).unwrap();
        assert_eq!(changes, vec![StateChange::ProposerStored { block: p.digest(), level: 1, new_parent: true }]);
        let v = mine(&s, BlockType::Voter(1), 2, |_| {});
        assert_eq!(v.votes(), &[p.digest()]);
        s.receive_block(v).unwrap();
        assert_eq!(s.vote_and_depth(1, 1), Some((p.digest(), 1)));
        assert_eq!(s.leader_by_votes(1), Some(p.digest()));
        assert_eq!(s.voter_tree(1).height(), 1);
    }

    #[test]
    fn orphans_wait_for_dependencies() {
        let mut s = state(2, VoteMode::FirstSeen);
        let mut ahead = s.clone();
        let p = mine(&ahead, BlockType::Proposer, 1, |_| {});
        ahead.receive_block(p.clone()).unwrap();
        let v = mine(&ahead, BlockType::Voter(0), 2, |_| {});
        let r = s.receive_block(v.clone()).unwrap();
        assert_eq!(r, vec![StateChange::Orphaned { block: v.digest(), missing: vec![p.digest()] }]);
        assert!(s.is_orphan(&v.digest()));
        let r = s.receive_block(p).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(s.orphan_count(), 0);
        assert!(s.contains(&v.digest()));
        assert_eq!(s.receive_block(v.clone()).unwrap(), vec![StateChange::Duplicate(v.digest())]);
    }

    #[test]
    fn vote_mode_decides_between_rival_proposers() {
        for (mode, expect_second) in [(VoteMode::FirstSeen, false), (VoteMode::MostVoted, true)] {
            let mut s = state(3, mode);
            let first = mine(&s, BlockType::Proposer, 1, |_| {});
            let second = mine(&s, BlockType::Proposer, 2, |_| {});
            s.receive_block(first.clone()).unwrap();
            s.receive_block(second.clone()).unwrap();
            for chain in 0..2 {
                let v = mine(&s, BlockType::Voter(chain), 10 + chain as u64, |c| {
                    c.votes_on_prp[chain as usize] = vec![second.digest()]
                });
                s.receive_block(v).unwrap();
            }
            let want = if expect_second { second.digest() } else { first.digest() };
            assert_eq!(s.vote_choice(1), Some(want), "{mode:?}");
            assert_eq!(s.leader_by_votes(1), Some(second.digest()));
        }
    }

    #[test]
    fn included_inputs_block_conflicting_transactions() {
        let mut s = state(1, VoteMode::FirstSeen);
        let t = mine(&s, BlockType::Transaction, 1, |c| c.tx_pool = vec![spend(4, 1)]);
        s.receive_block(t).unwrap();
        assert_eq!(s.receive_transaction(spend(4, 2), 0.0), Err(TxReject::Conflict));
        s.receive_transaction(spend(5, 2), 0.0).unwrap();
        assert_eq!(s.receive_transaction(spend(5, 2), 0.0), Err(TxReject::Duplicate));
        assert_eq!(s.mempool().len(), 1);
    }

    #[test]
    fn invalid_blocks_are_rejected() {
        let wide = state(4, VoteMode::FirstSeen);
        let b = mine(&wide, BlockType::Voter(3), 1, |_| {});
        let mut s = state(2, VoteMode::FirstSeen);
        assert!(matches!(s.receive_block(b), Err(ReceiveError::Invalid(_))));
    }

    #[test]
    fn forked_voter_blocks_count_as_forking() {
        let mut s = state(1, VoteMode::FirstSeen);
        s.receive_block(mine(&s, BlockType::Proposer, 1, |_| {})).unwrap();
        let a = mine(&s, BlockType::Voter(0), 2, |_| {});
        let b = mine(&s, BlockType::Voter(0), 3, |_| {});
        s.receive_block(a.clone()).unwrap();
        let r = s.receive_block(b).unwrap();
        assert!(matches!(r[0], StateChange::VoterStored { new_tip: false, .. }));
        assert_eq!(s.voter_tree(0).tip(), a.digest());
        assert!((s.voter_forking_rate() - 0.5).abs() < 1e-12);
        assert_eq!(s.proposer_forking_rate(), 0.0);
    }
    #[test]
    fn genesis_context_has_nothing_to_vote_or_reference() {
        let mut s = state(3, VoteMode::FirstSeen);
        s.receive_transaction(spend(1, 2), 0.0).unwrap();
        let ctx = s.miner_context(1.0, 1.0);
        assert!(ctx.votes_on_prp.iter().all(Vec::is_empty));
        assert!(ctx.unref_prp_pool.is_empty() && ctx.unref_tx_pool.is_empty());
        assert_eq!(ctx.tx_pool, vec![spend(1, 2)]);
        assert_eq!(ctx.vt_parent, (0..3).map(genesis::voter).collect::<Vec<_>>());
    }

    #[test]
    fn voters_only_vote_on_levels_above_their_last_vote() {
        let mut s = state(2, VoteMode::FirstSeen);
        let p1 = mine(&s, BlockType::Proposer, 1, |_| {});
        s.receive_block(p1.clone()).unwrap();
        assert_eq!(s.miner_context(0.0, 1.0).votes_on_prp, vec![vec![p1.digest()]; 2]);
        s.receive_block(mine(&s, BlockType::Voter(0), 2, |_| {})).unwrap();
        let p2 = mine(&s, BlockType::Proposer, 3, |_| {});
        s.receive_block(p2.clone()).unwrap();
        let ctx = s.miner_context(0.0, 1.0);
        assert_eq!(ctx.votes_on_prp[0], vec![p2.digest()]);
        assert_eq!(ctx.votes_on_prp[1], vec![p1.digest(), p2.digest()]);
    }

    #[test]
    fn vote_depth_counts_the_voting_block() {
        let mut s = state(1, VoteMode::FirstSeen);
        let p = mine(&s, BlockType::Proposer, 1, |_| {});
        s.receive_block(p.clone()).unwrap();
        s.receive_block(mine(&s, BlockType::Voter(0), 2, |_| {})).unwrap();
        assert_eq!(s.vote_and_depth(0, 1), Some((p.digest(), 1)));
        for nonce in 3..6 {
            s.receive_block(mine(&s, BlockType::Voter(0), nonce, |_| {})).unwrap();
        }
        assert_eq!(s.vote_and_depth(0, 1), Some((p.digest(), 4)));
        assert_eq!(s.vote_and_depth(0, 2), None);
    }

    #[test]
    fn overtaking_fork_replaces_the_votes() {
        let mut s = state(1, VoteMode::FirstSeen);
        let p1 = mine(&s, BlockType::Proposer, 1, |_| {});
        s.receive_block(p1.clone()).unwrap();
        let p2 = mine(&s, BlockType::Proposer, 2, |_| {});
        s.receive_block(p2.clone()).unwrap();
        let a1 = mine(&s, BlockType::Voter(0), 3, |_| {});
        assert_eq!(a1.votes(), &[p1.digest(), p2.digest()]);
        let b1 = mine(&s, BlockType::Voter(0), 4, |c| c.votes_on_prp[0] = vec![p1.digest()]);
        s.receive_block(a1.clone()).unwrap();
        let r = s.receive_block(b1.clone()).unwrap();
        assert_eq!(r, vec![StateChange::VoterStored { block: b1.digest(), chain: 0, new_tip: false, reorg: false }]);
        assert_eq!(s.miner_context(0.0, 1.0).votes_on_prp[0], Vec::<Digest>::new());
        let b2 = mine(&s, BlockType::Voter(0), 5, |c| {
            c.vt_parent[0] = b1.digest();
            c.votes_on_prp[0] = vec![];
        });
        let r = s.receive_block(b2.clone()).unwrap();
        assert_eq!(r, vec![StateChange::VoterStored { block: b2.digest(), chain: 0, new_tip: true, reorg: true }]);
        assert_eq!(s.voter_tree(0).main_chain(), &[genesis::voter(0), b1.digest(), b2.digest()]);
        assert_eq!(s.vote_and_depth(0, 1), Some((p1.digest(), 2)));
        assert_eq!(s.vote_and_depth(0, 2), None);
        assert_eq!(s.miner_context(0.0, 1.0).votes_on_prp[0], vec![p2.digest()]);
        let extend = s.receive_block(mine(&s, BlockType::Voter(0), 6, |_| {})).unwrap();
        assert!(matches!(extend[0], StateChange::VoterStored { new_tip: true, reorg: false, .. }));
        assert_eq!(s.vote_and_depth(0, 2).map(|v| v.1), Some(1));
    }
}
