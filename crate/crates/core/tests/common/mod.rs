//! Shared fixtures and independent reference models for the integration
//! and acceptance tests.
#![allow(dead_code)]

use std::sync::Arc;

use prism_core::block::{Block, BlockType};
use prism_core::chain::{ChainConfig, ChainState, VoteMode};
use prism_core::config::ExperimentConfig;
use prism_core::crypto::{Keypair, SignatureScheme};
use prism_core::digest::Digest;
use prism_core::ledger::{OutPoint, Transaction, TxOutput, Utxo, UtxoSet};
use prism_core::mining::{assemble_superblock, MinerContext};
use prism_core::sortition::SortitionParams;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

pub fn chain_config(m: u32) -> ChainConfig {
    ChainConfig {
        sortition: SortitionParams { voter_chains: m, tx_rate: 1.0, proposer_rate: 0.1, voter_rate: 0.1 },
        tx_capacity: 1000,
        vote_mode: VoteMode::FirstSeen,
        validate_blocks: true,
    }
}

/// Mines a block of `kind` from `state`'s current context after `edit`.
pub fn mine_with(state: &ChainState, kind: BlockType, nonce: u64, edit: impl FnOnce(&mut MinerContext)) -> Arc<Block> {
    let mut ctx = state.miner_context(f64::INFINITY, 1.0);
    edit(&mut ctx);
    Arc::new(assemble_superblock(&ctx).into_block(kind, nonce, 0))
}

pub fn mine(state: &ChainState, kind: BlockType, nonce: u64) -> Arc<Block> {
    mine_with(state, kind, nonce, |_| {})
}

pub fn key(i: u8) -> Keypair {
    Keypair::from_seed(SignatureScheme::Mock, [i; 32])
}

pub fn coin(i: u32) -> OutPoint {
    OutPoint::new(Digest::hash(b"test-funding"), i)
}

/// `coins` coins of value 100, coin `i` owned by `key(i % 4)`.
pub fn funded(coins: u32) -> UtxoSet {
    UtxoSet::from_list((0..coins).map(|i| Utxo { id: coin(i), value: 100, owner: key((i % 4) as u8).public() }))
}

pub fn pay(input: u32, to: u8) -> Transaction {
    Transaction::signed(vec![coin(input)], vec![TxOutput { value: 100, owner: key(to).public() }], &[&key((input % 4) as u8)])
}

/// The two-level worked example of ledger formation: the level-1 leader
/// references a block with `a`; the other level-1 block references blocks
/// with `a` and `b`; the level-2 leader has the latter as parent, references
/// the level-1 leader, then blocks with `d` and `c`, which double spend.
pub struct LedgerExample {
    pub state: ChainState,
    pub leaders: Vec<Digest>,
    pub a: Transaction,
    pub b: Transaction,
    pub c: Transaction,
    pub d: Transaction,
    pub initial: UtxoSet,
}

pub fn ledger_example() -> LedgerExample {
    let mut s = ChainState::new(chain_config(3));
    let (a, b) = (pay(0, 9), pay(1, 9));
    let (c, d) = (pay(2, 7), pay(2, 8));
    let tx_block = |s: &ChainState, tx: &Transaction, nonce| {
        let tx = tx.clone();
        mine_with(s, BlockType::Transaction, nonce, move |ctx| ctx.tx_pool = vec![tx])
    };
    let ta1 = tx_block(&s, &a, 1);
    let ta2 = tx_block(&s, &a, 2);
    let tb = tx_block(&s, &b, 3);
    let td = tx_block(&s, &d, 4);
    let tc = tx_block(&s, &c, 5);
    for t in [&ta1, &ta2, &tb, &td, &tc] {
        s.receive_block(t.clone()).unwrap();
    }
    let genesis = s.prp_parent();
    let p1_left = mine_with(&s, BlockType::Proposer, 10, |ctx| {
        ctx.prp_parent = genesis;
        ctx.prp_parent_level = 0;
        ctx.unref_prp_pool.clear();
        ctx.unref_tx_pool = vec![ta1.digest()];
    });
    let p1_right = mine_with(&s, BlockType::Proposer, 11, |ctx| {
        ctx.prp_parent = genesis;
        ctx.prp_parent_level = 0;
        ctx.unref_prp_pool.clear();
        ctx.unref_tx_pool = vec![ta2.digest(), tb.digest()];
    });
    s.receive_block(p1_left.clone()).unwrap();
    s.receive_block(p1_right.clone()).unwrap();
    let p2 = mine_with(&s, BlockType::Proposer, 12, |ctx| {
        ctx.prp_parent = p1_right.digest();
        ctx.prp_parent_level = 1;
        ctx.unref_prp_pool = vec![p1_left.digest()];
        ctx.unref_tx_pool = vec![td.digest(), tc.digest()];
    });
    s.receive_block(p2.clone()).unwrap();
    LedgerExample { state: s, leaders: vec![p1_left.digest(), p2.digest()], a, b, c, d, initial: funded(4) }
}

/// Gambler's-ruin walk: from deficit `z`, each block is adversarial with
/// probability `beta`. True if the deficit ever reaches zero.
fn catches_up<R: Rng>(mut z: i64, beta: f64, rng: &mut R) -> bool {
    const GIVE_UP: i64 = 80;
    while z > 0 {
        if z > GIVE_UP {
            return false;
        }
        if rng.gen::<f64>() < beta {
            z -= 1;
        } else {
            z += 1;
        }
    }
    true
}

/// Monte-Carlo probability that a vote at depth `d` is permanent when the
/// adversary's private head start is Poisson with mean `adv_depth`.
pub fn vote_permanence_mc<R: Rng>(d: u64, adv_depth: f64, beta: f64, trials: u32, rng: &mut R) -> f64 {
    let pois = (adv_depth > 0.0).then(|| Poisson::new(adv_depth).unwrap());
    let mut permanent = 0u32;
    for _ in 0..trials {
        let z = pois.as_ref().map_or(0, |p| p.sample(rng) as u64);
        if z > d {
            continue;
        }
        if !catches_up((d + 1 - z) as i64, beta, rng) {
            permanent += 1;
        }
    }
    permanent as f64 / trials as f64
}

/// Monte-Carlo probability that a block `k` deep on one longest chain is
/// eventually reversed.
pub fn nakamoto_mc<R: Rng>(k: u32, beta: f64, trials: u32, rng: &mut R) -> f64 {
    let pois = Poisson::new(k as f64 * beta / (1.0 - beta)).unwrap();
    let mut reversed = 0u32;
    for _ in 0..trials {
        let z = pois.sample(rng) as i64;
        if z >= k as i64 || catches_up(k as i64 - z, beta, rng) {
            reversed += 1;
        }
    }
    reversed as f64 / trials as f64
}

/// Random transactions over a small coin pool: inputs drawn from genesis
/// coins and earlier outputs (some never created), values that sometimes
/// overspend, and occasionally the wrong signer.
pub fn random_transactions<R: Rng>(rng: &mut R, coins: u32, count: usize) -> Vec<Transaction> {
    let mut outputs: Vec<(OutPoint, u8)> = (0..coins).map(|i| (coin(i), (i % 4) as u8)).collect();
    let mut txs = Vec::with_capacity(count);
    for _ in 0..count {
        let n_in = rng.gen_range(1..=2);
        let mut inputs = Vec::new();
        let mut signers = Vec::new();
        for _ in 0..n_in {
            let (op, owner) = if rng.gen_bool(0.1) {
                (OutPoint::new(Digest::hash(&rng.gen::<[u8; 8]>()), 0), 0)
            } else {
                outputs[rng.gen_range(0..outputs.len())]
            };
            inputs.push(op);
            signers.push(if rng.gen_bool(0.05) { key(owner.wrapping_add(1) % 6) } else { key(owner) });
        }
        let n_out = rng.gen_range(1..=2);
        let total: u64 = if rng.gen_bool(0.1) { 10_000 } else { 50 };
        let outs: Vec<TxOutput> = (0..n_out)
            .map(|_| {
                let owner = rng.gen_range(0..6u8);
                TxOutput { value: total / n_out as u64, owner: key(owner).public() }
            })
            .collect();
        let refs: Vec<&Keypair> = signers.iter().collect();
        let tx = Transaction::signed(inputs, outs.clone(), &refs);
        for (i, o) in outs.iter().enumerate() {
            let owner = (0..6u8).find(|k| key(*k).public() == o.owner).unwrap();
            outputs.push((OutPoint::new(tx.id(), i as u32), owner));
        }
        txs.push(tx);
    }
    txs
}

/// A small, fast Prism configuration for integration tests.
pub fn small_prism(duration: f64) -> ExperimentConfig {
    ExperimentConfig::from_profile(
        "desk",
        Some(serde_json::json!({
            "duration": duration,
            "drain": 10.0,
            "checkpoint_interval": 10.0,
            "network": { "nodes": 10 },
            "prism": { "voter_chains": 20, "tx_rate": 2.0, "proposer_rate": 0.2, "voter_rate": 0.2 },
            "workload": { "kind": "poisson", "tps": 40.0 }
        })),
    )
    .expect("valid test config")
}
