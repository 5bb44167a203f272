//! Chain fixtures shared by unit tests.

use std::sync::Arc;

use crate::block::{Block, BlockType};
use crate::chain::{ChainConfig, ChainState, VoteMode};
use crate::crypto::{Keypair, SignatureScheme};
use crate::digest::Digest;
use crate::ledger::{OutPoint, Transaction, TxOutput, Utxo, UtxoSet};
use crate::mining::{assemble_superblock, MinerContext};
use crate::sortition::SortitionParams;

pub const M: u32 = 8;

pub fn key() -> Keypair {
    Keypair::from_seed(SignatureScheme::Mock, [2; 32])
}

pub fn coin() -> OutPoint {
    OutPoint::new(Digest::hash(b"ledger-test"), 0)
}

pub fn mine(s: &ChainState, kind: BlockType, nonce: u64, edit: impl FnOnce(&mut MinerContext)) -> Arc<Block> {
    let mut ctx = s.miner_context(f64::INFINITY, 1.0);
    edit(&mut ctx);
    Arc::new(assemble_superblock(&ctx).into_block(kind, nonce, 0))
}

/// One proposer block at level 1 referencing a transaction block that
/// spends the funded coin, buried under `depth` voter blocks per chain.
pub fn confirmed_chain(depth: u64) -> (ChainState, Transaction, Digest) {
    let mut s = ChainState::new(ChainConfig {
        sortition: SortitionParams { voter_chains: M, tx_rate: 1.0, proposer_rate: 1.0, voter_rate: 1.0 },
        tx_capacity: 10,
        vote_mode: VoteMode::FirstSeen,
        validate_blocks: true,
    });
    let tx = Transaction::signed(vec![coin()], vec![TxOutput { value: 10, owner: key().public() }], &[&key()]);
    let t = {
        let tx = tx.clone();
        mine(&s, BlockType::Transaction, 1, move |c| c.tx_pool = vec![tx])
    };
    s.receive_block(t).unwrap();
    let p = mine(&s, BlockType::Proposer, 2, |_| {});
    s.receive_block(p.clone()).unwrap();
    let mut nonce = 10;
    for _ in 0..depth {
        for chain in 0..M {
            nonce += 1;
            s.receive_block(mine(&s, BlockType::Voter(chain), nonce, |_| {})).unwrap();
        }
    }
    (s, tx, p.digest())
}

pub fn initial() -> UtxoSet {
    UtxoSet::from_list([Utxo { id: coin(), value: 10, owner: key().public() }])
}
