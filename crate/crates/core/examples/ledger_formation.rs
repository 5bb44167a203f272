//! Builds a tiny block DAG by hand: two transaction blocks that double spend
//! one coin, a proposer block referencing both, and enough votes to confirm
//! it. Prints the raw and sanitized ledgers.

use std::sync::Arc;

use prism_core::block::BlockType;
use prism_core::chain::{ChainConfig, ChainState, VoteMode};
use prism_core::confirmation::{build_ledger, confirmed_ledger, ConfirmationParams};
use prism_core::crypto::{Keypair, SignatureScheme};
use prism_core::digest::Digest;
use prism_core::ledger::{OutPoint, Transaction, TxOutput, Utxo, UtxoSet};
use prism_core::mining::assemble_superblock;
use prism_core::sortition::SortitionParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 10;
    let mut state = ChainState::new(ChainConfig {
        sortition: SortitionParams { voter_chains: m, tx_rate: 1.0, proposer_rate: 1.0, voter_rate: 1.0 },
        tx_capacity: 10,
        vote_mode: VoteMode::FirstSeen,
        validate_blocks: true,
    });
    let alice = Keypair::from_seed(SignatureScheme::Ed25519, [1; 32]);
    let bob = Keypair::from_seed(SignatureScheme::Ed25519, [2; 32]);
    let carol = Keypair::from_seed(SignatureScheme::Ed25519, [3; 32]);
    let coin = OutPoint::new(Digest::hash(b"alice's coin"), 0);
    let initial = UtxoSet::from_list([Utxo { id: coin, value: 50, owner: alice.public() }]);
    let to_bob = Transaction::signed(vec![coin], vec![TxOutput { value: 50, owner: bob.public() }], &[&alice]);
    let to_carol = Transaction::signed(vec![coin], vec![TxOutput { value: 50, owner: carol.public() }], &[&alice]);

    let mut nonce = 0;
    let mut mine = |state: &mut ChainState, kind: BlockType, pool: Vec<Transaction>| {
        nonce += 1;
        let mut ctx = state.miner_context(f64::INFINITY, 1.0);
        ctx.tx_pool = pool;
        let block = Arc::new(assemble_superblock(&ctx).into_block(kind, nonce, 0));
        state.receive_block(block.clone()).expect("valid block");
        block
    };
    mine(&mut state, BlockType::Transaction, vec![to_bob.clone()]);
    mine(&mut state, BlockType::Transaction, vec![to_carol.clone()]);
    let proposer = mine(&mut state, BlockType::Proposer, vec![]);
    for _ in 0..30 {
        for chain in 0..m {
            mine(&mut state, BlockType::Voter(chain), vec![]);
        }
    }

    let name = |t: &Transaction| if t.id() == to_bob.id() { "alice -> bob" } else { "alice -> carol" };
    let raw = build_ledger(&[proposer.digest()], &state)?;
    println!("raw ledger:       {:?}", raw.iter().map(name).collect::<Vec<_>>());
    let params = ConfirmationParams::new(0.25, 1e-3);
    let kept = confirmed_ledger(&state, &params, &initial);
    println!("sanitized ledger: {:?}", kept.iter().map(name).collect::<Vec<_>>());
    println!("leader by votes at level 1 is the proposer block: {}", state.leader_by_votes(1) == Some(proposer.digest()));
    Ok(())
}
