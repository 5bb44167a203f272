//! Mines one superblock, prunes it to each block type and checks that the
//! Merkle proofs bind the block to its slot.

use prism_core::block::{genesis, BlockType};
use prism_core::merkle::merkle_verify_hash;
use prism_core::mining::{assemble_superblock, MinerContext};
use prism_core::sortition::{sortition, SortitionParams};
use prism_core::validate::validate_block;
use rand::{Rng, SeedableRng};

fn main() {
    let params = SortitionParams { voter_chains: 6, tx_rate: 2.0, proposer_rate: 0.5, voter_rate: 0.5 };
    let m = params.voter_chains;
    let ctx = MinerContext {
        prp_parent: genesis::proposer(),
        prp_parent_level: 0,
        vt_parent: (0..m).map(genesis::voter).collect(),
        votes_on_prp: vec![vec![]; m as usize],
        hash_power: 1.0,
        ..Default::default()
    };
    let superblock = assemble_superblock(&ctx);
    println!("superblock with {} slots, parent root {}", superblock.slot_count(), superblock.parent_root());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for nonce in 0..6 {
        let kind = sortition(rng.gen(), &params);
        let block = superblock.clone().into_block(kind, nonce, 0);
        let p = &block.proof().content;
        println!(
            "nonce {nonce}: {:<14} slot {:>2}  proof of {} hashes  content proof ok: {}  valid: {}",
            format!("{kind:?}"),
            p.leaf_index,
            p.siblings.len(),
            merkle_verify_hash(&block.header().content_root, &block.content_hash(), p),
            validate_block(&block, &params).is_ok()
        );
    }

    let block = superblock.into_block(BlockType::Voter(2), 99, 0);
    let wrong = SortitionParams { voter_chains: m + 1, ..params };
    println!("same block checked against {} chains: {:?}", m + 1, validate_block(&block, &wrong).err());
}
