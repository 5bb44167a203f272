//! Stateless block validation.

use thiserror::Error;

use crate::block::{parent_leaf, Block, BlockType, Content};
use crate::digest::Digest;
use crate::merkle::{merkle_verify, merkle_verify_hash};
use crate::sortition::SortitionParams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("sortition proof rejected: {0}")]
    BadSortitionProof(&'static str),
    #[error("content does not match block type: {0}")]
    MalformedContent(&'static str),
    #[error("transaction {tx} carries an invalid signature")]
    BadSignature { tx: Digest },
}

/// Checks a block without any chain context:
///
/// 1. both Merkle proofs open the header roots at the slot that matches the
///    claimed block type;
/// 2. the content shape matches the block type;
/// 3. every transaction in a transaction block is well formed and its
///    witnesses verify.
pub fn validate_block(block: &Block, params: &SortitionParams) -> Result<(), ValidationError> {
    let m = params.voter_chains;
    let kind = block.kind();
    if let BlockType::Voter(i) = kind {
        if i >= m {
            return Err(ValidationError::MalformedContent("voter chain index out of range"));
        }
    }
    let slot = kind.slot(m);
    let proof = block.proof();
    for p in [&proof.parent, &proof.content] {
        if p.leaf_count != m + 2 {
            return Err(ValidationError::BadSortitionProof("leaf count differs from m + 2"));
        }
        if p.leaf_index != slot {
            return Err(ValidationError::BadSortitionProof("leaf index differs from block type"));
        }
    }
    if !merkle_verify_hash(&block.header().content_root, &block.content_hash(), &proof.content) {
        return Err(ValidationError::BadSortitionProof("content proof"));
    }
    if !merkle_verify(&block.header().parent_root, parent_leaf(block.parent().as_ref()), &proof.parent) {
        return Err(ValidationError::BadSortitionProof("parent proof"));
    }

    match (kind, block.content()) {
        (BlockType::Transaction, Content::Transactions(txs)) => {
            if block.parent().is_some() || block.level().is_some() {
                return Err(ValidationError::MalformedContent("transaction block with parent or level"));
            }
            for tx in txs {
                tx.check_well_formed().map_err(|_| ValidationError::BadSignature { tx: tx.id() })?;
            }
        }
        (BlockType::Proposer, Content::Proposer { proposer_refs, .. }) => {
            if block.parent().is_none() {
                return Err(ValidationError::MalformedContent("proposer block without parent"));
            }
            match block.level() {
                Some(l) if l >= 1 => {}
                _ => return Err(ValidationError::MalformedContent("proposer block without level")),
            }
            if proposer_refs.contains(&block.parent().expect("checked")) {
                return Err(ValidationError::MalformedContent("parent repeated in references"));
            }
        }
        (BlockType::Voter(_), Content::Votes(_)) => {
            if block.parent().is_none() || block.level().is_some() {
                return Err(ValidationError::MalformedContent("voter block parent or level"));
            }
        }
        _ => return Err(ValidationError::MalformedContent("content variant")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::genesis;
    use crate::crypto::{Keypair, SignatureScheme};
    use crate::ledger::{OutPoint, Transaction, TxOutput};
    use crate::mining::{assemble_superblock, MinerContext};

    const M: u32 = 4;

    fn params() -> SortitionParams {
        SortitionParams { voter_chains: M, tx_rate: 1.0, proposer_rate: 1.0, voter_rate: 1.0 }
    }

    fn tx() -> Transaction {
        let k = Keypair::from_seed(SignatureScheme::Mock, [1; 32]);
        Transaction::signed(vec![OutPoint::new(Digest::hash(b"v"), 0)], vec![TxOutput { value: 1, owner: k.public() }], &[&k])
    }

    fn block(kind: BlockType) -> Block {
        let ctx = MinerContext {
            prp_parent: genesis::proposer(),
            prp_parent_level: 0,
            vt_parent: (0..M).map(genesis::voter).collect(),
            votes_on_prp: vec![vec![]; M as usize],
            tx_pool: vec![tx()],
            hash_power: 1.0,
            ..Default::default()
        };
        assemble_superblock(&ctx).into_block(kind, 3, 0)
    }

    fn rebuild(b: &Block, kind: BlockType, parent: Option<Digest>, level: Option<u64>, content: Content) -> Block {
        Block::from_parts(*b.header(), kind, parent, level, content, b.proof().clone(), b.miner())
    }

    #[test]
    fn honest_blocks_pass() {
        for kind in [BlockType::Transaction, BlockType::Proposer, BlockType::Voter(0), BlockType::Voter(M - 1)] {
            assert_eq!(validate_block(&block(kind), &params()), Ok(()), "{kind:?}");
        }
    }

    #[test]
    fn relabelled_type_fails_the_proof() {
        let b = block(BlockType::Voter(1));
        let forged = rebuild(&b, BlockType::Voter(2), b.parent(), None, b.content().clone());
        assert_eq!(
            validate_block(&forged, &params()),
            Err(ValidationError::BadSortitionProof("leaf index differs from block type"))
        );
    }

    #[test]
    fn swapped_content_fails_the_proof() {
        let b = block(BlockType::Transaction);
        let forged = rebuild(&b, b.kind(), None, None, Content::Transactions(vec![]));
        assert_eq!(validate_block(&forged, &params()), Err(ValidationError::BadSortitionProof("content proof")));
    }

    #[test]
    fn swapped_parent_fails_the_proof() {
        let b = block(BlockType::Voter(0));
        let forged = rebuild(&b, b.kind(), Some(genesis::voter(3)), None, b.content().clone());
        assert_eq!(validate_block(&forged, &params()), Err(ValidationError::BadSortitionProof("parent proof")));
    }

    #[test]
    fn wrong_chain_count_is_rejected() {
        let b = block(BlockType::Proposer);
        let wide = SortitionParams { voter_chains: M + 1, ..params() };
        assert!(matches!(validate_block(&b, &wide), Err(ValidationError::BadSortitionProof(_))));
        let out_of_range = rebuild(&b, BlockType::Voter(M), b.parent(), None, Content::Votes(vec![]));
        assert!(matches!(validate_block(&out_of_range, &params()), Err(ValidationError::MalformedContent(_))));
    }

    #[test]
    fn proposer_without_level_is_malformed() {
        let b = block(BlockType::Proposer);
        let forged = rebuild(&b, b.kind(), b.parent(), None, b.content().clone());
        assert_eq!(
            validate_block(&forged, &params()),
            Err(ValidationError::MalformedContent("proposer block without level"))
        );
    }
}
