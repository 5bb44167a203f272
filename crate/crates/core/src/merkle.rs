//! Binary SHA-256 Merkle trees with inclusion proofs.
//!
//! Leaves are hashed once (`H(leaf)`), internal nodes hash the concatenation
//! of their children, and a level with an odd number of nodes pairs its last
//! node with itself. A single leaf's root is therefore `H(leaf)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};
use crate::digest::Digest;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MerkleError {
    #[error("cannot build a Merkle tree with no leaves")]
    Empty,
    #[error("leaf index {index} out of range for {count} leaves")]
    IndexOutOfRange { index: usize, count: usize },
}

/// Inclusion proof for one leaf.
///
/// `siblings` runs from the leaf level upwards. The proof also records the
/// number of leaves, which fixes the tree shape and rules out indices that
/// would only exist through last-node duplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerkleProof {
    pub leaf_index: u32,
    pub leaf_count: u32,
    pub siblings: Vec<Digest>,
}

/// A fully materialised tree, kept so that several proofs can be cut from it.
#[derive(Debug, Clone)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    /// Builds a tree from raw leaf byte strings.
    pub fn from_leaves<L: AsRef<[u8]>>(leaves: &[L]) -> Result<Self, MerkleError> {
        Self::from_leaf_hashes(leaves.iter().map(|l| Digest::hash(l.as_ref())).collect())
    }

    /// Builds a tree whose leaf hashes are already known.
    pub fn from_leaf_hashes(hashes: Vec<Digest>) -> Result<Self, MerkleError> {
        if hashes.is_empty() {
            return Err(MerkleError::Empty);
        }
        let mut levels = vec![hashes];
        while levels.last().expect("non-empty").len() > 1 {
            let prev = levels.last().expect("non-empty");
            let next = prev
                .chunks(2)
                .map(|pair| Digest::hash_pair(&pair[0], pair.get(1).unwrap_or(&pair[0])))
                .collect();
            levels.push(next);
        }
        Ok(MerkleTree { levels })
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("non-empty")[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn prove(&self, index: usize) -> Result<MerkleProof, MerkleError> {
        let count = self.leaf_count();
        if index >= count {
            return Err(MerkleError::IndexOutOfRange { index, count });
        }
        let mut siblings = Vec::with_capacity(self.levels.len() - 1);
        let mut i = index;
        for level in &self.levels[..self.levels.len() - 1] {
            let sib = if i % 2 == 0 { level.get(i + 1).unwrap_or(&level[i]) } else { &level[i - 1] };
            siblings.push(*sib);
            i /= 2;
        }
        Ok(MerkleProof { leaf_index: index as u32, leaf_count: count as u32, siblings })
    }
}

/// Root of the tree over `leaves`.
pub fn merkle_root<L: AsRef<[u8]>>(leaves: &[L]) -> Result<Digest, MerkleError> {
    Ok(MerkleTree::from_leaves(leaves)?.root())
}

/// Proof that `leaves[index]` is committed by [`merkle_root`].
pub fn merkle_prove<L: AsRef<[u8]>>(leaves: &[L], index: usize) -> Result<MerkleProof, MerkleError> {
    MerkleTree::from_leaves(leaves)?.prove(index)
}

/// Checks that `leaf` sits at `proof.leaf_index` under `root`.
pub fn merkle_verify(root: &Digest, leaf: &[u8], proof: &MerkleProof) -> bool {
    merkle_verify_hash(root, &Digest::hash(leaf), proof)
}

/// Like [`merkle_verify`] for a leaf whose hash is already known.
pub fn merkle_verify_hash(root: &Digest, leaf_hash: &Digest, proof: &MerkleProof) -> bool {
    let count = proof.leaf_count as usize;
    let mut index = proof.leaf_index as usize;
    if count == 0 || index >= count || proof.siblings.len() != tree_depth(count) {
        return false;
    }
    let mut width = count;
    let mut acc = *leaf_hash;
    for sib in &proof.siblings {
        if index % 2 == 0 {
            if index + 1 == width && *sib != acc {
                return false;
            }
            acc = Digest::hash_pair(&acc, sib);
        } else {
            acc = Digest::hash_pair(sib, &acc);
        }
        index /= 2;
        width = width.div_ceil(2);
    }
    acc == *root
}

/// Number of sibling hashes in a proof over `count` leaves: `ceil(log2(count))`.
pub fn tree_depth(count: usize) -> usize {
    let mut depth = 0;
    let mut width = count;
    while width > 1 {
        width = width.div_ceil(2);
        depth += 1;
    }
    depth
}

impl Encode for MerkleProof {
    fn encode_to(&self, e: &mut Encoder) {
        e.put_u32(self.leaf_index);
        e.put_u32(self.leaf_count);
        e.put_digests(&self.siblings);
    }
}

impl Decode for MerkleProof {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(MerkleProof { leaf_index: d.u32()?, leaf_count: d.u32()?, siblings: d.digests()? })
    }
}
