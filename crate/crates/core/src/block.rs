//! Block types and their canonical form.
//!
//! A mined superblock commits to `m + 2` parent leaves and `m + 2` content
//! leaves under two Merkle roots. After sortition only one slot survives as a
//! [`Block`]: the header, that slot's parent and content, and the two
//! inclusion proofs. Slot indices are voter chains `0..m`, then the
//! transaction slot `m`, then the proposer slot `m + 1`.

use serde::{Deserialize, Serialize};

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};
use crate::digest::Digest;
use crate::ledger::{Transaction, TX_WIRE_BYTES};
use crate::merkle::MerkleProof;

/// Fixed per-block overhead in the delay model (header, framing, proofs).
pub const BLOCK_OVERHEAD_BYTES: usize = 500;

/// Which of the `m + 2` slots a block occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockType {
    Transaction,
    Proposer,
    Voter(u32),
}

impl BlockType {
    /// Leaf index of this slot in a superblock with `m` voter chains.
    pub fn slot(self, m: u32) -> u32 {
        match self {
            BlockType::Voter(i) => i,
            BlockType::Transaction => m,
            BlockType::Proposer => m + 1,
        }
    }

    /// Inverse of [`BlockType::slot`].
    pub fn from_slot(slot: u32, m: u32) -> Option<BlockType> {
        match slot {
            s if s < m => Some(BlockType::Voter(s)),
            s if s == m => Some(BlockType::Transaction),
            s if s == m + 1 => Some(BlockType::Proposer),
            _ => None,
        }
    }

    pub fn is_voter(self) -> bool {
        matches!(self, BlockType::Voter(_))
    }

    fn tag(self) -> (u8, u32) {
        match self {
            BlockType::Transaction => (0, 0),
            BlockType::Proposer => (1, 0),
            BlockType::Voter(i) => (2, i),
        }
    }
}

/// The mined header. Its hash is the block digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub parent_root: Digest,
    pub content_root: Digest,
    pub nonce: u64,
}

impl Header {
    pub fn digest(&self) -> Digest {
        let mut buf = [0u8; 72];
        buf[..32].copy_from_slice(&self.parent_root.0);
        buf[32..64].copy_from_slice(&self.content_root.0);
        buf[64..].copy_from_slice(&self.nonce.to_le_bytes());
        Digest::hash(&buf)
    }
}

/// Slot payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Content {
    /// Transaction block: an ordered list of transactions.
    Transactions(Vec<Transaction>),
    /// Proposer block: referenced proposer blocks (excluding the parent) and
    /// referenced transaction blocks.
    Proposer { proposer_refs: Vec<Digest>, tx_block_refs: Vec<Digest> },
    /// Voter block: one vote per proposer level, in increasing level order.
    Votes(Vec<Digest>),
}

impl Content {
    pub fn empty_for(kind: BlockType) -> Content {
        match kind {
            BlockType::Transaction => Content::Transactions(Vec::new()),
            BlockType::Proposer => Content::Proposer { proposer_refs: Vec::new(), tx_block_refs: Vec::new() },
            BlockType::Voter(_) => Content::Votes(Vec::new()),
        }
    }

    /// Hash of the canonical encoding; this is the Merkle leaf hash.
    pub fn leaf_hash(&self) -> Digest {
        Digest::hash(&self.encode())
    }

    /// Approximate size on the wire.
    pub fn wire_bytes(&self) -> usize {
        match self {
            Content::Transactions(t) => t.len() * TX_WIRE_BYTES,
            Content::Proposer { proposer_refs, tx_block_refs } => 32 * (proposer_refs.len() + tx_block_refs.len()),
            Content::Votes(v) => 32 * v.len(),
        }
    }
}

impl Encode for Content {
    fn encode_to(&self, e: &mut Encoder) {
        match self {
            Content::Transactions(txs) => {
                e.put_u8(0);
                e.put_len(txs.len());
                for t in txs {
                    t.encode_to(e);
                }
            }
            Content::Proposer { proposer_refs, tx_block_refs } => {
                e.put_u8(1);
                e.put_digests(proposer_refs);
                e.put_digests(tx_block_refs);
            }
            Content::Votes(v) => {
                e.put_u8(2);
                e.put_digests(v);
            }
        }
    }
}

impl Decode for Content {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError> {
        match d.u8()? {
            0 => {
                let n = d.len()?;
                let txs = (0..n).map(|_| Transaction::decode_from(d)).collect::<Result<_, _>>()?;
                Ok(Content::Transactions(txs))
            }
            1 => Ok(Content::Proposer { proposer_refs: d.digests()?, tx_block_refs: d.digests()? }),
            2 => Ok(Content::Votes(d.digests()?)),
            tag => Err(CodecError::BadTag { what: "content", tag }),
        }
    }
}

/// Parent leaf bytes: the parent digest, or nothing for the transaction slot.
pub fn parent_leaf(parent: Option<&Digest>) -> &[u8] {
    match parent {
        Some(d) => &d.0,
        None => &[],
    }
}

/// Inclusion proofs for one slot's parent leaf and content leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortitionProof {
    pub parent: MerkleProof,
    pub content: MerkleProof,
}

/// A block after sortition. Immutable; the digest and content hash are
/// computed once at construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "BlockWire", into = "BlockWire")]
pub struct Block {
    header: Header,
    kind: BlockType,
    parent: Option<Digest>,
    level: Option<u64>,
    content: Content,
    proof: SortitionProof,
    miner: u32,
    digest: Digest,
    content_hash: Digest,
}

#[derive(Clone, Serialize, Deserialize)]
struct BlockWire {
    header: Header,
    kind: BlockType,
    parent: Option<Digest>,
    level: Option<u64>,
    content: Content,
    proof: SortitionProof,
    miner: u32,
}

impl From<BlockWire> for Block {
    fn from(w: BlockWire) -> Self {
        Block::from_parts(w.header, w.kind, w.parent, w.level, w.content, w.proof, w.miner)
    }
}

impl From<Block> for BlockWire {
    fn from(b: Block) -> Self {
        BlockWire {
            header: b.header,
            kind: b.kind,
            parent: b.parent,
            level: b.level,
            content: b.content,
            proof: b.proof,
            miner: b.miner,
        }
    }
}

impl PartialEq for Block {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest
            && self.content_hash == other.content_hash
            && self.kind == other.kind
            && self.parent == other.parent
            && self.level == other.level
            && self.proof == other.proof
            && self.miner == other.miner
    }
}

impl Eq for Block {}

impl Block {
    /// Assembles a block. No validity checks are made; see
    /// [`crate::validate::validate_block`].
    pub fn from_parts(
        header: Header,
        kind: BlockType,
        parent: Option<Digest>,
        level: Option<u64>,
        content: Content,
        proof: SortitionProof,
        miner: u32,
    ) -> Self {
        let digest = header.digest();
        let content_hash = content.leaf_hash();
        Block { header, kind, parent, level, content, proof, miner, digest, content_hash }
    }

    pub fn digest(&self) -> Digest {
        self.digest
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn kind(&self) -> BlockType {
        self.kind
    }

    pub fn parent(&self) -> Option<Digest> {
        self.parent
    }

    /// Proposer level; `None` for other block types.
    pub fn level(&self) -> Option<u64> {
        self.level
    }

    pub fn content(&self) -> &Content {
        &self.content
    }

    pub fn content_hash(&self) -> Digest {
        self.content_hash
    }

    pub fn proof(&self) -> &SortitionProof {
        &self.proof
    }

    /// Id of the node that mined this block.
    pub fn miner(&self) -> u32 {
        self.miner
    }

    pub fn transactions(&self) -> &[Transaction] {
        match &self.content {
            Content::Transactions(t) => t,
            _ => &[],
        }
    }

    pub fn votes(&self) -> &[Digest] {
        match &self.content {
            Content::Votes(v) => v,
            _ => &[],
        }
    }

    pub fn proposer_refs(&self) -> &[Digest] {
        match &self.content {
            Content::Proposer { proposer_refs, .. } => proposer_refs,
            _ => &[],
        }
    }

    pub fn tx_block_refs(&self) -> &[Digest] {
        match &self.content {
            Content::Proposer { tx_block_refs, .. } => tx_block_refs,
            _ => &[],
        }
    }

    /// Size used by the network delay model.
    pub fn wire_bytes(&self) -> usize {
        BLOCK_OVERHEAD_BYTES + self.content.wire_bytes()
    }

    /// Every block that must be present before this one can be stored.
    pub fn dependencies(&self) -> Vec<Digest> {
        let mut deps: Vec<Digest> = self.parent.into_iter().collect();
        match &self.content {
            Content::Transactions(_) => {}
            Content::Proposer { proposer_refs, tx_block_refs } => {
                deps.extend_from_slice(proposer_refs);
                deps.extend_from_slice(tx_block_refs);
            }
            Content::Votes(v) => deps.extend_from_slice(v),
        }
        deps
    }
}

impl Encode for Block {
    fn encode_to(&self, e: &mut Encoder) {
        e.put_digest(&self.header.parent_root);
        e.put_digest(&self.header.content_root);
        e.put_u64(self.header.nonce);
        let (tag, chain) = self.kind.tag();
        e.put_u8(tag);
        e.put_u32(chain);
        match &self.parent {
            Some(p) => {
                e.put_u8(1);
                e.put_digest(p);
            }
            None => e.put_u8(0),
        }
        match self.level {
            Some(l) => {
                e.put_u8(1);
                e.put_u64(l);
            }
            None => e.put_u8(0),
        }
        self.content.encode_to(e);
        self.proof.parent.encode_to(e);
        self.proof.content.encode_to(e);
        e.put_u32(self.miner);
    }
}

impl Decode for Block {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let header = Header { parent_root: d.digest()?, content_root: d.digest()?, nonce: d.u64()? };
        let tag = d.u8()?;
        let chain = d.u32()?;
        let kind = match tag {
            0 => BlockType::Transaction,
            1 => BlockType::Proposer,
            2 => BlockType::Voter(chain),
            tag => return Err(CodecError::BadTag { what: "block type", tag }),
        };
        let parent = match d.u8()? {
            0 => None,
            1 => Some(d.digest()?),
            tag => return Err(CodecError::BadTag { what: "parent option", tag }),
        };
        let level = match d.u8()? {
            0 => None,
            1 => Some(d.u64()?),
            tag => return Err(CodecError::BadTag { what: "level option", tag }),
        };
        let content = Content::decode_from(d)?;
        let proof = SortitionProof { parent: MerkleProof::decode_from(d)?, content: MerkleProof::decode_from(d)? };
        let miner = d.u32()?;
        Ok(Block::from_parts(header, kind, parent, level, content, proof, miner))
    }
}

/// Well-known genesis identifiers. Genesis blocks are never transmitted.
pub mod genesis {
    use crate::digest::Digest;

    /// The level-0 proposer block.
    pub fn proposer() -> Digest {
        Digest::hash(b"prism/genesis/proposer")
    }

    /// The genesis block of voter chain `chain`.
    pub fn voter(chain: u32) -> Digest {
        Digest::hash_parts(&[b"prism/genesis/voter", &chain.to_le_bytes()])
    }
}
