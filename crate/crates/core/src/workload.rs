//! Synthetic transaction sources: per-node wallets funded at genesis and the
//! conflict sets used by spam experiments.

use crate::crypto::{Keypair, PublicKey, SignatureScheme};
use crate::digest::Digest;
use crate::ledger::{OutPoint, Transaction, TxOutput, Utxo, UtxoSet};

/// Value of every genesis coin.
pub const COIN_VALUE: u64 = 1_000;

fn seed_for(tag: &[u8], index: u64) -> [u8; 32] {
    Digest::hash_parts(&[tag, &index.to_le_bytes()]).0
}

/// Key of the wallet owned by `node`.
pub fn node_key(scheme: SignatureScheme, node: usize) -> Keypair {
    Keypair::from_seed(scheme, seed_for(b"wallet", node as u64))
}

/// Key that owns the spam coins.
pub fn spammer_key(scheme: SignatureScheme) -> Keypair {
    Keypair::from_seed(scheme, seed_for(b"spammer", 0))
}

fn funding_outpoint(node: usize, i: u32) -> OutPoint {
    OutPoint::new(Digest::hash_parts(&[b"funding", &(node as u64).to_le_bytes()]), i)
}

fn spam_outpoint(k: u32) -> OutPoint {
    OutPoint::new(Digest::hash(b"spam-funding"), k)
}

/// A node's wallet: a fixed stock of genesis coins, each spent at most once.
#[derive(Debug, Clone)]
pub struct Wallet {
    node: usize,
    key: Keypair,
    next: u32,
    coins: u32,
}

impl Wallet {
    pub fn new(scheme: SignatureScheme, node: usize, coins: u32) -> Self {
        Wallet { node, key: node_key(scheme, node), next: 0, coins }
    }

    pub fn remaining(&self) -> u32 {
        self.coins - self.next
    }

    /// Spends the next unused coin to `recipient`. `None` once the wallet
    /// is exhausted.
    pub fn pay(&mut self, recipient: PublicKey) -> Option<Transaction> {
        if self.next == self.coins {
            return None;
        }
        let input = funding_outpoint(self.node, self.next);
        self.next += 1;
        Some(Transaction::signed(vec![input], vec![TxOutput { value: COIN_VALUE, owner: recipient }], &[&self.key]))
    }
}

/// Genesis funding for `nodes` wallets of `coins` coins each plus
/// `spam_coins` coins owned by the spammer.
pub fn genesis_utxos(scheme: SignatureScheme, nodes: usize, coins: u32, spam_coins: u32) -> UtxoSet {
    let mut list = Vec::with_capacity(nodes * coins as usize + spam_coins as usize);
    for n in 0..nodes {
        let owner = node_key(scheme, n).public();
        list.extend((0..coins).map(|i| Utxo { id: funding_outpoint(n, i), value: COIN_VALUE, owner }));
    }
    let owner = spammer_key(scheme).public();
    list.extend((0..spam_coins).map(|k| Utxo { id: spam_outpoint(k), value: COIN_VALUE, owner }));
    UtxoSet::from_list(list)
}

/// The `k`-th spam conflict set: one transaction per recipient, all spending
/// the same coin.
pub fn conflict_set(key: &Keypair, k: u32, recipients: &[PublicKey]) -> Vec<Transaction> {
    recipients
        .iter()
        .map(|r| Transaction::signed(vec![spam_outpoint(k)], vec![TxOutput { value: COIN_VALUE, owner: *r }], &[key]))
        .collect()
}
