//! Sanitizes a large random ledger sequentially and with several workers,
//! and checks that the results agree.

use std::time::Instant;

use prism_core::crypto::{Keypair, SignatureScheme};
use prism_core::digest::Digest;
use prism_core::ledger::{sanitize, sanitize_parallel, OutPoint, Transaction, TxOutput, Utxo, UtxoSet};
use rand::{Rng, SeedableRng};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let keys: Vec<Keypair> = (0..8u8).map(|i| Keypair::from_seed(SignatureScheme::Mock, [i; 32])).collect();
    let coins = (n / 2) as u32;
    let coin = |i: u32| OutPoint::new(Digest::hash(b"example-funding"), i);
    let initial =
        UtxoSet::from_list((0..coins).map(|i| Utxo { id: coin(i), value: 10, owner: keys[i as usize % 8].public() }));

    let txs: Vec<Transaction> = (0..n)
        .map(|_| {
            let i = rng.gen_range(0..coins);
            let to = rng.gen_range(0..8);
            let value = if rng.gen_bool(0.05) { 11 } else { 10 };
            Transaction::signed(vec![coin(i)], vec![TxOutput { value, owner: keys[to].public() }], &[&keys[i as usize % 8]])
        })
        .collect();

    let t = Instant::now();
    let (seq, _) = sanitize(&txs, initial.clone());
    println!("sequential: kept {} of {} in {:?}", seq.len(), n, t.elapsed());
    for workers in [2, 4, 8] {
        let t = Instant::now();
        let (par, _) = sanitize_parallel(&txs, initial.clone(), workers);
        println!("{workers} workers: kept {} in {:?}, identical: {}", par.len(), t.elapsed(), par == seq);
    }
}
