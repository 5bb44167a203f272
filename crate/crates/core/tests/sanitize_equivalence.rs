mod common;

use common::{coin, funded, key, random_transactions};
use std::collections::{HashMap, HashSet};

use prism_core::digest::Digest;
use prism_core::ledger::{
    conservation_check, sanitize, sanitize_parallel, sanitize_parallel_with, OutPoint, ParallelOptions, Transaction, TxOutput,
    UtxoSet,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, ..ProptestConfig::default() })]

    #[test]
    fn parallel_matches_sequential(seed in any::<u64>(), coins in 1u32..12, count in 0usize..40, workers in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let txs = random_transactions(&mut rng, coins, count);
        let initial = funded(coins);
        let (seq, seq_set) = sanitize(&txs, initial.clone());
        let (par, par_set) = sanitize_parallel(&txs, initial.clone(), workers);
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(&seq_set, &par_set);
        prop_assert!(conservation_check(&initial, &seq, &seq_set));
    }
}

#[test]
fn generator_mixes_valid_and_invalid() {
    let (mut kept, mut total) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let txs = random_transactions(&mut rng, 8, 30);
        kept += sanitize(&txs, funded(8)).0.len();
        total += txs.len();
    }
    assert!(kept * 10 > total && kept * 10 < total * 9, "kept {kept} of {total}");
}

#[test]
fn perturbed_schedules_agree() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let txs = random_transactions(&mut rng, 8, 60);
        let initial = funded(8);
        let expect = sanitize(&txs, initial.clone());
        let opts = ParallelOptions { workers: 4, schedule_jitter_seed: Some(seed) };
        assert_eq!(sanitize_parallel_with(&txs, initial, opts), expect, "seed {seed}");
    }
}

/// Map-based reference: a transaction applies when its inputs are distinct,
/// unspent, signed by their owners, and cover the outputs.
fn fold_oracle(txs: &[Transaction], initial: &UtxoSet) -> Vec<Digest> {
    let mut coins: HashMap<OutPoint, TxOutput> = initial.iter().map(|u| (u.id, TxOutput { value: u.value, owner: u.owner })).collect();
    let mut kept = Vec::new();
    for tx in txs {
        let distinct = tx.inputs().iter().collect::<HashSet<_>>().len() == tx.inputs().len();
        let signed = tx.witnesses().len() == tx.inputs().len()
            && tx.inputs().iter().zip(tx.witnesses()).all(|(op, w)| {
                coins.get(op).is_some_and(|c| c.owner == w.pubkey) && w.pubkey.verify(&tx.id().0, &w.signature)
            });
        if tx.inputs().is_empty() || tx.outputs().is_empty() || !distinct || !signed {
            continue;
        }
        let spent: u128 = tx.inputs().iter().map(|op| coins[op].value as u128).sum();
        let paid: u128 = tx.outputs().iter().map(|o| o.value as u128).sum();
        if paid > spent {
            continue;
        }
        for op in tx.inputs() {
            coins.remove(op);
        }
        for (i, o) in tx.outputs().iter().enumerate() {
            coins.insert(OutPoint::new(tx.id(), i as u32), *o);
        }
        kept.push(tx.id());
    }
    kept
}

/// Mostly spends outputs that are still unspent, with occasional double
/// spends, overspends and wrong signers.
fn mostly_live_transactions(rng: &mut ChaCha8Rng, coins: u32, count: usize) -> Vec<Transaction> {
    let mut live: Vec<(OutPoint, u64, u8)> = (0..coins).map(|i| (coin(i), 100, (i % 4) as u8)).collect();
    let mut dead: Vec<(OutPoint, u64, u8)> = Vec::new();
    let mut txs = Vec::with_capacity(count);
    for _ in 0..count {
        let pool = if dead.is_empty() || rng.gen_bool(0.85) { &mut live } else { &mut dead };
        if pool.is_empty() {
            break;
        }
        let (op, value, owner) = pool.swap_remove(rng.gen_range(0..pool.len()));
        let signer = if rng.gen_bool(0.05) { key((owner + 1) % 6) } else { key(owner) };
        let paid = if rng.gen_bool(0.05) { value + 1 } else { value };
        let to = rng.gen_range(0..6u8);
        let tx = Transaction::signed(vec![op], vec![TxOutput { value: paid, owner: key(to).public() }], &[&signer]);
        dead.push((op, value, owner));
        live.push((OutPoint::new(tx.id(), 0), paid, to));
        txs.push(tx);
    }
    txs
}

#[test]
fn sequential_matches_fold_oracle() {
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let txs = mostly_live_transactions(&mut rng, 40, 1000);
        let initial = funded(40);
        let ids: Vec<Digest> = sanitize(&txs, initial.clone()).0.iter().map(Transaction::id).collect();
        assert!(ids.len() > 150 && ids.len() < txs.len(), "kept {}", ids.len());
        assert_eq!(ids, fold_oracle(&txs, &initial), "seed {seed}");
    }
}
