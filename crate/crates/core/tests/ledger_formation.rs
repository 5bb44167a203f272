mod common;

use std::collections::HashSet;

use common::{chain_config, ledger_example, mine_with, pay};
use prism_core::block::BlockType;
use prism_core::chain::ChainState;
use prism_core::confirmation::{build_ledger, LedgerCursor};
use prism_core::digest::Digest;
use prism_core::ledger::{sanitize, Transaction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn worked_example_orders_a_a_b_d_c() {
    let ex = ledger_example();
    let ledger = build_ledger(&ex.leaders, &ex.state).unwrap();
    let ids: Vec<Digest> = ledger.iter().map(Transaction::id).collect();
    let expect: Vec<Digest> = [&ex.a, &ex.a, &ex.b, &ex.d, &ex.c].iter().map(|t| t.id()).collect();
    assert_eq!(ids, expect);
}

#[test]
fn worked_example_sanitizes_duplicate_and_conflict() {
    let ex = ledger_example();
    let ledger = build_ledger(&ex.leaders, &ex.state).unwrap();
    let (kept, _) = sanitize(&ledger, ex.initial.clone());
    let ids: Vec<Digest> = kept.iter().map(Transaction::id).collect();
    assert_eq!(ids, vec![ex.a.id(), ex.b.id(), ex.d.id()]);
}

#[test]
fn build_ledger_is_idempotent_and_prefix_stable() {
    let ex = ledger_example();
    let full = build_ledger(&ex.leaders, &ex.state).unwrap();
    assert_eq!(full, build_ledger(&ex.leaders, &ex.state).unwrap());
    let prefix = build_ledger(&ex.leaders[..1], &ex.state).unwrap();
    assert_eq!(&full[..prefix.len()], &prefix[..]);
    assert_eq!(prefix.len(), 1);
}

#[test]
fn missing_leader_is_an_error() {
    let ex = ledger_example();
    assert!(build_ledger(&[Digest::hash(b"nowhere")], &ex.state).is_err());
}

#[test]
fn cursor_peek_matches_extend() {
    let ex = ledger_example();
    let cursor = LedgerCursor::new();
    let peeked = cursor.peek(&ex.leaders, &ex.state).unwrap();
    let mut c2 = LedgerCursor::new();
    let mut extended = Vec::new();
    for l in &ex.leaders {
        extended.extend(c2.extend(l, &ex.state).unwrap());
    }
    assert_eq!(peeked, extended);
}

/// Independent expansion: walk each leader's closure with an explicit
/// stack, emitting transaction blocks in first-visit order.
fn reference_expansion(leaders: &[Digest], state: &ChainState) -> Vec<Digest> {
    let mut seen_p = HashSet::new();
    let mut seen_t = HashSet::new();
    let mut out = Vec::new();
    for l in leaders {
        let mut stack = vec![(*l, false)];
        while let Some((d, expanded)) = stack.pop() {
            let b = state.block(&d);
            if expanded {
                for t in b.map(|b| b.tx_block_refs().to_vec()).unwrap_or_default() {
                    if seen_t.insert(t) {
                        out.push(t);
                    }
                }
                continue;
            }
            if b.is_none() || !seen_p.insert(d) {
                continue;
            }
            let b = b.unwrap();
            stack.push((d, true));
            for r in b.proposer_refs().iter().rev() {
                stack.push((*r, false));
            }
            if let Some(p) = b.parent() {
                stack.push((p, false));
            }
        }
    }
    out
}

#[test]
fn random_dags_match_reference_expansion() {
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ChainState::new(chain_config(2));
        let mut nonce = 0;
        let mut coin = 0;
        let mut levels: Vec<Vec<Digest>> = vec![vec![s.prp_parent()]];
        let mut pending_tx: Vec<Digest> = Vec::new();
        let mut pending_prp: Vec<Digest> = Vec::new();
        for level in 1..=4u64 {
            for _ in 0..rng.gen_range(1..=3) {
                for _ in 0..rng.gen_range(0..=3) {
                    nonce += 1;
                    coin += 1;
                    let tx = pay(coin, 5);
                    let t = mine_with(&s, BlockType::Transaction, nonce, move |c| c.tx_pool = vec![tx]);
                    s.receive_block(t.clone()).unwrap();
                    pending_tx.push(t.digest());
                }
                let parent = *levels[level as usize - 1].choose(&mut rng).unwrap();
                pending_tx.shuffle(&mut rng);
                let take_tx = rng.gen_range(0..=pending_tx.len());
                let txs: Vec<Digest> = pending_tx.drain(..take_tx).collect();
                let refs: Vec<Digest> =
                    pending_prp.iter().copied().filter(|d| *d != parent && rng.gen_bool(0.6)).collect();
                pending_prp.retain(|d| !refs.contains(d));
                nonce += 1;
                let p = mine_with(&s, BlockType::Proposer, nonce, |c| {
                    c.prp_parent = parent;
                    c.prp_parent_level = level - 1;
                    c.unref_prp_pool = refs;
                    c.unref_tx_pool = txs;
                });
                s.receive_block(p.clone()).unwrap();
                if levels.len() as u64 == level {
                    levels.push(Vec::new());
                }
                levels[level as usize].push(p.digest());
                pending_prp.push(p.digest());
            }
        }
        let leaders: Vec<Digest> = (1..=4).map(|l| *levels[l].choose(&mut rng).unwrap()).collect();
        let got: Vec<Digest> = {
            let mut cur = LedgerCursor::new();
            leaders.iter().flat_map(|l| cur.extend(l, &s).unwrap()).collect()
        };
        assert_eq!(got, reference_expansion(&leaders, &s), "seed {seed}");
    }
}
