use std::collections::HashSet;

use thiserror::Error;

use super::{tally_level, try_confirm_leader, try_confirm_proposer_set, ConfirmationParams, LeaderDecision, SetDecision};
use crate::block::genesis;
use crate::chain::ChainState;
use crate::digest::Digest;
use crate::ledger::{sanitize, Transaction, UtxoSet};

/// Upper bound on the number of leader sequences enumerated by
/// [`is_tx_confirmed`].
pub const MAX_LIST_DECODING_LEDGERS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("referenced block {0} is not stored")]
    MissingBlock(Digest),
    #[error("{0} is not a proposer block")]
    NotProposer(Digest),
    #[error("list decoding would enumerate {count} ledgers (cap {cap})")]
    TooManyLedgers { count: usize, cap: usize },
}

/// Remembers which proposer and transaction blocks a ledger already
/// contains, so that leaders can be appended one at a time.
#[derive(Debug, Clone)]
pub struct LedgerCursor {
    proposers: HashSet<Digest>,
    tx_blocks: HashSet<Digest>,
}

impl Default for LedgerCursor {
    fn default() -> Self {
        LedgerCursor { proposers: HashSet::from([genesis::proposer()]), tx_blocks: HashSet::new() }
    }
}

impl LedgerCursor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the closure of `leader` and returns the newly included
    /// transaction blocks in ledger order. On error the cursor is unchanged.
    pub fn extend(&mut self, leader: &Digest, state: &ChainState) -> Result<Vec<Digest>, LedgerError> {
        let mut new_p = HashSet::new();
        let mut new_t = HashSet::new();
        let mut out = Vec::new();
        self.visit(leader, state, &mut new_p, &mut new_t, &mut out)?;
        self.proposers.extend(new_p);
        self.tx_blocks.extend(new_t);
        Ok(out)
    }

    /// The transaction blocks that appending `leaders` in order would add,
    /// without modifying the cursor.
    pub fn peek(&self, leaders: &[Digest], state: &ChainState) -> Result<Vec<Digest>, LedgerError> {
        let mut new_p = HashSet::new();
        let mut new_t = HashSet::new();
        let mut out = Vec::new();
        for l in leaders {
            self.visit(l, state, &mut new_p, &mut new_t, &mut out)?;
        }
        Ok(out)
    }

    pub fn contains_tx_block(&self, d: &Digest) -> bool {
        self.tx_blocks.contains(d)
    }

    fn visit(
        &self,
        d: &Digest,
        state: &ChainState,
        new_p: &mut HashSet<Digest>,
        new_t: &mut HashSet<Digest>,
        out: &mut Vec<Digest>,
    ) -> Result<(), LedgerError> {
        if self.proposers.contains(d) || new_p.contains(d) {
            return Ok(());
        }
        let block = state.block(d).ok_or(LedgerError::MissingBlock(*d))?;
        if !state.is_proposer(d) {
            return Err(LedgerError::NotProposer(*d));
        }
        new_p.insert(*d);
        if let Some(parent) = block.parent() {
            self.visit(&parent, state, new_p, new_t, out)?;
        }
        for r in block.proposer_refs() {
            self.visit(r, state, new_p, new_t, out)?;
        }
        for t in block.tx_block_refs() {
            if self.tx_blocks.contains(t) || new_t.contains(t) {
                continue;
            }
            if !state.is_tx_block(t) {
                return Err(LedgerError::MissingBlock(*t));
            }
            new_t.insert(*t);
            out.push(*t);
        }
        Ok(())
    }
}

/// The raw (unsanitized) transaction list for a leader sequence.
pub fn build_ledger(leaders: &[Digest], state: &ChainState) -> Result<Vec<Transaction>, LedgerError> {
    let mut cursor = LedgerCursor::new();
    let mut txs = Vec::new();
    for l in leaders {
        for tb in cursor.extend(l, state)? {
            txs.extend_from_slice(state.block(&tb).expect("checked").transactions());
        }
    }
    Ok(txs)
}

/// Leaders of levels `1..` up to the first level that is not confirmed.
pub fn confirmed_leaders(state: &ChainState, params: &ConfirmationParams) -> Vec<Digest> {
    let mut leaders = Vec::new();
    for level in 1..=state.max_level() {
        match try_confirm_leader(&tally_level(state, level, params)) {
            LeaderDecision::Confirmed(l) => leaders.push(l),
            LeaderDecision::Unconfirmed => break,
        }
    }
    leaders
}

/// Sanitized ledger of the confirmed leader prefix, executed from `initial`.
pub fn confirmed_ledger(state: &ChainState, params: &ConfirmationParams, initial: &UtxoSet) -> Vec<Transaction> {
    let raw = build_ledger(&confirmed_leaders(state, params), state).expect("stored leaders have stored closures");
    sanitize(&raw, initial.clone()).0
}

/// Whether transaction `tx` survives sanitization in every ledger built
/// from the product of confirmed proposer sets.
pub fn is_tx_confirmed(
    tx: &Digest,
    state: &ChainState,
    params: &ConfirmationParams,
    initial: &UtxoSet,
) -> Result<bool, LedgerError> {
    let mut sets: Vec<Vec<Digest>> = Vec::new();
    let mut count = 1usize;
    for level in 1..=state.max_level() {
        match try_confirm_proposer_set(&tally_level(state, level, params)) {
            SetDecision::Confirmed(set) => {
                count = count.saturating_mul(set.len().max(1));
                if count > MAX_LIST_DECODING_LEDGERS {
                    return Err(LedgerError::TooManyLedgers { count, cap: MAX_LIST_DECODING_LEDGERS });
                }
                sets.push(set);
            }
            SetDecision::Unconfirmed => break,
        }
    }
    if sets.is_empty() {
        return Ok(false);
    }
    let mut index = vec![0usize; sets.len()];
    loop {
        let leaders: Vec<Digest> = index.iter().zip(&sets).map(|(i, s)| s[*i]).collect();
        let raw = build_ledger(&leaders, state)?;
        let (kept, _) = sanitize(&raw, initial.clone());
        if !kept.iter().any(|t| t.id() == *tx) {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == sets.len() {
                return Ok(true);
            }
            index[k] += 1;
            if index[k] < sets[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockType;
    use crate::ledger::{OutPoint, TxOutput, Utxo};
    use crate::testutil::{confirmed_chain, initial, key, mine, M};

    fn coin(i: u32) -> OutPoint {
        OutPoint::new(Digest::hash(b"two-way"), i)
    }

    fn pay(i: u32, value: u64) -> Transaction {
        Transaction::signed(vec![coin(i)], vec![TxOutput { value, owner: key().public() }], &[&key()])
    }

    /// Level 1 holds two proposer blocks with half the chains voting for
    /// each, buried deep. Block `a` references transaction blocks with `x`
    /// and `c`; block `b` references blocks with `x`, then `d`, then `c`,
    /// where `c` and `d` spend the same coin.
    fn two_way() -> (ChainState, [Transaction; 3], UtxoSet) {
        let mut s = confirmed_chain(0).0;
        let (x, c, d) = (pay(1, 10), pay(2, 10), pay(2, 9));
        let tx_block = |s: &mut ChainState, tx: &Transaction, nonce| {
            let tx = tx.clone();
            let b = mine(s, BlockType::Transaction, nonce, move |ctx| ctx.tx_pool = vec![tx]);
            s.receive_block(b.clone()).unwrap();
            b.digest()
        };
        let (tx_x, tx_c, tx_d) = (tx_block(&mut s, &x, 100), tx_block(&mut s, &c, 101), tx_block(&mut s, &d, 102));
        let base = s.proposers_at(1)[0];
        let rival = |refs: Vec<Digest>, nonce| {
            mine(&s, BlockType::Proposer, nonce, |ctx| {
                ctx.prp_parent = s.proposers_at(0)[0];
                ctx.prp_parent_level = 0;
                ctx.unref_prp_pool.clear();
                ctx.unref_tx_pool = refs;
            })
        };
        let a = rival(vec![tx_x, tx_c], 110);
        let b = rival(vec![tx_x, tx_d, tx_c], 111);
        s.receive_block(a.clone()).unwrap();
        s.receive_block(b.clone()).unwrap();
        let mut nonce = 200;
        for chain in 0..M {
            nonce += 1;
            let pick = if chain < M / 2 { a.digest() } else { b.digest() };
            let v = mine(&s, BlockType::Voter(chain), nonce, |ctx| ctx.votes_on_prp[chain as usize] = vec![pick]);
            s.receive_block(v).unwrap();
        }
        for _ in 0..60 {
            for chain in 0..M {
                nonce += 1;
                s.receive_block(mine(&s, BlockType::Voter(chain), nonce, |_| {})).unwrap();
            }
        }
        assert_eq!(s.vote_counts(1).iter().find(|c| c.0 == base).map(|c| c.1), Some(0));
        let funded = UtxoSet::from_list((1..3).map(|i| Utxo { id: coin(i), value: 10, owner: key().public() }));
        (s, [x, c, d], funded)
    }

    #[test]
    fn cursor_rejects_unknown_and_non_proposer_blocks() {
        let (s, _, p) = confirmed_chain(0);
        let tx_block = *s.block(&p).unwrap().tx_block_refs().first().unwrap();
        let mut cursor = LedgerCursor::new();
        assert_eq!(cursor.extend(&tx_block, &s), Err(LedgerError::NotProposer(tx_block)));
        let ghost = Digest::hash(b"ghost");
        assert_eq!(cursor.extend(&ghost, &s), Err(LedgerError::MissingBlock(ghost)));
        assert!(!cursor.contains_tx_block(&tx_block));
        assert_eq!(cursor.extend(&p, &s).unwrap(), vec![tx_block]);
        assert!(cursor.contains_tx_block(&tx_block));
        assert!(cursor.extend(&p, &s).unwrap().is_empty());
    }

    #[test]
    fn unvoted_levels_confirm_nothing() {
        let (s, tx, _) = confirmed_chain(0);
        let params = ConfirmationParams::new(0.2, 1e-2);
        assert!(confirmed_leaders(&s, &params).is_empty());
        assert!(confirmed_ledger(&s, &params, &initial()).is_empty());
        assert_eq!(is_tx_confirmed(&tx.id(), &s, &params, &initial()), Ok(false));
    }

    #[test]
    fn deep_unanimous_votes_confirm_the_transaction() {
        let (s, tx, p) = confirmed_chain(40);
        let params = ConfirmationParams::new(0.2, 1e-2);
        assert_eq!(confirmed_leaders(&s, &params), vec![p]);
        assert_eq!(confirmed_ledger(&s, &params, &initial()), vec![tx.clone()]);
        assert_eq!(is_tx_confirmed(&tx.id(), &s, &params, &initial()), Ok(true));
        assert_eq!(is_tx_confirmed(&Digest::hash(b"other"), &s, &params, &initial()), Ok(false));
    }

    #[test]
    fn unfunded_transactions_are_sanitized_away() {
        let (s, tx, _) = confirmed_chain(40);
        let params = ConfirmationParams::new(0.2, 1e-2);
        assert!(confirmed_ledger(&s, &params, &UtxoSet::default()).is_empty());
        assert_eq!(is_tx_confirmed(&tx.id(), &s, &params, &UtxoSet::default()), Ok(false));
    }
    #[test]
    fn empty_chain_has_empty_ledger() {
        let (s, _, _) = confirmed_chain(0);
        let params = ConfirmationParams::new(0.2, 1e-2);
        assert!(build_ledger(&[], &s).unwrap().is_empty());
        assert!(confirmed_ledger(&s, &params, &initial()).is_empty());
    }

    #[test]
    fn unconfirmed_level_ends_the_prefix() {
        let (mut s, tx, p1) = confirmed_chain(40);
        let late = pay(7, 1);
        let t = {
            let late = late.clone();
            mine(&s, BlockType::Transaction, 900, move |c| c.tx_pool = vec![late])
        };
        s.receive_block(t).unwrap();
        s.receive_block(mine(&s, BlockType::Proposer, 901, |_| {})).unwrap();
        let params = ConfirmationParams::new(0.2, 1e-2);
        assert_eq!(s.max_level(), 2);
        assert_eq!(confirmed_leaders(&s, &params), vec![p1]);
        let raw = build_ledger(&[p1], &s).unwrap();
        assert_eq!(confirmed_ledger(&s, &params, &initial()), sanitize(&raw, initial()).0);
        assert_eq!(confirmed_ledger(&s, &params, &initial()), vec![tx]);
    }

    #[test]
    fn list_decoding_needs_every_ledger() {
        let (s, [x, c, d], funded) = two_way();
        let params = ConfirmationParams::new(0.2, 1e-2);
        assert!(confirmed_leaders(&s, &params).is_empty());
        assert_eq!(is_tx_confirmed(&x.id(), &s, &params, &funded), Ok(true));
        assert_eq!(is_tx_confirmed(&c.id(), &s, &params, &funded), Ok(false));
        assert_eq!(is_tx_confirmed(&d.id(), &s, &params, &funded), Ok(false));
    }
}
