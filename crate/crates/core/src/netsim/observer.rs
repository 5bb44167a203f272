use std::collections::{HashMap, HashSet};

use crate::chain::ChainState;
use crate::confirmation::{
    confidence_bounds_with, leader_from_bounds, tally_level, try_confirm_proposer_set, ConfirmationParams,
    LeaderDecision, LedgerCursor, SetDecision, TraceRecord, MAX_LIST_DECODING_LEDGERS,
};
use crate::digest::Digest;
use crate::ledger::{conservation_check, Transaction, UtxoOverlay, UtxoSet};

/// Tracks one honest node's confirmed ledger as its view evolves.
///
/// Leaders are confirmed level by level and their closures executed into a
/// UTXO set. Beyond the confirmed leader prefix, transactions are also
/// confirmed early by list decoding over the confirmed proposer sets.
#[derive(Debug)]
pub struct Observer {
    params: ConfirmationParams,
    cursor: LedgerCursor,
    leaders: Vec<Digest>,
    utxo: UtxoSet,
    checkpoint_utxo: UtxoSet,
    since_checkpoint: Vec<Transaction>,
    conservation_ok: bool,
    first_confirmed: HashMap<Digest, f64>,
    last_sets: Vec<Vec<Digest>>,
    window: (f64, f64),
    latencies: Vec<f64>,
    raw_in_window: u64,
    ordered_in_window: u64,
    confirmed_in_window: u64,
    sanitized_total: u64,
    trace: Option<Vec<TraceRecord>>,
}

impl Observer {
    pub fn new(params: ConfirmationParams, initial: UtxoSet, window: (f64, f64), trace: bool) -> Self {
        Observer {
            params,
            cursor: LedgerCursor::new(),
            leaders: Vec::new(),
            checkpoint_utxo: initial.clone(),
            utxo: initial,
            since_checkpoint: Vec::new(),
            conservation_ok: true,
            first_confirmed: HashMap::new(),
            last_sets: Vec::new(),
            window,
            latencies: Vec::new(),
            raw_in_window: 0,
            ordered_in_window: 0,
            confirmed_in_window: 0,
            sanitized_total: 0,
            trace: trace.then(Vec::new),
        }
    }

    pub fn leaders(&self) -> &[Digest] {
        &self.leaders
    }

    pub fn latencies(&self) -> &[f64] {
        &self.latencies
    }

    pub fn raw_in_window(&self) -> u64 {
        self.raw_in_window
    }

    pub fn ordered_in_window(&self) -> u64 {
        self.ordered_in_window
    }

    /// Distinct transactions first confirmed inside the window.
    pub fn confirmed_in_window(&self) -> u64 {
        self.confirmed_in_window
    }

    pub fn sanitized_total(&self) -> u64 {
        self.sanitized_total
    }

    pub fn conservation_ok(&self) -> bool {
        self.conservation_ok
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.take().unwrap_or_default()
    }

    fn in_window(&self, t: f64) -> bool {
        t >= self.window.0 && t <= self.window.1
    }

    fn record(&mut self, tx: Digest, now: f64, mined: f64) {
        if let std::collections::hash_map::Entry::Vacant(e) = self.first_confirmed.entry(tx) {
            e.insert(now);
            if self.in_window(now) {
                self.confirmed_in_window += 1;
            }
            if mined >= self.window.0 && mined <= self.window.1 {
                self.latencies.push(now - mined);
            }
        }
    }

    /// Re-evaluates confirmation after the view changed.
    pub fn update(&mut self, now: f64, state: &ChainState, mined_at: &HashMap<Digest, f64>) {
        self.confirm_leaders(now, state, mined_at);
        self.list_decode(now, state, mined_at);
    }

    fn confirm_leaders(&mut self, now: f64, state: &ChainState, mined_at: &HashMap<Digest, f64>) {
        loop {
            let level = self.leaders.len() as u64 + 1;
            if level > state.max_level() {
                return;
            }
            let tally = tally_level(state, level, &self.params);
            if tally.candidates.is_empty() {
                return;
            }
            let Ok(bounds) = confidence_bounds_with(&tally, self.params.quantile) else { return };
            let decision = leader_from_bounds(&bounds);
            if let Some(trace) = &mut self.trace {
                trace.push(TraceRecord::new(now, level, &tally, &bounds, decision.clone()));
            }
            let LeaderDecision::Confirmed(leader) = decision else { return };
            let tx_blocks = self.cursor.extend(&leader, state).expect("stored leaders have stored closures");
            self.leaders.push(leader);
            for tb in tx_blocks {
                let mined = mined_at.get(&tb).copied().unwrap_or(now);
                let block = state.block(&tb).expect("stored");
                for tx in block.transactions() {
                    if self.in_window(now) {
                        self.raw_in_window += 1;
                    }
                    if crate::ledger::execute(tx, &mut self.utxo).is_ok() {
                        self.since_checkpoint.push(tx.clone());
                        self.sanitized_total += 1;
                        if self.in_window(now) {
                            self.ordered_in_window += 1;
                        }
                        self.record(tx.id(), now, mined);
                    }
                }
            }
        }
    }

    fn list_decode(&mut self, now: f64, state: &ChainState, mined_at: &HashMap<Digest, f64>) {
        let mut sets: Vec<Vec<Digest>> = Vec::new();
        let mut count = 1usize;
        for level in self.leaders.len() as u64 + 1..=state.max_level() {
            let tally = tally_level(state, level, &self.params);
            match try_confirm_proposer_set(&tally) {
                SetDecision::Confirmed(set) if !set.is_empty() => {
                    count = count.saturating_mul(set.len());
                    if count > MAX_LIST_DECODING_LEDGERS {
                        break;
                    }
                    sets.push(set);
                }
                _ => break,
            }
        }
        if sets.is_empty() || sets == self.last_sets {
            return;
        }
        self.last_sets = sets.clone();
        let mut common: Option<Vec<(Digest, Digest)>> = None;
        let mut index = vec![0usize; sets.len()];
        loop {
            let leaders: Vec<Digest> = index.iter().zip(&sets).map(|(i, s)| s[*i]).collect();
            let Ok(tx_blocks) = self.cursor.peek(&leaders, state) else { return };
            let mut overlay = UtxoOverlay::new(&self.utxo);
            let mut kept = Vec::new();
            for tb in tx_blocks {
                for tx in state.block(&tb).expect("stored").transactions() {
                    if overlay.execute(tx).is_ok() {
                        kept.push((tx.id(), tb));
                    }
                }
            }
            common = Some(match common {
                None => kept,
                Some(prev) => {
                    let here: HashSet<Digest> = kept.iter().map(|k| k.0).collect();
                    prev.into_iter().filter(|k| here.contains(&k.0)).collect()
                }
            });
            let mut k = 0;
            loop {
                if k == sets.len() {
                    for (tx, tb) in common.unwrap_or_default() {
                        let mined = mined_at.get(&tb).copied().unwrap_or(now);
                        self.record(tx, now, mined);
                    }
                    return;
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

    /// Verifies value conservation of everything executed since the last
    /// checkpoint.
    pub fn checkpoint(&mut self) -> bool {
        let ok = conservation_check(&self.checkpoint_utxo, &self.since_checkpoint, &self.utxo);
        self.conservation_ok &= ok;
        self.checkpoint_utxo = self.utxo.clone();
        self.since_checkpoint.clear();
        ok
    }

    /// Confirmed levels whose leader by votes in `state` differs from the
    /// confirmed one.
    pub fn reversals(&self, state: &ChainState) -> u64 {
        self.leaders
            .iter()
            .enumerate()
            .filter(|(i, l)| state.leader_by_votes(*i as u64 + 1) != Some(**l))
            .count() as u64
    }
}
