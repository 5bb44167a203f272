use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tx::{OutPoint, Transaction, TxFormatError, TxOutput};
use crate::crypto::PublicKey;

/// Why a transaction could not be applied.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("input {0:?} is not in the UTXO set")]
    MissingInput(OutPoint),
    #[error("input {index} is not authorised by its owner")]
    BadSignature { index: usize },
    #[error("outputs {outputs} exceed inputs {inputs}")]
    ValueOverspend { inputs: u64, outputs: u64 },
    #[error("malformed transaction: {0}")]
    Malformed(TxFormatError),
}

/// One unspent output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utxo {
    pub id: OutPoint,
    pub value: u64,
    pub owner: PublicKey,
}

/// The set of unspent outputs, ordered by outpoint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UtxoSet {
    map: BTreeMap<OutPoint, TxOutput>,
}

impl UtxoSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: OutPoint, out: TxOutput) -> Option<TxOutput> {
        self.map.insert(id, out)
    }

    pub fn get(&self, id: &OutPoint) -> Option<&TxOutput> {
        self.map.get(id)
    }

    pub fn contains(&self, id: &OutPoint) -> bool {
        self.map.contains_key(id)
    }

    pub fn remove(&mut self, id: &OutPoint) -> Option<TxOutput> {
        self.map.remove(id)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Sum of all values.
    pub fn total_value(&self) -> u128 {
        self.map.values().map(|o| o.value as u128).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = Utxo> + '_ {
        self.map.iter().map(|(id, o)| Utxo { id: *id, value: o.value, owner: o.owner })
    }

    /// Sorted list form, suitable for JSON export.
    pub fn to_list(&self) -> Vec<Utxo> {
        self.iter().collect()
    }

    pub fn from_list(list: impl IntoIterator<Item = Utxo>) -> Self {
        UtxoSet { map: list.into_iter().map(|u| (u.id, TxOutput { value: u.value, owner: u.owner })).collect() }
    }

    /// Checks `tx` against the set without modifying it and returns the
    /// input total on success.
    pub fn check(&self, tx: &Transaction) -> Result<u64, ExecError> {
        check_against(tx, |op| self.map.get(op))
    }

    /// Removes the inputs of `tx` and inserts its outputs. The caller must
    /// have checked `tx` first.
    pub fn apply_unchecked(&mut self, tx: &Transaction) {
        for op in tx.inputs() {
            self.map.remove(op);
        }
        for (op, out) in tx.created().zip(tx.outputs()) {
            self.map.insert(op, *out);
        }
    }
}

fn check_against<'a>(
    tx: &Transaction,
    lookup: impl Fn(&OutPoint) -> Option<&'a TxOutput>,
) -> Result<u64, ExecError> {
    if tx.inputs().is_empty() || tx.outputs().is_empty() {
        let e = if tx.inputs().is_empty() { TxFormatError::NoInputs } else { TxFormatError::NoOutputs };
        return Err(ExecError::Malformed(e));
    }
    if tx.witnesses().len() != tx.inputs().len() {
        return Err(ExecError::BadSignature { index: tx.witnesses().len().min(tx.inputs().len()) });
    }
    let mut input_total = 0u64;
    for (index, (op, w)) in tx.inputs().iter().zip(tx.witnesses()).enumerate() {
        if tx.inputs()[..index].contains(op) {
            return Err(ExecError::MissingInput(*op));
        }
        let coin = lookup(op).ok_or(ExecError::MissingInput(*op))?;
        if coin.owner != w.pubkey || !w.pubkey.verify(&tx.id().0, &w.signature) {
            return Err(ExecError::BadSignature { index });
        }
        input_total = input_total
            .checked_add(coin.value)
            .ok_or(ExecError::ValueOverspend { inputs: u64::MAX, outputs: 0 })?;
    }
    let outputs = tx.output_total().ok_or(ExecError::ValueOverspend { inputs: input_total, outputs: u64::MAX })?;
    if outputs > input_total {
        return Err(ExecError::ValueOverspend { inputs: input_total, outputs });
    }
    Ok(input_total)
}

/// A copy-on-write view over a [`UtxoSet`] for tentative execution: spends
/// and creations are recorded locally and the base set is never modified.
#[derive(Debug, Clone)]
pub struct UtxoOverlay<'a> {
    base: &'a UtxoSet,
    spent: std::collections::HashSet<OutPoint>,
    created: std::collections::HashMap<OutPoint, TxOutput>,
}

impl<'a> UtxoOverlay<'a> {
    pub fn new(base: &'a UtxoSet) -> Self {
        UtxoOverlay { base, spent: Default::default(), created: Default::default() }
    }

    pub fn get(&self, op: &OutPoint) -> Option<&TxOutput> {
        if let Some(out) = self.created.get(op) {
            return Some(out);
        }
        if self.spent.contains(op) {
            return None;
        }
        self.base.get(op)
    }

    /// Same as [`execute`], against the overlay.
    pub fn execute(&mut self, tx: &Transaction) -> Result<u64, ExecError> {
        let inputs = check_against(tx, |op| self.get(op))?;
        for op in tx.inputs() {
            if self.created.remove(op).is_none() {
                self.spent.insert(*op);
            }
        }
        for (op, out) in tx.created().zip(tx.outputs()) {
            self.created.insert(op, *out);
        }
        Ok(inputs)
    }
}

/// Applies `tx` to `set` atomically: either every input is consumed and every
/// output created, or `set` is untouched.
pub fn execute(tx: &Transaction, set: &mut UtxoSet) -> Result<(), ExecError> {
    set.check(tx)?;
    set.apply_unchecked(tx);
    Ok(())
}

/// Left fold of [`execute`] over `txs`, keeping only transactions that apply.
pub fn sanitize(txs: &[Transaction], initial: UtxoSet) -> (Vec<Transaction>, UtxoSet) {
    let mut set = initial;
    let mut kept = Vec::new();
    for tx in txs {
        if execute(tx, &mut set).is_ok() {
            kept.push(tx.clone());
        }
    }
    (kept, set)
}

/// Checks that replaying `ledger` from `before` produces exactly `after` and
/// that the total value dropped by no more than the fees of the replayed
/// transactions.
pub fn conservation_check(before: &UtxoSet, ledger: &[Transaction], after: &UtxoSet) -> bool {
    let mut set = before.clone();
    let mut fees: u128 = 0;
    for tx in ledger {
        let Ok(inputs) = set.check(tx) else {
            return false;
        };
        fees += (inputs - tx.output_total().expect("checked")) as u128;
        set.apply_unchecked(tx);
    }
    set == *after && after.total_value() + fees == before.total_value()
}
