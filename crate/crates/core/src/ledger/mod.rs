//! UTXO transactions, state transitions and ledger sanitization.
//!
//! A raw ledger is any ordered list of transactions, possibly containing
//! double spends. Sanitizing folds [`execute`] over it and keeps only the
//! transactions that apply, which yields the final ledger.

mod parallel;
mod tx;
mod utxo;

pub use parallel::{sanitize_parallel, sanitize_parallel_with, ParallelOptions};
pub use tx::{transaction_id, OutPoint, Transaction, TxFormatError, TxOutput, Witness, TX_WIRE_BYTES};
pub use utxo::{conservation_check, execute, sanitize, ExecError, Utxo, UtxoOverlay, UtxoSet};
