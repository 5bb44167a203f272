//! Scoreboarded parallel sanitization.
//!
//! A single controller issues transactions in ledger order to a pool of
//! workers. Each in-flight transaction claims its input and output outpoints
//! on a scoreboard; a transaction whose outpoints collide with a claim waits
//! until the claiming transaction finishes. Issue never skips ahead, so the
//! result is identical to the sequential fold.

use std::collections::HashSet;
use std::sync::Mutex;
use std::time::Duration;

use crossbeam_channel::{bounded, unbounded};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tx::{OutPoint, Transaction};
use super::utxo::UtxoSet;

/// Tuning for [`sanitize_parallel_with`].
#[derive(Debug, Clone, Copy)]
pub struct ParallelOptions {
    pub workers: usize,
    /// When set, workers sleep for a random few microseconds before each
    /// job, perturbing completion order. Used by stress tests.
    pub schedule_jitter_seed: Option<u64>,
}

impl ParallelOptions {
    pub fn new(workers: usize) -> Self {
        ParallelOptions { workers, schedule_jitter_seed: None }
    }
}

/// Parallel equivalent of [`super::sanitize`].
pub fn sanitize_parallel(txs: &[Transaction], initial: UtxoSet, workers: usize) -> (Vec<Transaction>, UtxoSet) {
    sanitize_parallel_with(txs, initial, ParallelOptions::new(workers))
}

fn claims(tx: &Transaction) -> Vec<OutPoint> {
    tx.inputs().iter().copied().chain(tx.created()).collect()
}

pub fn sanitize_parallel_with(
    txs: &[Transaction],
    initial: UtxoSet,
    opts: ParallelOptions,
) -> (Vec<Transaction>, UtxoSet) {
    let workers = opts.workers.max(1);
    let set = Mutex::new(initial);
    let mut applied = vec![false; txs.len()];

    std::thread::scope(|scope| {
        let (job_tx, job_rx) = bounded::<usize>(workers);
        let (done_tx, done_rx) = unbounded::<(usize, bool)>();
        for w in 0..workers {
            let job_rx = job_rx.clone();
            let done_tx = done_tx.clone();
            let set = &set;
            let mut jitter = opts.schedule_jitter_seed.map(|s| ChaCha8Rng::seed_from_u64(s ^ (w as u64) << 32));
            scope.spawn(move || {
                for idx in job_rx.iter() {
                    if let Some(rng) = jitter.as_mut() {
                        std::thread::sleep(Duration::from_micros(rng.gen_range(0..40)));
                    }
                    let ok = run_one(&txs[idx], set);
                    if done_tx.send((idx, ok)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(job_rx);
        drop(done_tx);

        let mut board: HashSet<OutPoint> = HashSet::new();
        let mut in_flight: Vec<Option<Vec<OutPoint>>> = vec![None; txs.len()];
        let mut outstanding = 0usize;
        let mut retire = |idx: usize, ok: bool, board: &mut HashSet<OutPoint>, in_flight: &mut Vec<Option<Vec<OutPoint>>>| {
            applied[idx] = ok;
            for op in in_flight[idx].take().expect("job was in flight") {
                board.remove(&op);
            }
        };
        for (idx, tx) in txs.iter().enumerate() {
            let keys = claims(tx);
            while keys.iter().any(|k| board.contains(k)) || outstanding >= workers {
                let (done, ok) = done_rx.recv().expect("workers alive");
                retire(done, ok, &mut board, &mut in_flight);
                outstanding -= 1;
            }
            board.extend(keys.iter().copied());
            in_flight[idx] = Some(keys);
            outstanding += 1;
            job_tx.send(idx).expect("workers alive");
        }
        drop(job_tx);
        while outstanding > 0 {
            let (done, ok) = done_rx.recv().expect("workers alive");
            retire(done, ok, &mut board, &mut in_flight);
            outstanding -= 1;
        }
    });

    let kept = txs.iter().zip(&applied).filter(|(_, ok)| **ok).map(|(t, _)| t.clone()).collect();
    (kept, set.into_inner().expect("no worker panicked"))
}

/// Reads the inputs under the lock, verifies outside it, then writes back.
/// The scoreboard guarantees nobody else touches these outpoints meanwhile.
fn run_one(tx: &Transaction, set: &Mutex<UtxoSet>) -> bool {
    let mut view = UtxoSet::new();
    {
        let guard = set.lock().expect("lock");
        for op in tx.inputs() {
            if let Some(o) = guard.get(op) {
                view.insert(*op, *o);
            }
        }
    }
    if view.check(tx).is_err() {
        return false;
    }
    set.lock().expect("lock").apply_unchecked(tx);
    true
}
