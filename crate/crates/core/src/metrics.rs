//! Run reports.
//!
//! A [`MetricsReport`] has the same schema for every protocol and scenario;
//! fields that do not apply are zero or `None`.

use serde::{Deserialize, Serialize};

use crate::config::Protocol;
use crate::confirmation::TraceRecord;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    /// Entries of the leader-ordered ledger per second, before sanitization.
    pub confirmed_raw_tps: f64,
    /// Entries of the leader-ordered ledger per second that survive
    /// sanitization.
    pub ordered_sanitized_tps: f64,
    /// Distinct transactions per second reaching their first confirmation,
    /// whether through the ordered ledger or through list decoding.
    pub confirmed_sanitized_tps: f64,
    pub confirmed_transactions: u64,
    pub generated_transactions: u64,
}

/// Summary of confirmation latencies, seconds from the mining of the block
/// that first carries a transaction to that transaction's confirmation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: u64,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

impl LatencyStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        LatencyStats {
            count: s.len() as u64,
            mean: s.iter().sum::<f64>() / s.len() as f64,
            median: percentile(&s, 0.5),
            p95: percentile(&s, 0.95),
            min: s[0],
            max: s[s.len() - 1],
        }
    }
}

/// Linear-interpolated percentile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Forking {
    pub proposer: f64,
    pub voter: f64,
    pub longest_chain: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCounts {
    pub transaction: u64,
    pub proposer: u64,
    pub voter: u64,
    pub longest_chain: u64,
    /// Blocks mined by adversarial nodes, of any type.
    pub adversarial: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpamReport {
    pub sets: u64,
    pub victims: u64,
    /// Spam transactions found in mined transaction blocks.
    pub copies_mined: u64,
    /// `copies_mined / (sets · victims)`.
    pub normalized_by_victims: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub scenario: String,
    pub target_level: Option<u64>,
    pub released: bool,
    pub release_time: Option<f64>,
    /// The withheld block ended up as its level's leader.
    pub success: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub nodes: u64,
    pub edges: u64,
    pub diameter: u64,
    pub mean_hops: f64,
    /// Mean first-receipt delay of blocks at honest nodes, seconds.
    pub mean_block_delay: f64,
    /// Mean block size, bytes.
    pub mean_block_bytes: f64,
    /// `h·B/C + h·D` for the measured mean hop count and block size.
    pub model_block_delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub protocol: Protocol,
    pub seed: u64,
    pub config_digest: String,
    pub duration: f64,
    /// Steady-state measurement window `[start, end]`.
    pub window: (f64, f64),
    pub throughput: Throughput,
    pub latency: LatencyStats,
    pub forking: Forking,
    pub blocks: BlockCounts,
    pub confirmed_levels: u64,
    pub confirmation_depth: Option<u32>,
    pub spam: Option<SpamReport>,
    pub attack: Option<AttackReport>,
    pub post_confirmation_reversals: u64,
    pub topology: TopologyReport,
    /// Total value was conserved at every checkpoint.
    pub conservation_ok: bool,
    pub events_processed: u64,
    /// SHA-256 over the processed event sequence.
    pub event_trace_digest: String,
    /// Excluded from determinism comparisons.
    pub wall_clock_seconds: f64,
}

impl MetricsReport {
    /// A copy with host-dependent fields cleared.
    pub fn deterministic(&self) -> Self {
        MetricsReport { wall_clock_seconds: 0.0, ..self.clone() }
    }
}

/// One row of the per-run time series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub time: f64,
    pub confirmed_levels: u64,
    pub confirmed_transactions: u64,
    pub max_level: u64,
    pub voter_forking: f64,
    pub pending_transactions: u64,
    pub conservation_ok: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub report: MetricsReport,
    pub timeseries: Vec<TimePoint>,
    pub trace: Vec<TraceRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latency_summary() {
        let s = LatencyStats::from_samples(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!(s.count, 5);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.mean, 3.0);
        assert!((s.p95 - 4.8).abs() < 1e-12);
        assert_eq!(LatencyStats::from_samples(&[]).count, 0);
    }
}
