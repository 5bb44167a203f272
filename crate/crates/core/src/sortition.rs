//! Mapping a uniform draw to a block type.
//!
//! The unit interval is split into `m + 2` regions whose widths are
//! proportional to the per-type mining rates: `m` voter regions of width
//! `f_v / f` first, then the transaction region (`f_t / f`), then the
//! proposer region (`f_p / f`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::BlockType;

#[derive(Debug, Error, PartialEq)]
pub enum SortitionError {
    #[error("at least one voter chain is required")]
    NoVoterChains,
    #[error("mining rate `{name}` must be finite and positive, got {value}")]
    BadRate { name: &'static str, value: f64 },
}

/// Voter chain count and per-type mining rates (blocks per second).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SortitionParams {
    pub voter_chains: u32,
    pub tx_rate: f64,
    pub proposer_rate: f64,
    /// Rate of each individual voter chain.
    pub voter_rate: f64,
}

impl SortitionParams {
    pub fn validate(&self) -> Result<(), SortitionError> {
        if self.voter_chains == 0 {
            return Err(SortitionError::NoVoterChains);
        }
        for (name, value) in
            [("tx_rate", self.tx_rate), ("proposer_rate", self.proposer_rate), ("voter_rate", self.voter_rate)]
        {
            if !(value.is_finite() && value > 0.0) {
                return Err(SortitionError::BadRate { name, value });
            }
        }
        Ok(())
    }

    /// Total superblock rate `f = m f_v + f_t + f_p`.
    pub fn total_rate(&self) -> f64 {
        self.voter_chains as f64 * self.voter_rate + self.tx_rate + self.proposer_rate
    }

    /// Probability that one mined superblock lands in `kind`'s slot.
    pub fn probability(&self, kind: BlockType) -> f64 {
        let f = self.total_rate();
        match kind {
            BlockType::Voter(_) => self.voter_rate / f,
            BlockType::Transaction => self.tx_rate / f,
            BlockType::Proposer => self.proposer_rate / f,
        }
    }
}

/// Maps `u ∈ [0, 1)` to a block type.
pub fn sortition(u: f64, params: &SortitionParams) -> BlockType {
    let f = params.total_rate();
    let m = params.voter_chains;
    let x = u.clamp(0.0, 1.0) * f;
    let voter_span = m as f64 * params.voter_rate;
    if x < voter_span {
        let i = (x / params.voter_rate) as u32;
        BlockType::Voter(i.min(m - 1))
    } else if x < voter_span + params.tx_rate {
        BlockType::Transaction
    } else {
        BlockType::Proposer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32) -> SortitionParams {
        SortitionParams { voter_chains: m, tx_rate: 1.0, proposer_rate: 1.0, voter_rate: 1.0 }
    }

    #[test]
    fn equal_rates_layout() {
        let params = p(2);
        assert_eq!(sortition(0.0, &params), BlockType::Voter(0));
        assert_eq!(sortition(0.3, &params), BlockType::Voter(1));
        assert_eq!(sortition(0.6, &params), BlockType::Transaction);
        assert_eq!(sortition(0.8, &params), BlockType::Proposer);
        assert_eq!(sortition(0.999_999, &params), BlockType::Proposer);
    }

    #[test]
    fn rejects_zero_rate() {
        let mut params = p(2);
        params.tx_rate = 0.0;
        assert!(matches!(params.validate(), Err(SortitionError::BadRate { name: "tx_rate", .. })));
        assert_eq!(p(0).validate(), Err(SortitionError::NoVoterChains));
    }
}
