//! The longest-chain protocol Prism is compared against, and closed-form
//! reliability of both.

mod analytic;
mod sim;

pub use analytic::{auto_depth, nakamoto_reversal, prism_vote_aggregation, prism_vote_aggregation_ln, AnalyticError};
pub use sim::{LcBlock, LongestChainSim};
