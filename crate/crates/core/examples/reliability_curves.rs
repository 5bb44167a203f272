//! Prints reversal probability against confirmation depth for a single
//! longest chain and for vote aggregation over many voter chains.

use prism_core::baseline::{auto_depth, nakamoto_reversal};
use prism_core::harness::curves::reliability_depth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 0.3;
    println!("{:>3}  {:>12}  {:>12}", "k", "single chain", "m = 1000");
    for row in reliability_depth(beta, 1000, 1..=12)? {
        println!("{:>3}  {:>12.3e}  {:>12.3e}", row.k, row.longest_chain, row.prism);
    }
    for eps in [1e-2, 1e-3, 1e-6, 1e-9] {
        let k = auto_depth(beta, eps)?;
        println!("eps {eps:e}: depth {k} (reversal {:.2e})", nakamoto_reversal(k, beta)?);
    }
    Ok(())
}
