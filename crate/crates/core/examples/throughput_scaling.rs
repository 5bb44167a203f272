//! Sweeps the transaction block rate under a saturating workload and shows
//! that throughput grows with it while forking stays flat.

use prism_core::config::ExperimentConfig;
use prism_core::harness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8} {:>10} {:>12} {:>12}", "tx rate", "tps", "voter fork", "prop. fork");
    for rate in [0.5, 1.0, 2.0, 4.0] {
        let cfg = ExperimentConfig::from_profile(
            "desk",
            Some(serde_json::json!({
                "duration": 200.0,
                "workload": { "kind": "saturated" },
                "prism": { "tx_rate": rate, "tx_block_capacity": 50 }
            })),
        )?;
        let b = harness::batch(&cfg, &[1, 2])?;
        let m = |k: &str| b.metrics.get(k).map_or(f64::NAN, |s| s.mean);
        println!(
            "{rate:>8.1} {:>10.1} {:>12.4} {:>12.4}",
            m("throughput.confirmed_sanitized_tps"),
            m("forking.voter"),
            m("forking.proposer")
        );
    }
    Ok(())
}
