//! Compares confirmation latency of Prism and a longest-chain protocol
//! tuned to the same security level.

use prism_core::config::ExperimentConfig;
use prism_core::netsim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for (protocol, duration) in [("prism", 300.0), ("longest_chain", 900.0)] {
        let cfg = ExperimentConfig::from_profile(
            "desk",
            Some(serde_json::json!({
                "protocol": protocol,
                "duration": duration,
                "confirmation": { "beta": 0.3, "epsilon": 1e-3 }
            })),
        )?;
        let r = netsim::run(&cfg, seed)?.report;
        println!(
            "{protocol:>14}: median latency {:>7.1}s  p95 {:>7.1}s  {:>6.1} tps  depth {}",
            r.latency.median,
            r.latency.p95,
            r.throughput.confirmed_sanitized_tps,
            r.confirmation_depth.map_or("votes".to_string(), |k| k.to_string())
        );
    }
    Ok(())
}
