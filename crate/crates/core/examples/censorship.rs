//! An adversary with a quarter of the hash power mines empty transaction
//! blocks and never votes for blocks it did not mine.

use prism_core::config::ExperimentConfig;
use prism_core::netsim;

fn run(power: f64, nodes: usize) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let scenario = if nodes == 0 { "none" } else { "censorship" };
    let cfg = ExperimentConfig::from_profile(
        "desk",
        Some(serde_json::json!({
            "duration": 300.0,
            "workload": { "kind": "saturated" },
            "prism": { "tx_block_capacity": 50, "vote_mode": "most_voted" },
            "adversary": { "power": power, "nodes": nodes, "scenario": { "kind": scenario } }
        })),
    )?;
    let r = netsim::run(&cfg, 1)?.report;
    Ok((r.throughput.confirmed_sanitized_tps, r.latency.median))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (tps0, lat0) = run(0.0, 0)?;
    let (tps1, lat1) = run(0.25, 5)?;
    println!("attack-free: {tps0:.1} tps, median latency {lat0:.1}s");
    println!("censoring:   {tps1:.1} tps, median latency {lat1:.1}s");
    println!("throughput ratio {:.3}", tps1 / tps0);
    Ok(())
}
