//! Adversarial voters split their votes to keep two proposer blocks tied.
//! Latency rises slowly with the adversary's share while throughput holds.

use prism_core::config::ExperimentConfig;
use prism_core::harness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds: Vec<u64> = (1..=4).collect();
    for (power, nodes) in [(0.0, 0usize), (0.1, 2), (0.25, 5)] {
        let scenario = if nodes == 0 { "none" } else { "balancing" };
        let cfg = ExperimentConfig::from_profile(
            "desk",
            Some(serde_json::json!({
                "duration": 300.0,
                "workload": { "kind": "saturated" },
                "prism": { "tx_block_capacity": 50, "vote_mode": "most_voted" },
                "adversary": { "power": power, "nodes": nodes, "scenario": { "kind": scenario } }
            })),
        )?;
        let b = harness::batch(&cfg, &seeds)?;
        let lat = &b.metrics["latency.median"];
        let tps = &b.metrics["throughput.confirmed_sanitized_tps"];
        println!("adversary {power:.2}: median latency {:.2} ± {:.2}s, {:.1} tps", lat.mean, lat.ci95, tps.mean);
    }
    Ok(())
}
