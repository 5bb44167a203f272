//! Runs the same workload on a ring, a random regular graph and a complete
//! graph and reports how hop count and delay shape latency and forking.

use prism_core::config::ExperimentConfig;
use prism_core::netsim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topologies = [
        serde_json::json!({ "kind": "ring" }),
        serde_json::json!({ "kind": "random_regular", "degree": 4 }),
        serde_json::json!({ "kind": "complete" }),
    ];
    for topology in topologies {
        let cfg = ExperimentConfig::from_profile(
            "desk",
            Some(serde_json::json!({ "duration": 150.0, "network": { "topology": topology.clone() } })),
        )?;
        let r = netsim::run(&cfg, 2)?.report;
        println!(
            "{:<16} diameter {:>2}  mean hops {:>5.2}  block delay {:.3}s  voter fork {:.4}  median latency {:.1}s",
            topology["kind"].as_str().unwrap_or("?"),
            r.topology.diameter,
            r.topology.mean_hops,
            r.topology.mean_block_delay,
            r.forking.voter,
            r.latency.median
        );
    }
    Ok(())
}
