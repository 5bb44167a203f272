//! Runs several seeds in parallel and writes the aggregate to a directory.

use prism_core::config::ExperimentConfig;
use prism_core::harness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/batch-example".into());
    let cfg = ExperimentConfig::from_profile("desk", Some(serde_json::json!({ "duration": 120.0 })))?;
    let b = harness::batch(&cfg, &[1, 2, 3, 4])?;
    harness::write_batch(std::path::Path::new(&out), &b)?;
    for key in ["throughput.confirmed_sanitized_tps", "latency.median", "forking.voter"] {
        let s = &b.metrics[key];
        println!("{key:<36} {:>9.3} ± {:.3}  [{:.3}, {:.3}]", s.mean, s.ci95, s.min, s.max);
    }
    println!("wrote {out}/batch.json and {out}/runs.csv");
    Ok(())
}
