//! Runs the desk profile for a short while and prints the report.

use prism_core::config::ExperimentConfig;
use prism_core::netsim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let duration: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(120.0);
    let protocol = std::env::args().nth(2).unwrap_or_else(|| "prism".into());
    let cfg = ExperimentConfig::from_profile(
        "desk",
        Some(serde_json::json!({ "duration": duration, "protocol": protocol })),
    )?;
    let out = netsim::run(&cfg, 7)?;
    println!("{}", serde_json::to_string_pretty(&out.report)?);
    Ok(())
}
