//! Spam mitigation by random transaction release delays: analytic bound and
//! simulated fraction of redundant spam copies for exponential jitter.

use prism_core::config::ExperimentConfig;
use prism_core::harness::curves::{spam_jitter, JitterFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let simulate = std::env::args().any(|a| a == "--simulate");
    let base = ExperimentConfig::from_profile(
        "desk",
        Some(serde_json::json!({
            "duration": 100.0,
            "network": { "link_delay": 0.9 },
            "workload": { "kind": "none" },
            "prism": { "tx_rate": 100.0 },
            "adversary": { "scenario": { "kind": "spam", "rate": 10.0, "victims": 20, "start": 10.0, "stop": 60.0 } }
        })),
    )?;
    let rows = spam_jitter(JitterFamily::Exponential, &[0.05, 0.1, 0.5, 2.0], 2.0, simulate.then_some(&base), &[1])?;
    println!("{:>8} {:>10} {:>10}", "rate", "bound", "simulated");
    for r in rows {
        let sim = r.simulated.map_or("-".to_string(), |s| format!("{s:.3}"));
        println!("{:>8.2} {:>10.4} {:>10}", r.param, r.bound.unwrap_or(f64::NAN), sim);
    }
    if !simulate {
        println!("pass --simulate to also run the network simulation");
    }
    Ok(())
}
