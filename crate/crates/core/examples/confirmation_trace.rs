//! Runs a short simulation with tracing on and prints how the confidence
//! bounds at the first few levels evolve, sampled every ten votes, until each leader is confirmed.

use prism_core::confirmation::LeaderDecision;
use prism_core::config::ExperimentConfig;
use prism_core::netsim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_profile(
        "desk",
        Some(serde_json::json!({ "duration": 60.0, "trace": true, "workload": { "kind": "none" } })),
    )?;
    let out = netsim::run(&cfg, 5)?;
    for level in 1..=3 {
        println!("level {level}");
        let mut shown = usize::MAX;
        for r in out.trace.iter().filter(|r| r.level == level) {
            let confirmed = matches!(r.decision, LeaderDecision::Confirmed(_));
            if r.votes / 10 == shown && !confirmed {
                continue;
            }
            shown = r.votes / 10;
            let best = r.candidates.iter().map(|c| c.lower).fold(0.0, f64::max);
            println!(
                "  t={:>6.2}s votes {:>3} mean depth {:>5.2} best lower {:>6.2} private upper {:>6.2}",
                r.time, r.votes, r.mean_depth, best, r.private_upper
            );
            if confirmed {
                println!("  confirmed");
                break;
            }
        }
    }
    Ok(())
}
