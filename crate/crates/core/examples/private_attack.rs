//! A private double-spend attack: the adversary withholds a competing
//! proposer block and privately votes for it on every voter chain, then
//! publishes once it leads on a majority of chains. Prints, per seed,
//! whether the honest observer ever confirmed a leader it later lost.

use prism_core::config::ExperimentConfig;
use prism_core::harness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(8);
    let duration: f64 = std::env::args().nth(2).map(|s| s.parse()).transpose()?.unwrap_or(150.0);
    let cfg = ExperimentConfig::from_profile(
        "desk",
        Some(serde_json::json!({
            "duration": duration,
            "drain": 30.0,
            "workload": { "kind": "none" },
            "adversary": {
                "power": 0.3,
                "nodes": 3,
                "scenario": { "kind": "private_double_spend", "attack_start": 20.0 }
            }
        })),
    )?;
    let seeds: Vec<u64> = (1..=runs).collect();
    let b = harness::batch(&cfg, &seeds)?;
    for r in &b.reports {
        let a = r.attack.as_ref().expect("attack report");
        println!(
            "seed {:>3}: target {:?}, released {}, attack success {}, reversals {}, levels {}, {:.2}s",
            r.seed, a.target_level, a.released, a.success, r.post_confirmation_reversals, r.confirmed_levels, r.wall_clock_seconds
        );
    }
    println!(
        "runs with reversals: {} / {}, attack success frequency {:.3}",
        b.runs_with_reversals,
        b.seeds.len(),
        b.attack_success_frequency.unwrap_or(0.0)
    );
    Ok(())
}
