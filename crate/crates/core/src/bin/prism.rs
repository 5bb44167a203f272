//! `prism` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prism_core::harness::{self, curves, HarnessError};

#[derive(Parser)]
#[command(name = "prism", version, about = "Prism consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config merged over the profile.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base profile: `desk` or `paper-shape`.
    #[arg(long, default_value = "desk")]
    profile: String,
    /// Run seed (first seed of a batch).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run(Common),
    /// Run several seeds concurrently and aggregate.
    Batch {
        #[command(flatten)]
        common: Common,
        /// Number of seeds.
        #[arg(long, short = 'n', default_value_t = 10)]
        runs: u64,
    },
    /// Emit curve data as CSV.
    Curves {
        #[arg(value_enum)]
        kind: CurveKind,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
        /// Voter chains for the reliability curve.
        #[arg(long, default_value_t = 1000)]
        m: u32,
        #[arg(long, default_value_t = 30)]
        k_max: u32,
        /// Mean hop count for the utilization curve.
        #[arg(long, default_value_t = 5.0)]
        hops: f64,
        /// Comma-separated β grid for the utilization curve.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.45")]
        betas: Vec<f64>,
        /// Jitter family for the spam curve.
        #[arg(long, value_enum, default_value = "exponential")]
        family: Family,
        /// Comma-separated jitter grid (λ for exponential, J for uniform).
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.5,1")]
        params: Vec<f64>,
        /// Network delay Δ in the spam bound, seconds.
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
        /// Also simulate each spam point on this many seeds (0 = analytic only).
        #[arg(long, default_value_t = 0)]
        runs: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    ReliabilityDepth,
    SpamJitter,
    Utilization,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Uniform,
    Exponential,
}

fn seeds(first: u64, n: u64) -> Vec<u64> {
    (first..first + n).collect()
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(c) => {
            let cfg = harness::load_config(c.config.as_deref(), Some(&c.profile))?;
            let out = prism_core::netsim::run(&cfg, c.seed)?;
            harness::write_run(&c.out, &out)?;
            let r = &out.report;
            println!(
                "{}: {:.1} tps sanitized, median latency {:.2} s, {} confirmed levels -> {}",
                serde_json::to_value(r.protocol)?.as_str().unwrap_or("?"),
                r.throughput.confirmed_sanitized_tps,
                r.latency.median,
                r.confirmed_levels,
                c.out.display()
            );
        }
        Command::Batch { common: c, runs } => {
            let cfg = harness::load_config(c.config.as_deref(), Some(&c.profile))?;
            let b = harness::batch(&cfg, &seeds(c.seed, runs))?;
            harness::write_batch(&c.out, &b)?;
            let tps = b.metrics.get("throughput.confirmed_sanitized_tps");
            println!(
                "{} runs: sanitized tps {:.1} ± {:.1}, runs with reversals {}, attack success {} -> {}",
                b.seeds.len(),
                tps.map_or(0.0, |s| s.mean),
                tps.map_or(0.0, |s| s.ci95),
                b.runs_with_reversals,
                b.attack_success_frequency.map_or("n/a".to_string(), |f| format!("{f:.3}")),
                c.out.display()
            );
            if b.runs_with_reversals > 0 {
                eprintln!("warning: post-confirmation reversals observed");
            }
        }
        Command::Curves { kind, common: c, beta, m, k_max, hops, betas, family, params, delta, runs } => {
            let path = match kind {
                CurveKind::ReliabilityDepth => {
                    let p = c.out.join("reliability_depth.csv");
                    harness::write_csv(&p, &curves::reliability_depth(beta, m, 1..=k_max)?)?;
                    p
                }
                CurveKind::Utilization => {
                    let p = c.out.join("utilization.csv");
                    harness::write_csv(&p, &curves::utilization(&betas, hops)?)?;
                    p
                }
                CurveKind::SpamJitter => {
                    let family = match family {
                        Family::Uniform => curves::JitterFamily::Uniform,
                        Family::Exponential => curves::JitterFamily::Exponential,
                    };
                    let cfg = if runs > 0 { Some(harness::load_config(c.config.as_deref(), Some(&c.profile))?) } else { None };
                    let rows = curves::spam_jitter(family, &params, delta, cfg.as_ref(), &seeds(c.seed, runs))?;
                    let p = c.out.join("spam_jitter.csv");
                    harness::write_csv(&p, &rows)?;
                    p
                }
            };
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
