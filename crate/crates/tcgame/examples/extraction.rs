//! Runs the full extraction pipeline (restrict → recurse → self-improve →
//! paste → complete) over a grid of corruption rates and prints the sweep
//! table (ρ, ε, δ, η), where η is the final disagreement of the extracted
//! global measurement with the points measurements.
//!
//! Run: `cargo run --release --example extraction`

use tcgame::cli::{cmd_extract, sweep_csv, RunConfig, StrategySpec};

fn main() {
    let mut cfg = RunConfig::default();
    cfg.strategy = StrategySpec::PointFlips { rate: 0.0 };
    cfg.extract.sweep = vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05];
    let report = cmd_extract(&cfg).expect("pipeline runs");
    print!("{}", sweep_csv(report.sweep.as_ref().unwrap()));
    for check in &report.checks {
        println!(
            "[{}] {} — {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
}
