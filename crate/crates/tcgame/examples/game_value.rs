//! Evaluates the tensor-code game exactly on an honest strategy and on
//! increasingly corrupted classical strategies, printing the value and the
//! goodness readings (ε from the lines test, δ from the subcube test).
//!
//! Run: `cargo run --example game_value`

use tcgame::cli::{cmd_value, RunConfig, StrategySpec};

fn main() {
    let mut cfg = RunConfig::default();
    cfg.rounds = 0; // exact values only here
    for rho in [0.0, 0.02, 0.05, 0.10, 0.20] {
        cfg.strategy = if rho == 0.0 {
            StrategySpec::Honest
        } else {
            StrategySpec::PointFlips { rate: rho }
        };
        cfg.rounds = 1; // keep the Monte-Carlo leg trivial
        let report = cmd_value(&cfg).expect("evaluation succeeds");
        let v = report.value.as_ref().unwrap();
        let g = report.goodness.as_ref().unwrap();
        println!(
            "rho = {rho:.2}: value = {:.6}, eps = {:.6}, delta = {:.6}",
            v.exact, g.eps, g.delta
        );
    }
}
