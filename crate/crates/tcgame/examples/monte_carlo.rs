//! Plays the game with the seeded Monte-Carlo referee and compares the
//! empirical pass rate against the exact value, at several seeds.
//!
//! Run: `cargo run --release --example monte_carlo`

use tcgame::cli::{build_strategy, RunConfig, StrategySpec};
use tcgame::codes::make_reed_solomon;
use tcgame::game::{build_game, evaluate_synchronous, monte_carlo_play};

fn main() {
    let code = make_reed_solomon(5, 5, 1, None).unwrap();
    let game = build_game(&code, 2).unwrap();
    let mut cfg = RunConfig::default();
    cfg.strategy = StrategySpec::PointFlips { rate: 0.08 };
    for seed in 0..5u64 {
        cfg.seed = seed;
        let (strategy, _) = build_strategy(&cfg, &code, None).unwrap();
        let exact = evaluate_synchronous(&strategy, &game).unwrap();
        let mc = monte_carlo_play(&strategy, &game, 100_000, seed).unwrap();
        let sigma = mc.standard_error.max(1e-12);
        println!(
            "seed {seed}: exact = {exact:.6}, empirical = {:.6} ({} / {}), deviation = {:+.2}σ",
            mc.rate,
            mc.accepted,
            mc.rounds,
            (mc.rate - exact) / sigma
        );
    }
}
