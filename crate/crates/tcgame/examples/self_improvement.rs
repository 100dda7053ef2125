//! Self-improves a codeword-measurement hypothesis against a strategy's
//! points measurements: sandwich with the duality measurement, round to a
//! projective family, and read off ν (hypothesis inconsistency), τ(H)
//! (completeness) and the deficits entering the guarantee
//! τ(H) ≥ 1 − ν − ζ.
//!
//! Run: `cargo run --example self_improvement`

use tcgame::cli::{build_strategy, RunConfig, StrategySpec};
use tcgame::codes::make_reed_solomon;
use tcgame::extract::self_improve;
use tcgame::opalg::{identity, Submeasurement};
use tcgame::tensor::enumerate_tensor_codewords;

fn main() {
    let code = make_reed_solomon(5, 5, 1, None).unwrap();
    let words = enumerate_tensor_codewords(&code, 2).unwrap();
    // A deliberately bad starting hypothesis: the uniform measurement.
    let uniform = Submeasurement::new(
        1,
        (0..words.len())
            .map(|i| (i, identity(1).map(|z| z / words.len() as f64)))
            .collect(),
    )
    .unwrap();

    let mut cfg = RunConfig::default();
    for rho in [0.0, 0.04] {
        cfg.strategy = if rho == 0.0 {
            StrategySpec::Honest
        } else {
            StrategySpec::PointFlips { rate: rho }
        };
        let (strategy, _) = build_strategy(&cfg, &code, None).unwrap();
        let imp = self_improve(&strategy, &code, &uniform, 1e-8).unwrap();
        println!(
            "rho = {rho:.2}: nu = {:.4}, tau(H) = {:.6}, consistency deficit = {:.3e}, psi deficit = {:.3e}, outcomes kept = {}",
            imp.nu,
            imp.completeness,
            imp.consistency_deficit,
            imp.psi_deficit,
            imp.h.len()
        );
    }
}
