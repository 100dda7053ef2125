//! Solves the minimal-dominating-functional program
//! `min tr(W) s.t. W ⪰ A_g/r` together with its dual over complete
//! measurements, on random PSD instances, and prints the primal/dual values,
//! the duality gap, and the complementary-slackness residual.
//!
//! Run: `cargo run --example duality`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use tcgame::extract::solve_duality;
use tcgame::opalg::random_contraction_psd;

fn main() {
    let r = 3;
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "seed", "primal", "dual", "gap", "cs_resid"
    );
    for seed in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BTreeMap::new();
        for g in 0..4usize {
            a.insert(g, random_contraction_psd(r, &mut rng));
        }
        let sol = solve_duality(&a, r, 1e-6).expect("solver converges");
        println!(
            "{seed:>6} {:>12.8} {:>12.8} {:>12.3e} {:>12.3e}",
            sol.primal, sol.dual, sol.gap, sol.cs_residual
        );
    }
}
