//! The two-prover view: embeds a synchronous strategy into a bipartite one
//! (maximally entangled state, transposed second family), checks that the
//! value and the synchronicity defect ξ behave as expected, symmetrizes,
//! and contrasts with an entangled strategy built from anticommuting
//! observables that aces every line but fails the consistency tests.
//!
//! Run: `cargo run --example two_prover`

use tcgame::cli::{build_strategy, RunConfig, StrategySpec};
use tcgame::codes::make_reed_solomon;
use tcgame::game::{
    build_two_prover_game, evaluate_bipartite, evaluate_synchronous, goodness_synchronous,
    symmetrize, synchronous_embedding,
};
use tcgame::strategies::anticommuting_pair_strategy;

fn main() {
    let code = make_reed_solomon(5, 5, 1, None).unwrap();
    let game = build_two_prover_game(&code, 2).unwrap();
    let mut cfg = RunConfig::default();
    cfg.strategy = StrategySpec::PointFlips { rate: 0.06 };
    let (strategy, _) = build_strategy(&cfg, &code, None).unwrap();
    let sync_value = evaluate_synchronous(&strategy, &game).unwrap();
    let bipartite = synchronous_embedding(&strategy);
    let (bi_value, bi_good) = evaluate_bipartite(&bipartite, &game).unwrap();
    println!("synchronous value = {sync_value:.9}");
    println!(
        "embedded value    = {bi_value:.9}, xi = {:.3e}",
        bi_good.xi.unwrap_or(f64::NAN)
    );
    let sym = symmetrize(&bipartite);
    let (sym_value, sym_good) = evaluate_bipartite(&sym, &game).unwrap();
    println!(
        "symmetrized value = {sym_value:.9}, xi = {:.3e}",
        sym_good.xi.unwrap_or(f64::NAN)
    );

    // Anticommuting exhibit: perfect on lines, heavily punished on subcubes.
    let (exhibit, small_code) = anticommuting_pair_strategy().unwrap();
    let small_game = tcgame::game::build_game(&small_code, 2).unwrap();
    let g = goodness_synchronous(&exhibit, &small_game).unwrap();
    println!(
        "anticommuting exhibit: lines pass = {:.6}, subcube pass = {:.6}, eps = {:.3e}, delta = {:.6}",
        g.lines_pass, g.subcube_pass, g.eps, g.delta
    );
}
