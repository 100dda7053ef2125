//! Rounds near-projective submeasurements to exactly projective ones and
//! checks the rounding distance against the bound √(18ζ), where ζ is the
//! projectivity deficit E_a τ(A_a − A_a²) of the input.
//!
//! Run: `cargo run --example orthogonalization`

use tcgame::opalg::{orthogonalize, random_submeasurement};

fn main() {
    println!("{:>6} {:>12} {:>12} {:>12}", "seed", "zeta", "distance", "bound");
    for seed in 0..10u64 {
        let sub = random_submeasurement(6, 4, seed, 0.03).unwrap();
        let (rounded, report) = orthogonalize(&sub).expect("rounding succeeds");
        assert!(report.distance <= report.bound + 1e-12);
        assert!(
            rounded
                .validate(&tcgame::opalg::TolProfile::default(), true)
                .is_ok(),
            "output is projective"
        );
        println!(
            "{seed:>6} {:>12.3e} {:>12.3e} {:>12.3e}",
            report.zeta, report.distance, report.bound
        );
    }
    println!("all rounding distances within sqrt(18 zeta)");
}
