//! Pastes per-slice codeword measurements into a global tensor-codeword
//! measurement with both methods, and shows Method 2's binomial-tail
//! completeness: slices that fire with probability 1 − κ give pre-completion
//! mass F(1 − κ) = Σ_{i≥t} C(k,i)(1 − κ)^i κ^{k−i}.
//!
//! Run: `cargo run --example pasting`

use tcgame::cli::{build_strategy, RunConfig};
use tcgame::codes::make_reed_solomon;
use tcgame::extract::{paste_method1, paste_method2, PastingConfig};
use tcgame::opalg::{identity, Submeasurement};
use tcgame::spectral::binomial_tail;
use tcgame::tensor::{enumerate_tensor_codewords, restrict_slice};

fn main() {
    let code = make_reed_solomon(5, 5, 1, None).unwrap();
    let cfg = RunConfig::default();
    let (strategy, planted) = build_strategy(&cfg, &code, None).unwrap();
    let words1 = enumerate_tensor_codewords(&code, 1).unwrap();

    // Honest slice measurements: indicators of the planted restrictions.
    let slices: Vec<Submeasurement<usize>> = (0..code.n())
        .map(|x| {
            let slice = restrict_slice(&planted, x).unwrap();
            let idx = words1.iter().position(|w| *w == slice).unwrap();
            Submeasurement::new(1, vec![(idx, identity(1))]).unwrap()
        })
        .collect();

    let p1 = paste_method1(&strategy, &code, &slices, &PastingConfig::default()).unwrap();
    println!(
        "method 1: mass = {:.6}, consistency = {:.3e}, tuples = {}",
        p1.pre_completion_mass, p1.consistency, p1.tuples_used
    );
    let cfg2 = PastingConfig {
        method: 2,
        k: Some(3),
        ..PastingConfig::default()
    };
    let p2 = paste_method2(&strategy, &code, &slices, &cfg2).unwrap();
    println!(
        "method 2 (k=3): mass = {:.6}, consistency = {:.3e}, tuples = {}",
        p2.pre_completion_mass, p2.consistency, p2.tuples_used
    );

    // Bernoulli slices: each slice fires (projectively) with probability
    // 1 - kappa, realized as the 2^n deterministic firing patterns weighted
    // by (1 - kappa)^|S| kappa^(n - |S|). The averaged pre-completion mass
    // is exactly the binomial tail.
    let kappa = 0.25;
    let n = code.n();
    let k = 4usize;
    let cfg_k = PastingConfig {
        method: 2,
        k: Some(k),
        ..PastingConfig::default()
    };
    let mut mass = 0.0;
    for pattern in 0..(1u32 << n) {
        let weight: f64 = (0..n)
            .map(|x| {
                if pattern >> x & 1 == 1 {
                    1.0 - kappa
                } else {
                    kappa
                }
            })
            .product();
        let fired: Vec<Submeasurement<usize>> = (0..n)
            .map(|x| {
                if pattern >> x & 1 == 1 {
                    slices[x].clone()
                } else {
                    Submeasurement::empty(1)
                }
            })
            .collect();
        let p = paste_method2(&strategy, &code, &fired, &cfg_k).unwrap();
        mass += weight * p.pre_completion_mass;
    }
    let tail = binomial_tail(k as u64, code.t() as u64, 1.0 - kappa);
    println!("bernoulli slices (kappa = {kappa}): mean mass = {mass:.6}, F(1 - kappa) = {tail:.6}");
}
