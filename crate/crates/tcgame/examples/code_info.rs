//! Prints the parameters of a few Reed–Solomon base codes and the tensor
//! agreement bound γ_m = 1 − (d/n)^m.
//!
//! Run: `cargo run --example code_info`

use tcgame::codes::make_reed_solomon;
use tcgame::tensor::gamma;

fn main() {
    for (q, n, s) in [(3u64, 3usize, 1usize), (5, 5, 1), (7, 5, 2)] {
        let code = make_reed_solomon(q, n, s, None).expect("valid parameters");
        println!(
            "RS(q={q}, n={n}, s={s}): [n={}, k={}, d={}] over GF({}), t = {}, |C| = {}",
            code.n(),
            code.k(),
            code.d(),
            code.q(),
            code.t(),
            code.size()
        );
        for m in 1..=3 {
            println!("  γ_{m} = {:.6}", gamma(code.n(), code.d(), m));
        }
    }
}
