//! Tensor-code nonlocal games over finite-dimensional synchronous
//! strategies, together with the constructive machinery used to analyze
//! them, executable at desk scale.
//!
//! The library builds, evaluates, and dissects the *augmented tensor code
//! test*: a game in which provers claim to hold a codeword of a tensor code
//! `C^{⊗m}` and are probed with axis-parallel line questions, point
//! questions, and subcube commutation questions. Strategies are
//! finite-dimensional synchronous (tracial) strategies — projective
//! measurement families under the normalized trace `τ = tr/r` — or
//! bipartite entangled strategies for the two-prover variant.
//!
//! Beyond game evaluation, the crate implements the constructive pipeline
//! that turns a well-performing strategy into a global codeword
//! measurement, with every step instrumented so that the inequalities it is
//! supposed to satisfy are *checked numerically* rather than assumed:
//!
//! * [`galois`] — exact arithmetic and Gaussian elimination over GF(q);
//! * [`codes`] — interpolable (MDS) linear codes, Reed–Solomon construction,
//!   brute-force distance, interpolation maps;
//! * [`tensor`] — tensor codewords, axis-parallel lines, subcubes, slice
//!   restriction and interpolation;
//! * [`opalg`] — dense complex operator algebra: normalized trace, τ-norms,
//!   (sub)measurements, consistency/closeness metrics, projective rounding;
//! * [`game`] — the test and its two-prover variant as executable games:
//!   exact values, goodness metrics, Monte-Carlo referee, symmetrization;
//! * [`strategies`] — honest, classical, mixed, corrupted, and adversarial
//!   strategy constructors;
//! * [`extract`] — the soundness pipeline: SDP duality via matrix
//!   exponentiated gradient, self-improvement, pasting (two methods), and
//!   the recursive extraction driver;
//! * [`spectral`] — axis-graph Laplacian spectral gaps, binomial tails, and
//!   the operator Chernoff check;
//! * [`cli`] — run configuration, JSON reports, and the command surface
//!   backing the `tcgame` binary.
//!
//! The `examples/` directory is the primary interface: one runnable example
//! per capability. A thin `tcgame` binary exposes the same operations for
//! scripted runs.

pub mod cli;
pub mod codes;
pub mod extract;
pub mod galois;
pub mod game;
pub mod opalg;
pub mod spectral;
pub mod strategies;
pub mod tensor;
