//! Strategy constructors: honest codeword strategies, classical
//! (deterministic) strategies and their 1-dimensional embeddings, exact
//! block-diagonal mixtures, seeded corruption models, and a Pauli
//! magic-square exhibit whose point observables anticommute.
//!
//! Deterministic provers are synchronous strategies of dimension `r = 1`:
//! every measurement is an indicator family with a single nonzero `1×1`
//! element. Randomized classical provers ("first sample a seed, then play
//! deterministically") are exact block-diagonal mixtures: a weight
//! `p_i = a_i / b_i` is realized by `m_i` diagonal copies of strategy `i`
//! with `m_i · r_i / R = p_i`, so the normalized trace reproduces the
//! convex combination exactly.

use crate::codes::{Codeword, LinearCode};
use crate::galois::FieldElement;
use crate::game::SynchronousStrategy;
use crate::opalg::{Op, Submeasurement};
use crate::tensor::{
    enumerate_lines, enumerate_points, point_index, restrict_line, tensor_encode, TensorCodeword,
};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Op(#[from] crate::opalg::OpError),
    #[error(transparent)]
    Code(#[from] crate::codes::CodeError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
    #[error("line answer at line {0} is not a codeword")]
    NonCodewordLine(usize),
    #[error("mixture weights invalid: {0}")]
    BadWeights(String),
    #[error("mixture dimension {0} exceeds budget {1}")]
    MixtureBudget(usize, usize),
    #[error("corruption model {0} does not apply to this strategy kind")]
    ModelMismatch(&'static str),
}

/// A deterministic strategy: total answer functions on the enumerated
/// question domains. Pair answers are stored explicitly so corruption can
/// leave them honest while the points function changes.
#[derive(Debug, Clone)]
pub struct ClassicalStrategy {
    pub n: usize,
    pub m: usize,
    pub q: u64,
    /// Answer per canonical point index.
    pub point_values: Vec<u64>,
    /// Answer per canonical line index.
    pub line_words: Vec<Codeword>,
    /// Answer per ordered pair `(u, v)`, indexed `u * n^m + v`.
    pub pair_values: Vec<(u64, u64)>,
}

impl ClassicalStrategy {
    /// The deterministic strategy reading every answer off one global table.
    pub fn from_table(n: usize, m: usize, q: u64, table: &[FieldElement]) -> Self {
        let num_points = n.pow(m as u32);
        assert_eq!(table.len(), num_points);
        let point_values: Vec<u64> = table.iter().map(|v| v.value()).collect();
        let c = TensorCodeword {
            m,
            n,
            table: table.to_vec(),
        };
        let line_words = enumerate_lines(n, m)
            .iter()
            .map(|l| restrict_line(&c, l))
            .collect();
        let pair_values = (0..num_points)
            .flat_map(|u| (0..num_points).map(move |v| (u, v)))
            .map(|(u, v)| (point_values[u], point_values[v]))
            .collect();
        Self {
            n,
            m,
            q,
            point_values,
            line_words,
            pair_values,
        }
    }
}

/// Seeded corruption of a strategy.
#[derive(Debug, Clone)]
pub enum CorruptionKind {
    /// Flip `⌈ρ n^m⌉` distinct point answers to wrong values.
    PointFlips,
    /// Replace the points table on `⌈ρ n⌉` last-coordinate slices by the
    /// corresponding slices of a different random tensor codeword.
    SliceScramble,
    /// Blend the strategy with honest strategies of random codewords
    /// (total weight `ρ`, rounded to an exact rational).
    MixtureOfCodewords,
}

#[derive(Debug, Clone)]
pub struct CorruptionModel {
    pub kind: CorruptionKind,
    /// Corruption rate `ρ ∈ [0, 1]`.
    pub rate: f64,
    pub seed: u64,
    /// When set, pair answers are re-derived from the corrupted points
    /// function; by default they stay honest, isolating the points-side
    /// error channel.
    pub rederive_pairs: bool,
}

impl CorruptionModel {
    pub fn point_flips(rate: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&rate));
        Self {
            kind: CorruptionKind::PointFlips,
            rate,
            seed,
            rederive_pairs: false,
        }
    }
}

fn indicator(r1: Complex64) -> Op {
    DMatrix::from_element(1, 1, r1)
}

/// The honest strategy of a tensor codeword `c`: the provers answer
/// `c(u)`, `c|ℓ`, and `(c(u), c(v))` deterministically. Dimension 1,
/// projective, and it passes the game with probability 1.
pub fn honest_strategy(
    code: &LinearCode,
    c: &TensorCodeword,
) -> Result<SynchronousStrategy, StrategyError> {
    embed_classical(code, &ClassicalStrategy::from_table(c.n, c.m, code.q(), &c.table))
}

/// Embeds a deterministic strategy as a 1-dimensional synchronous strategy
/// (indicator measurement families). Fails if a line answer is not a base
/// codeword, since line outcomes are codeword indices.
pub fn embed_classical(
    code: &LinearCode,
    s: &ClassicalStrategy,
) -> Result<SynchronousStrategy, StrategyError> {
    let one = indicator(Complex64::new(1.0, 0.0));
    let points = s
        .point_values
        .iter()
        .map(|&v| Submeasurement::new(1, vec![(v as usize, one.clone())]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut lines = Vec::with_capacity(s.line_words.len());
    for (li, w) in s.line_words.iter().enumerate() {
        let idx = code
            .index_of_codeword(w)?
            .ok_or(StrategyError::NonCodewordLine(li))?;
        lines.push(Submeasurement::new(1, vec![(idx as usize, one.clone())])?);
    }
    let pairs = s
        .pair_values
        .iter()
        .map(|&(a, b)| Submeasurement::new(1, vec![((a as usize, b as usize), one.clone())]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SynchronousStrategy {
        r: 1,
        n: s.n,
        m: s.m,
        points,
        lines,
        pairs,
    })
}

/// Classical expected score of a deterministic strategy against a game,
/// computed by direct predicate evaluation over the exact question
/// distribution — an oracle independent of the operator machinery.
pub fn classical_expected_score(s: &ClassicalStrategy, game: &crate::game::GameSpec) -> f64 {
    use crate::game::{rat_to_f64, ItemKind};
    let num_points = s.n.pow(s.m as u32);
    game.items
        .iter()
        .map(|item| {
            let ok = match &item.kind {
                ItemKind::LinePoint { line, point, pos } => {
                    s.line_words[*line].at(*pos).value() == s.point_values[*point]
                }
                ItemKind::PairPoint { u, v, component } => {
                    let (b1, b2) = s.pair_values[u * num_points + v];
                    if *component == 0 {
                        b1 == s.point_values[*u]
                    } else {
                        b2 == s.point_values[*v]
                    }
                }
                // Deterministic answers are always synchronous.
                _ => true,
            };
            if ok {
                rat_to_f64(&item.weight)
            } else {
                0.0
            }
        })
        .sum()
}

const MIXTURE_DIMENSION_BUDGET: usize = 512;

/// Exact convex mixture of synchronous strategies by block multiplicity.
///
/// With weights `p_i = a_i / b_i` (must sum to 1) and dimensions `r_i`, each
/// strategy is repeated `m_i = p_i R / r_i` times on the diagonal of an
/// `R`-dimensional space, `R` being the least dimension making every `m_i`
/// integral. The normalized trace then weighs block `i` by exactly `p_i`,
/// so `value(mixture) = Σ p_i value_i`.
pub fn mixture(
    strategies: &[SynchronousStrategy],
    weights: &[BigRational],
) -> Result<SynchronousStrategy, StrategyError> {
    if strategies.is_empty() || strategies.len() != weights.len() {
        return Err(StrategyError::BadWeights(
            "need one weight per strategy".into(),
        ));
    }
    let total: BigRational = weights.iter().cloned().sum();
    if !total.is_one() {
        return Err(StrategyError::BadWeights(format!(
            "weights sum to {total}, not 1"
        )));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(StrategyError::BadWeights("negative weight".into()));
    }
    let (n, m) = (strategies[0].n, strategies[0].m);
    if strategies.iter().any(|s| s.n != n || s.m != m) {
        return Err(StrategyError::BadWeights(
            "strategies over different cubes".into(),
        ));
    }

    // R must make every m_i = a_i R / (b_i r_i) integral.
    let mut r_total = BigInt::one();
    for (s, w) in strategies.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        let need = (w.denom() * BigInt::from(s.r)) / w.numer().gcd(&(w.denom() * BigInt::from(s.r)));
        r_total = r_total.lcm(&need);
    }
    let r_total = r_total
        .to_usize()
        .filter(|&r| r <= MIXTURE_DIMENSION_BUDGET)
        .ok_or(StrategyError::MixtureBudget(usize::MAX, MIXTURE_DIMENSION_BUDGET))?;

    let mut mults = Vec::with_capacity(strategies.len());
    for (s, w) in strategies.iter().zip(weights) {
        let mi = w * BigRational::from(BigInt::from(r_total))
            / BigRational::from(BigInt::from(s.r));
        assert!(mi.is_integer(), "multiplicity must be integral by choice of R");
        mults.push(mi.to_integer().to_usize().expect("within budget"));
    }

    // Block layout: strategy i occupies mults[i] consecutive r_i-blocks.
    let embed = |fams: Vec<Vec<(&Submeasurement<usize>, usize, usize)>>| -> Result<Vec<Submeasurement<usize>>, StrategyError> {
        fams.into_iter()
            .map(|pieces| {
                let mut by_label: std::collections::BTreeMap<usize, Op> =
                    std::collections::BTreeMap::new();
                for (sub, offset, copies_r) in pieces {
                    for (l, e) in sub.iter() {
                        let entry = by_label
                            .entry(*l)
                            .or_insert_with(|| Op::zeros(r_total, r_total));
                        entry
                            .view_mut((offset, offset), (copies_r, copies_r))
                            .copy_from(e);
                    }
                }
                Ok(Submeasurement::new(r_total, by_label.into_iter().collect())?)
            })
            .collect()
    };

    let num_points = n.pow(m as u32);
    let num_lines = strategies[0].lines.len();

    let mut point_pieces: Vec<Vec<(&Submeasurement<usize>, usize, usize)>> =
        vec![Vec::new(); num_points];
    let mut line_pieces: Vec<Vec<(&Submeasurement<usize>, usize, usize)>> =
        vec![Vec::new(); num_lines];
    let mut pair_pieces: Vec<Vec<(&Submeasurement<(usize, usize)>, usize, usize)>> =
        vec![Vec::new(); num_points * num_points];
    let mut offset = 0;
    for (s, &mult) in strategies.iter().zip(&mults) {
        for _copy in 0..mult {
            for (qi, sub) in s.points.iter().enumerate() {
                point_pieces[qi].push((sub, offset, s.r));
            }
            for (qi, sub) in s.lines.iter().enumerate() {
                line_pieces[qi].push((sub, offset, s.r));
            }
            for (qi, sub) in s.pairs.iter().enumerate() {
                pair_pieces[qi].push((sub, offset, s.r));
            }
            offset += s.r;
        }
    }
    assert_eq!(offset, r_total);

    let points = embed(point_pieces)?;
    let lines = embed(line_pieces)?;
    let pairs = pair_pieces
        .into_iter()
        .map(|pieces| {
            let mut by_label: std::collections::BTreeMap<(usize, usize), Op> =
                std::collections::BTreeMap::new();
            for (sub, off, rr) in pieces {
                for (l, e) in sub.iter() {
                    let entry = by_label
                        .entry(*l)
                        .or_insert_with(|| Op::zeros(r_total, r_total));
                    entry.view_mut((off, off), (rr, rr)).copy_from(e);
                }
            }
            Ok::<_, StrategyError>(Submeasurement::new(r_total, by_label.into_iter().collect())?)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SynchronousStrategy {
        r: r_total,
        n,
        m,
        points,
        lines,
        pairs,
    })
}

/// Applies a corruption model to a deterministic strategy. `PointFlips` and
/// `SliceScramble` change the points function only (pairs stay honest unless
/// `rederive_pairs`); `MixtureOfCodewords` does not apply here.
pub fn corrupt_classical(
    code: &LinearCode,
    s: &ClassicalStrategy,
    model: &CorruptionModel,
) -> Result<ClassicalStrategy, StrategyError> {
    let mut out = s.clone();
    let num_points = s.n.pow(s.m as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    match model.kind {
        CorruptionKind::PointFlips => {
            let flips = ((model.rate * num_points as f64).ceil() as usize).min(num_points);
            let mut idxs: Vec<usize> = (0..num_points).collect();
            idxs.shuffle(&mut rng);
            for &i in idxs.iter().take(flips) {
                let old = out.point_values[i];
                let shift = rng.gen_range(1..s.q);
                out.point_values[i] = (old + shift) % s.q;
            }
        }
        CorruptionKind::SliceScramble => {
            let slices = ((model.rate * s.n as f64).ceil() as usize).min(s.n);
            let mut zs: Vec<usize> = (0..s.n).collect();
            zs.shuffle(&mut rng);
            // A random replacement codeword, re-sampled per scrambled slice.
            for &z in zs.iter().take(slices) {
                let dim = code.k().pow(s.m as u32);
                let coeffs: Vec<FieldElement> = (0..dim)
                    .map(|_| FieldElement::new(rng.gen_range(0..s.q), s.q).expect("prime q"))
                    .collect();
                let repl = tensor_encode(code, s.m, &coeffs)?;
                for u in enumerate_points(s.n, s.m) {
                    if u[s.m - 1] == z {
                        out.point_values[point_index(&u, s.n)] = repl.at(&u).value();
                    }
                }
            }
        }
        CorruptionKind::MixtureOfCodewords => {
            return Err(StrategyError::ModelMismatch("mixture-of-codewords"));
        }
    }
    if model.rederive_pairs {
        out.pair_values = (0..num_points)
            .flat_map(|u| (0..num_points).map(move |v| (u, v)))
            .map(|(u, v)| (out.point_values[u], out.point_values[v]))
            .collect();
    }
    Ok(out)
}

/// Applies a corruption model to a synchronous strategy.
/// `MixtureOfCodewords` blends the strategy (weight `1 − ρ̂`) with honest
/// strategies of seeded random codewords, where `ρ̂` is `ρ` rounded to a
/// multiple of 1/64 so the mixture stays exact.
pub fn corrupt_synchronous(
    code: &LinearCode,
    s: &SynchronousStrategy,
    model: &CorruptionModel,
) -> Result<SynchronousStrategy, StrategyError> {
    match model.kind {
        CorruptionKind::MixtureOfCodewords => {
            let denom = 64u64;
            let num = ((model.rate * denom as f64).round() as u64).min(denom);
            if num == 0 {
                return Ok(s.clone());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            let dim = code.k().pow(s.m as u32);
            let coeffs: Vec<FieldElement> = (0..dim)
                .map(|_| FieldElement::new(rng.gen_range(0..code.q()), code.q()).expect("prime q"))
                .collect();
            let other = honest_strategy(code, &tensor_encode(code, s.m, &coeffs)?)?;
            let w_other = BigRational::new(BigInt::from(num), BigInt::from(denom));
            let w_self = BigRational::one() - w_other.clone();
            mixture(&[s.clone(), other], &[w_self, w_other])
        }
        _ => Err(StrategyError::ModelMismatch("point-level models need a deterministic strategy")),
    }
}

/// The magic-square exhibit over `[3]²` at dimension 4.
///
/// Each grid point `(i, j)` carries the two-qubit Pauli observable
///
/// ```text
///   I⊗Z  Z⊗I  Z⊗Z
///   X⊗I  I⊗X  X⊗X
///   X⊗Z  Z⊗X  Y⊗Y
/// ```
///
/// with eigenvalue `+1 ↦ 0` and `−1 ↦ 1` (a fixed injection of `{±1}` into
/// GF(3)). Observables within a row or column commute, so every line
/// question gets the joint eigenbasis measurement (its outcome triple is
/// read as a length-3 word over the full code `F₃³`). Pair questions use
/// the joint measurement when the two observables commute and the
/// measure-then-echo family `Π^u_a Π^v_b Π^u_a` otherwise — the latter is a
/// complete POVM but not projective, which is the point: non-axis-aligned
/// observables such as `I⊗Z` and `I⊗X` anticommute, so the strategy is
/// line-consistent yet fails the subcube commutation test.
pub fn anticommuting_pair_strategy() -> Result<(SynchronousStrategy, LinearCode), StrategyError> {
    let (n, m, q, r) = (3usize, 2usize, 3u64, 4usize);
    // The full code F_3^3 (identity generator): d = 1, interpolable with
    // t = 3.
    let gen = crate::galois::FieldMatrix::from_values(3, 3, q, &[1, 0, 0, 0, 1, 0, 0, 0, 1])
        .map_err(crate::codes::CodeError::from)?;
    let code = LinearCode::from_generator(gen)?;

    let c = |re: f64, im: f64| Complex64::new(re, im);
    let id2 = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    let px = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    let py = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    let pz = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    let kron = |a: &Op, b: &Op| a.kronecker(b);
    // Row-major square indexed by grid point (row = coord 0, col = coord 1).
    let square: Vec<Op> = vec![
        kron(&id2, &pz), kron(&pz, &id2), kron(&pz, &pz),
        kron(&px, &id2), kron(&id2, &px), kron(&px, &px),
        kron(&px, &pz), kron(&pz, &px), kron(&py, &py),
    ];
    let num_points = n.pow(m as u32);
    let eye = crate::opalg::identity(r);
    // Eigenprojectors: label 0 ↦ +1 eigenspace, 1 ↦ −1 eigenspace.
    let proj = |o: &Op, label: usize| -> Op {
        let sign = if label == 0 { 1.0 } else { -1.0 };
        (&eye + o.map(|z| z * sign)).map(|z| z * 0.5)
    };
    let observable = |pt: usize| &square[pt];

    let points = (0..num_points)
        .map(|pt| {
            Submeasurement::new(
                r,
                vec![(0usize, proj(observable(pt), 0)), (1usize, proj(observable(pt), 1))],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let lines_list = enumerate_lines(n, m);
    let mut lines = Vec::with_capacity(lines_list.len());
    for line in &lines_list {
        let pts: Vec<usize> = (0..n).map(|i| point_index(&line.point(i), n)).collect();
        let mut elems = Vec::new();
        for bits in 0..(1usize << n) {
            let labels: Vec<usize> = (0..n).map(|i| (bits >> i) & 1).collect();
            let mut p = eye.clone();
            for (i, &pt) in pts.iter().enumerate() {
                p = p * proj(observable(pt), labels[i]);
            }
            let word = Codeword {
                values: labels
                    .iter()
                    .map(|&b| FieldElement::new(b as u64, q).expect("prime q"))
                    .collect(),
            };
            let idx = code
                .index_of_codeword(&word)?
                .expect("full code contains all words") as usize;
            elems.push((idx, p));
        }
        lines.push(Submeasurement::new(r, elems)?);
    }

    let commutes = |a: &Op, b: &Op| crate::opalg::op_norm(&(a * b - b * a)) < 1e-9;
    let mut pairs = Vec::with_capacity(num_points * num_points);
    for u in 0..num_points {
        for v in 0..num_points {
            let (ou, ov) = (observable(u), observable(v));
            let mut elems = Vec::new();
            for a in 0..2usize {
                for b in 0..2usize {
                    let (pa, pb) = (proj(ou, a), proj(ov, b));
                    let e = if commutes(ou, ov) {
                        &pa * &pb
                    } else {
                        &pa * &pb * &pa
                    };
                    elems.push(((a, b), e));
                }
            }
            pairs.push(Submeasurement::new(r, elems)?);
        }
    }

    Ok((
        SynchronousStrategy {
            r,
            n,
            m,
            points,
            lines,
            pairs,
        },
        code,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::make_reed_solomon;
    use crate::game::{
        build_game, evaluate_synchronous, goodness_synchronous, monte_carlo_play,
    };
    use crate::tensor::agreement_fraction;

    fn small_setup(q: u64, n: usize, s: usize, m: usize) -> (LinearCode, crate::game::GameSpec) {
        let code = make_reed_solomon(q, n, s, None).unwrap();
        let game = build_game(&code, m).unwrap();
        (code, game)
    }

    fn planted(code: &LinearCode, m: usize, seed: u64) -> TensorCodeword {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = code.k().pow(m as u32);
        let coeffs: Vec<FieldElement> = (0..dim)
            .map(|_| FieldElement::new(rng.gen_range(0..code.q()), code.q()).unwrap())
            .collect();
        tensor_encode(code, m, &coeffs).unwrap()
    }

    #[test]
    fn honest_passes_with_probability_one() {
        let (code, game) = small_setup(5, 5, 1, 2);
        let c = planted(&code, 2, 7);
        let s = honest_strategy(&code, &c).unwrap();
        let v = evaluate_synchronous(&s, &game).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "honest value {v}");
        let g = goodness_synchronous(&s, &game).unwrap();
        assert!(g.eps.abs() < 1e-12 && g.delta.abs() < 1e-12);
    }

    #[test]
    fn distinct_honest_strategies_have_bounded_cross_agreement() {
        // Two distinct codewords agree on at most a γ_m fraction of points.
        let (code, _) = small_setup(5, 5, 1, 2);
        let c1 = planted(&code, 2, 1);
        let c2 = planted(&code, 2, 2);
        assert_ne!(c1, c2);
        let gm = crate::tensor::gamma(5, code.d(), 2);
        let agree = agreement_fraction(&c1, &c2).unwrap();
        assert!(crate::game::rat_to_f64(&agree) <= gm + 1e-12);
    }

    #[test]
    fn classical_oracle_matches_operator_evaluation() {
        let (code, game) = small_setup(5, 5, 1, 2);
        let c = planted(&code, 2, 3);
        let mut cs = ClassicalStrategy::from_table(5, 2, 5, &c.table);
        // Corrupt a few points so the score is nontrivial.
        let model = CorruptionModel::point_flips(0.08, 11);
        cs = corrupt_classical(&code, &cs, &model).unwrap();
        let embedded = embed_classical(&code, &cs).unwrap();
        let via_ops = evaluate_synchronous(&embedded, &game).unwrap();
        let via_oracle = classical_expected_score(&cs, &game);
        assert!(
            (via_ops - via_oracle).abs() < 1e-12,
            "{via_ops} vs {via_oracle}"
        );
        assert!(via_oracle < 1.0);
    }

    #[test]
    fn single_point_corruption_value_matches_enumeration_oracle() {
        let (code, game) = small_setup(5, 5, 1, 2);
        let c = planted(&code, 2, 5);
        let cs = ClassicalStrategy::from_table(5, 2, 5, &c.table);
        let model = CorruptionModel {
            kind: CorruptionKind::PointFlips,
            rate: 1.0 / 25.0, // exactly one point
            seed: 9,
            rederive_pairs: false,
        };
        let corrupted = corrupt_classical(&code, &cs, &model).unwrap();
        let flipped: Vec<usize> = (0..25)
            .filter(|&i| corrupted.point_values[i] != cs.point_values[i])
            .collect();
        assert_eq!(flipped.len(), 1);
        let s = embed_classical(&code, &corrupted).unwrap();
        let v = evaluate_synchronous(&s, &game).unwrap();
        // Enumeration oracle: 1 minus the weight of rejecting questions.
        let oracle = classical_expected_score(&corrupted, &game);
        assert!((v - oracle).abs() < 1e-12);
        assert!(v < 1.0);
    }

    #[test]
    fn corruption_rate_zero_is_identity_and_eps_is_monotone() {
        let (code, game) = small_setup(5, 5, 1, 2);
        let c = planted(&code, 2, 21);
        let cs = ClassicalStrategy::from_table(5, 2, 5, &c.table);
        let base = corrupt_classical(&code, &cs, &CorruptionModel::point_flips(0.0, 1)).unwrap();
        assert_eq!(base.point_values, cs.point_values);
        let mut last_eps = -1.0;
        for step in [0.0, 0.02, 0.04, 0.06, 0.08, 0.10] {
            let model = CorruptionModel::point_flips(step, 13);
            let corrupted = corrupt_classical(&code, &cs, &model).unwrap();
            let s = embed_classical(&code, &corrupted).unwrap();
            let g = goodness_synchronous(&s, &game).unwrap();
            assert!(
                g.eps >= last_eps - 1e-12,
                "eps not monotone at rho={step}: {} < {}",
                g.eps,
                last_eps
            );
            last_eps = g.eps;
        }
        assert!(last_eps > 0.0);
    }

    #[test]
    fn mixture_value_is_convex_combination() {
        let (code, game) = small_setup(5, 5, 1, 2);
        let c = planted(&code, 2, 31);
        let honest = honest_strategy(&code, &c).unwrap();
        let model = CorruptionModel::point_flips(1.0 / 25.0, 2);
        let corrupted = embed_classical(
            &code,
            &corrupt_classical(&code, &ClassicalStrategy::from_table(5, 2, 5, &c.table), &model)
                .unwrap(),
        )
        .unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mixed = mixture(
            &[honest.clone(), corrupted.clone()],
            &[half.clone(), half],
        )
        .unwrap();
        let v_h = evaluate_synchronous(&honest, &game).unwrap();
        let v_c = evaluate_synchronous(&corrupted, &game).unwrap();
        let v_m = evaluate_synchronous(&mixed, &game).unwrap();
        assert!((v_m - 0.5 * (v_h + v_c)).abs() < 1e-10);
    }

    #[test]
    fn uniform_mixture_over_all_codewords_wins() {
        // q=3, n=3, s=1 → 9 base codewords; m=1 keeps the mixture small.
        let code = make_reed_solomon(3, 3, 1, None).unwrap();
        let game = build_game(&code, 1).unwrap();
        let words = crate::tensor::enumerate_tensor_codewords(&code, 1).unwrap();
        let strategies: Vec<SynchronousStrategy> = words
            .iter()
            .map(|w| honest_strategy(&code, w).unwrap())
            .collect();
        let w = BigRational::new(BigInt::from(1), BigInt::from(words.len() as u64));
        let mixed = mixture(&strategies, &vec![w; words.len()]).unwrap();
        let v = evaluate_synchronous(&mixed, &game).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_tracks_exact_value() {
        let (code, game) = small_setup(5, 5, 1, 2);
        let c = planted(&code, 2, 41);
        let model = CorruptionModel::point_flips(0.08, 3);
        let corrupted = embed_classical(
            &code,
            &corrupt_classical(&code, &ClassicalStrategy::from_table(5, 2, 5, &c.table), &model)
                .unwrap(),
        )
        .unwrap();
        let exact = evaluate_synchronous(&corrupted, &game).unwrap();
        let mc = monte_carlo_play(&corrupted, &game, 20_000, 77).unwrap();
        assert!(
            (mc.rate - exact).abs() < 5.0 * mc.standard_error.max(1e-3),
            "mc {} vs exact {}",
            mc.rate,
            exact
        );
        // Determinism: same seed, same transcript.
        let mc2 = monte_carlo_play(&corrupted, &game, 20_000, 77).unwrap();
        assert_eq!(mc.accepted, mc2.accepted);
    }

    #[test]
    fn magic_square_observables_anticommute_and_fail_subcube_test() {
        let (s, code) = anticommuting_pair_strategy().unwrap();
        // Axis-aligned pairs commute exactly; some cross pair is maximally
        // anticommuting: ‖[O_u, O_v]‖_τ = 2 at unit-norm observables.
        let obs = |pt: usize| {
            let p0 = s.points[pt].element(&0).unwrap().clone();
            let p1 = s.points[pt].element(&1).unwrap();
            p0 - p1
        };
        // (0,0) = I⊗Z and (1,1) = I⊗X anticommute.
        let (a, b) = (obs(0 * 3 + 0), obs(1 * 3 + 1));
        let anti = crate::opalg::op_norm(&(&a * &b + &b * &a));
        assert!(anti < 1e-12, "anticommutator norm {anti}");
        let comm = crate::opalg::tau_norm(&(&a * &b - &b * &a));
        assert!((comm - 2.0).abs() < 1e-9, "commutator τ-norm {comm}");
        // Same row commutes.
        let (a, b) = (obs(0), obs(1));
        assert!(crate::opalg::op_norm(&(&a * &b - &b * &a)) < 1e-12);

        let game = build_game(&code, 2).unwrap();
        let g = goodness_synchronous(&s, &game).unwrap();
        assert!(
            g.subcube_pass < 0.99,
            "subcube pass {} not < 0.99",
            g.subcube_pass
        );
        // Lines remain perfectly consistent with points.
        assert!(g.eps < 1e-9, "lines-test inconsistency {}", g.eps);
    }

    #[test]
    fn synchronous_embedding_and_symmetrization_preserve_value() {
        let (code, _) = small_setup(3, 3, 1, 2);
        let game2 = crate::game::build_two_prover_game(&code, 2).unwrap();
        let c = planted(&code, 2, 51);
        let model = CorruptionModel::point_flips(0.1, 4);
        let corrupted = embed_classical(
            &code,
            &corrupt_classical(&code, &ClassicalStrategy::from_table(3, 2, 3, &c.table), &model)
                .unwrap(),
        )
        .unwrap();
        let bi = crate::game::synchronous_embedding(&corrupted);
        let (v1, g1) = crate::game::evaluate_bipartite(&bi, &game2).unwrap();
        let symm = crate::game::symmetrize(&bi);
        let (v2, g2) = crate::game::evaluate_bipartite(&symm, &game2).unwrap();
        assert!((v1 - v2).abs() < 1e-10, "{v1} vs {v2}");
        assert!((g1.eps - g2.eps).abs() < 1e-10);
        // A synchronous embedding is perfectly synchronous.
        assert!(g1.xi.unwrap() < 1e-12);
    }
}
