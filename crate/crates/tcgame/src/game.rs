//! The augmented tensor code test and its two-prover variant as executable
//! games: question distributions, decision predicates, exact value
//! computation, goodness metrics, symmetrization, and a Monte-Carlo referee.
//!
//! The single-prover (synchronous) game works over a tensor code `C^{⊗m}`
//! and flips a fair coin between two subtests:
//!
//! * **axis-parallel lines test** — sample a uniform point `u` and a uniform
//!   axis `j`; ask one prover for the codeword `g` on the line through `u`
//!   along axis `j` and the other for the value `a` at `u`; accept iff
//!   `g(u_j) = a`;
//! * **subcube commutation test** — sample a uniform subcube (uniform number
//!   of fixed trailing coordinates, uniform tail), two independent uniform
//!   points `u, v` in it and an order bit; ask one prover for answers
//!   `(b_1, b_2)` on the ordered pair and the other for the value `a` at one
//!   of the two points (chosen by the order bit); accept iff the pair answer
//!   at that point equals `a`.
//!
//! The two-prover variant plays the test with randomized roles with
//! probability 2/3 and a synchronicity test (same question to both provers,
//! accept iff identical answers) with probability 1/3.
//!
//! Question weights are exact rationals until the final float conversion, so
//! the question distribution sums to 1 exactly. Pair questions include
//! `u = v` (the pair is sampled independently, equality not excluded).

use crate::codes::{Codeword, LinearCode};
use crate::opalg::{trace_state, Op, Submeasurement, TolProfile};
use crate::tensor::{enumerate_lines, enumerate_subcubes, point_index, AxisLine};
use nalgebra::DVector;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Op(#[from] crate::opalg::OpError),
    #[error(transparent)]
    Code(#[from] crate::codes::CodeError),
    #[error("strategy does not match the game: {0}")]
    Mismatch(String),
    #[error("enumeration budget exceeded ({0} points)")]
    BudgetExceeded(usize),
    #[error("strategy produced an invalid outcome distribution: {0}")]
    InvalidDistribution(String),
}

/// A referee question.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Question {
    /// A point `u ∈ [n]^m`, answered by a field value.
    Point(Vec<usize>),
    /// An axis-parallel line, answered by a base codeword.
    Line(AxisLine),
    /// An ordered pair of points (jointly in some subcube), answered by a
    /// pair of field values.
    Pair(Vec<usize>, Vec<usize>),
}

/// One weighted question pair with its decision predicate, in index form.
/// Points are canonical point indices, lines canonical line indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemKind {
    /// First prover: line; second prover: the point at position `pos` on the
    /// line. Accept iff `g(pos) = a`.
    LinePoint { line: usize, point: usize, pos: usize },
    /// First prover: ordered pair `(u, v)`; second prover: the point at
    /// `component` (0 = `u`, 1 = `v`). Accept iff that pair component
    /// equals the point answer.
    PairPoint { u: usize, v: usize, component: usize },
    /// Synchronicity: both provers get the same point; accept iff equal.
    SyncPoint { point: usize },
    /// Synchronicity on a line question.
    SyncLine { line: usize },
    /// Synchronicity on a pair question.
    SyncPair { u: usize, v: usize },
}

/// A weighted game item. For two-prover games, `swap` sends the first
/// question to prover 2 instead of prover 1.
#[derive(Debug, Clone)]
pub struct GameItem {
    pub kind: ItemKind,
    pub weight: BigRational,
    pub swap: bool,
}

/// The full game: an exact weighted list of question pairs plus cached code
/// data (base codewords in canonical order, lines in canonical order).
#[derive(Debug, Clone)]
pub struct GameSpec {
    pub code: LinearCode,
    pub m: usize,
    pub n: usize,
    pub two_prover: bool,
    pub items: Vec<GameItem>,
    /// All base codewords, indexed canonically.
    pub codewords: Vec<Codeword>,
    /// All axis-parallel lines, indexed canonically.
    pub lines: Vec<AxisLine>,
}

/// Goodness metrics of a strategy against the test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GoodnessReport {
    /// Points/lines inconsistency under the lines-test distribution.
    pub eps: f64,
    /// Max of the two pairs/points inconsistencies (first and second
    /// component) under the pair distribution.
    pub delta: f64,
    /// Synchronicity inconsistency (two-prover games only).
    pub xi: Option<f64>,
    /// Exact acceptance probability of the full game.
    pub pass_probability: f64,
    /// Conditional pass rate of the lines subtest.
    pub lines_pass: f64,
    /// Conditional pass rate of the subcube commutation subtest.
    pub subcube_pass: f64,
}

/// A synchronous (tracial) strategy: one projective family per question
/// type, all at dimension `r`, with the normalized trace implicit.
///
/// * `points[u]` — outcomes are field values (as `usize`);
/// * `lines[ℓ]` — outcomes are canonical base-codeword indices;
/// * `pairs[u * N + v]` — outcomes are value pairs.
#[derive(Debug, Clone)]
pub struct SynchronousStrategy {
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub points: Vec<Submeasurement<usize>>,
    pub lines: Vec<Submeasurement<usize>>,
    pub pairs: Vec<Submeasurement<(usize, usize)>>,
}

impl SynchronousStrategy {
    pub fn num_points(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    pub fn pair(&self, u: usize, v: usize) -> &Submeasurement<(usize, usize)> {
        &self.pairs[u * self.num_points() + v]
    }

    /// Validates every family as a projective measurement.
    pub fn validate(&self, tol: &TolProfile) -> Result<(), GameError> {
        for p in self.points.iter().chain(self.lines.iter()) {
            p.validate(tol, true)?;
        }
        for p in &self.pairs {
            p.validate(tol, true)?;
        }
        Ok(())
    }
}

/// A bipartite strategy for the two-prover game: a shared state `ψ` (index
/// `i * rb + j`) and per-prover measurement families (tilde families belong
/// to prover 2).
#[derive(Debug, Clone)]
pub struct BipartiteStrategy {
    pub ra: usize,
    pub rb: usize,
    pub n: usize,
    pub m: usize,
    pub psi: DVector<Complex64>,
    pub points: Vec<Submeasurement<usize>>,
    pub lines: Vec<Submeasurement<usize>>,
    pub pairs: Vec<Submeasurement<(usize, usize)>>,
    pub points_t: Vec<Submeasurement<usize>>,
    pub lines_t: Vec<Submeasurement<usize>>,
    pub pairs_t: Vec<Submeasurement<(usize, usize)>>,
}

impl BipartiteStrategy {
    pub fn num_points(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    /// `⟨ψ| X ⊗ Y |ψ⟩`, computed as `tr(M† X M Yᵀ)` with `ψ` reshaped to an
    /// `ra × rb` matrix `M`.
    pub fn value(&self, x: &Op, y: &Op) -> Complex64 {
        let m = Op::from_fn(self.ra, self.rb, |i, j| self.psi[i * self.rb + j]);
        (m.adjoint() * x * &m * y.transpose()).trace()
    }
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact-to-float conversion for question weights.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("desk-scale rational fits in f64")
}

/// Builds the single-prover (synchronous) game for `C^{⊗m}`.
pub fn build_game(code: &LinearCode, m: usize) -> Result<GameSpec, GameError> {
    build_game_inner(code, m, false)
}

/// Builds the two-prover game: the test with randomized roles (probability
/// 2/3) plus the synchronicity test (probability 1/3).
pub fn build_two_prover_game(code: &LinearCode, m: usize) -> Result<GameSpec, GameError> {
    build_game_inner(code, m, true)
}

fn build_game_inner(code: &LinearCode, m: usize, two_prover: bool) -> Result<GameSpec, GameError> {
    let n = code.n();
    let num_points = n.checked_pow(m as u32).filter(|&p| p <= 100_000);
    let Some(num_points) = num_points else {
        return Err(GameError::BudgetExceeded(usize::MAX));
    };
    let lines = enumerate_lines(n, m);
    let mut items = Vec::new();

    // Weight of the test itself: 1 for synchronous play, 2/3 (split over the
    // two role assignments) for two-prover play.
    let role_assignments: &[(BigRational, bool)] = if two_prover {
        &[(rat(1, 3), false), (rat(1, 3), true)]
    } else {
        &[(rat(1, 1), false)]
    };

    for &(ref test_weight, swap) in role_assignments {
        // Lines test: uniform axis, uniform line, uniform point on it.
        let line_w = test_weight.clone() * rat(1, 2) * rat(1, (lines.len() * n) as u64);
        for (li, line) in lines.iter().enumerate() {
            for pos in 0..n {
                items.push(GameItem {
                    kind: ItemKind::LinePoint {
                        line: li,
                        point: point_index(&line.point(pos), n),
                        pos,
                    },
                    weight: line_w.clone(),
                    swap,
                });
            }
        }
        // Subcube commutation test: uniform subcube, independent uniform
        // ordered pair inside it, uniform order bit.
        for (subcube, sc_w) in enumerate_subcubes(n, m) {
            let pts = subcube.points(n);
            let h = pts.len() as u64;
            let pair_w =
                test_weight.clone() * rat(1, 2) * sc_w * rat(1, h * h) * rat(1, 2);
            for u in &pts {
                for v in &pts {
                    for component in 0..2 {
                        items.push(GameItem {
                            kind: ItemKind::PairPoint {
                                u: point_index(u, n),
                                v: point_index(v, n),
                                component,
                            },
                            weight: pair_w.clone(),
                            swap,
                        });
                    }
                }
            }
        }
    }

    if two_prover {
        // Synchronicity test: probability 1/3, then 1/3 each for the same
        // line / same point / same pair question to both provers.
        let sync = rat(1, 3) * rat(1, 3);
        let lw = sync.clone() * rat(1, lines.len() as u64);
        for li in 0..lines.len() {
            items.push(GameItem {
                kind: ItemKind::SyncLine { line: li },
                weight: lw.clone(),
                swap: false,
            });
        }
        let pw = sync.clone() * rat(1, num_points as u64);
        for point in 0..num_points {
            items.push(GameItem {
                kind: ItemKind::SyncPoint { point },
                weight: pw.clone(),
                swap: false,
            });
        }
        for (subcube, sc_w) in enumerate_subcubes(n, m) {
            let pts = subcube.points(n);
            let h = pts.len() as u64;
            let w = sync.clone() * sc_w * rat(1, h * h);
            for u in &pts {
                for v in &pts {
                    items.push(GameItem {
                        kind: ItemKind::SyncPair {
                            u: point_index(u, n),
                            v: point_index(v, n),
                        },
                        weight: w.clone(),
                        swap: false,
                    });
                }
            }
        }
    }

    // The question distribution must be exact.
    let total: BigRational = items.iter().map(|i| i.weight.clone()).sum();
    assert!(total.is_one(), "question weights must sum to 1 exactly");

    Ok(GameSpec {
        code: code.clone(),
        m,
        n,
        two_prover,
        items,
        codewords: code.enumerate_codewords(),
        lines,
    })
}

fn check_strategy(strategy: &SynchronousStrategy, game: &GameSpec) -> Result<(), GameError> {
    if strategy.n != game.n || strategy.m != game.m {
        return Err(GameError::Mismatch(format!(
            "strategy is over [{}]^{}, game over [{}]^{}",
            strategy.n, strategy.m, game.n, game.m
        )));
    }
    Ok(())
}

/// Per-item acceptance probability for a synchronous strategy:
/// `Σ_{accepted (a,b)} τ(M^x_a M^y_b)`.
fn item_pass_synchronous(strategy: &SynchronousStrategy, game: &GameSpec, kind: &ItemKind) -> f64 {
    match kind {
        ItemKind::LinePoint { line, point, pos } => {
            let b = &strategy.lines[*line];
            let a = &strategy.points[*point];
            b.iter()
                .filter_map(|(gidx, bop)| {
                    let val = game.codewords[*gidx as usize].at(*pos).value() as usize;
                    a.element(&val).map(|aop| trace_state(&(bop * aop)).re)
                })
                .sum()
        }
        ItemKind::PairPoint { u, v, component } => {
            let p = strategy.pair(*u, *v);
            let point = if *component == 0 { *u } else { *v };
            let a = &strategy.points[point];
            p.iter()
                .filter_map(|(&(b1, b2), pop)| {
                    let val = if *component == 0 { b1 } else { b2 };
                    a.element(&val).map(|aop| trace_state(&(pop * aop)).re)
                })
                .sum()
        }
        ItemKind::SyncPoint { point } => sync_pass(&strategy.points[*point]),
        ItemKind::SyncLine { line } => sync_pass(&strategy.lines[*line]),
        ItemKind::SyncPair { u, v } => sync_pass(strategy.pair(*u, *v)),
    }
}

fn sync_pass<L: Ord + Clone + std::fmt::Debug>(m: &Submeasurement<L>) -> f64 {
    m.iter().map(|(_, e)| trace_state(&(e * e)).re).sum()
}

/// Exact acceptance probability `Σ` over weighted question pairs and
/// accepting answers of `τ(M^x_a M^y_b)`. No sampling.
pub fn evaluate_synchronous(
    strategy: &SynchronousStrategy,
    game: &GameSpec,
) -> Result<f64, GameError> {
    check_strategy(strategy, game)?;
    Ok(game
        .items
        .iter()
        .map(|item| rat_to_f64(&item.weight) * item_pass_synchronous(strategy, game, &item.kind))
        .sum())
}

/// Goodness metrics (ε, δ) of a synchronous strategy, plus the exact pass
/// probability and per-subtest conditional pass rates.
///
/// ε is the points/lines inconsistency under the lines-test distribution;
/// δ is the maximum of the two data-processed pairs/points inconsistencies
/// under the pair distribution. The subcube subtest additionally randomizes
/// an order bit, so the reported `subcube_pass` (a per-test rate) and δ (a
/// per-definition quantity) are reported side by side without asserting they
/// coincide.
pub fn goodness_synchronous(
    strategy: &SynchronousStrategy,
    game: &GameSpec,
) -> Result<GoodnessReport, GameError> {
    check_strategy(strategy, game)?;
    let mut eps = 0.0;
    let mut eps_weight = BigRational::zero();
    let mut delta1 = 0.0;
    let mut delta2 = 0.0;
    let mut pair_weight = BigRational::zero();
    let mut lines_pass = 0.0;
    let mut subcube_pass = 0.0;

    for item in &game.items {
        if item.swap {
            continue; // synchronous evaluation is role-symmetric
        }
        let w = rat_to_f64(&item.weight);
        match &item.kind {
            ItemKind::LinePoint { line, point, pos } => {
                let processed = strategy.lines[*line]
                    .data_process(|gidx| game.codewords[*gidx as usize].at(*pos).value() as usize);
                eps += w * crate::opalg::pair_inconsistency(&strategy.points[*point], &processed);
                eps_weight += item.weight.clone();
                lines_pass += w * item_pass_synchronous(strategy, game, &item.kind);
            }
            ItemKind::PairPoint { u, v, component } => {
                let pairm = strategy.pair(*u, *v);
                if *component == 0 {
                    let processed = pairm.data_process(|&(b1, _)| b1);
                    delta1 +=
                        w * crate::opalg::pair_inconsistency(&strategy.points[*u], &processed);
                } else {
                    let processed = pairm.data_process(|&(_, b2)| b2);
                    delta2 +=
                        w * crate::opalg::pair_inconsistency(&strategy.points[*v], &processed);
                }
                pair_weight += item.weight.clone();
                subcube_pass += w * item_pass_synchronous(strategy, game, &item.kind);
            }
            _ => {}
        }
    }

    let ew = rat_to_f64(&eps_weight);
    let pw = rat_to_f64(&pair_weight) / 2.0; // each component carries half
    let eps = if ew > 0.0 { eps / ew } else { 0.0 };
    let (d1, d2) = if pw > 0.0 {
        (delta1 / pw, delta2 / pw)
    } else {
        (0.0, 0.0)
    };
    let pass = evaluate_synchronous(strategy, game)?;
    Ok(GoodnessReport {
        eps,
        delta: d1.max(d2),
        xi: None,
        pass_probability: pass,
        lines_pass: if ew > 0.0 { lines_pass / ew } else { 1.0 },
        subcube_pass: if pw > 0.0 { subcube_pass / (2.0 * pw) } else { 1.0 },
    })
}

fn item_pass_bipartite(strategy: &BipartiteStrategy, game: &GameSpec, item: &GameItem) -> f64 {
    // First question goes to prover 1 (plain families) unless `swap`.
    let val = |x: &Op, y: &Op, swap: bool| -> f64 {
        if swap {
            strategy.value(y, x).re
        } else {
            strategy.value(x, y).re
        }
    };
    match &item.kind {
        ItemKind::LinePoint { line, point, pos } => {
            let (b, a) = if item.swap {
                (&strategy.lines_t[*line], &strategy.points[*point])
            } else {
                (&strategy.lines[*line], &strategy.points_t[*point])
            };
            b.iter()
                .filter_map(|(gidx, bop)| {
                    let valq = game.codewords[*gidx as usize].at(*pos).value() as usize;
                    a.element(&valq)
                        .map(|aop| val(bop, aop, item.swap))
                })
                .sum()
        }
        ItemKind::PairPoint { u, v, component } => {
            let point = if *component == 0 { *u } else { *v };
            let idx = u * strategy.num_points() + v;
            let (p, a) = if item.swap {
                (&strategy.pairs_t[idx], &strategy.points[point])
            } else {
                (&strategy.pairs[idx], &strategy.points_t[point])
            };
            p.iter()
                .filter_map(|(&(b1, b2), pop)| {
                    let valq = if *component == 0 { b1 } else { b2 };
                    a.element(&valq).map(|aop| val(pop, aop, item.swap))
                })
                .sum()
        }
        ItemKind::SyncPoint { point } => {
            sync_pass_bipartite(strategy, &strategy.points[*point], &strategy.points_t[*point])
        }
        ItemKind::SyncLine { line } => {
            sync_pass_bipartite(strategy, &strategy.lines[*line], &strategy.lines_t[*line])
        }
        ItemKind::SyncPair { u, v } => {
            let idx = u * strategy.num_points() + v;
            sync_pass_bipartite(strategy, &strategy.pairs[idx], &strategy.pairs_t[idx])
        }
    }
}

fn sync_pass_bipartite<L: Ord + Clone + std::fmt::Debug>(
    strategy: &BipartiteStrategy,
    m: &Submeasurement<L>,
    mt: &Submeasurement<L>,
) -> f64 {
    m.iter()
        .filter_map(|(l, e)| mt.element(l).map(|f| strategy.value(e, f).re))
        .sum()
}

/// Evaluates a bipartite strategy against a two-prover game. Returns the
/// pass probability and the (ε, δ, ξ) goodness report; ε and δ are averaged
/// over the two role assignments, ξ is the synchronicity inconsistency.
pub fn evaluate_bipartite(
    strategy: &BipartiteStrategy,
    game: &GameSpec,
) -> Result<(f64, GoodnessReport), GameError> {
    if strategy.n != game.n || strategy.m != game.m {
        return Err(GameError::Mismatch("dimension mismatch".into()));
    }
    let mut pass = 0.0;
    let mut eps = 0.0;
    let mut eps_w = 0.0;
    let mut delta_fail = 0.0;
    let mut delta_w = 0.0;
    let mut xi = 0.0;
    let mut xi_w = 0.0;
    let mut lines_pass = 0.0;
    let mut subcube_pass = 0.0;

    for item in &game.items {
        let w = rat_to_f64(&item.weight);
        let p = item_pass_bipartite(strategy, game, item);
        pass += w * p;
        match &item.kind {
            ItemKind::LinePoint { .. } => {
                eps += w * (1.0 - p);
                eps_w += w;
                lines_pass += w * p;
            }
            ItemKind::PairPoint { .. } => {
                delta_fail += w * (1.0 - p);
                delta_w += w;
                subcube_pass += w * p;
            }
            _ => {
                xi += w * (1.0 - p);
                xi_w += w;
            }
        }
    }
    Ok((
        pass,
        GoodnessReport {
            eps: if eps_w > 0.0 { eps / eps_w } else { 0.0 },
            delta: if delta_w > 0.0 { delta_fail / delta_w } else { 0.0 },
            xi: Some(if xi_w > 0.0 { xi / xi_w } else { 0.0 }),
            pass_probability: pass,
            lines_pass: if eps_w > 0.0 { lines_pass / eps_w } else { 1.0 },
            subcube_pass: if delta_w > 0.0 { subcube_pass / delta_w } else { 1.0 },
        },
    ))
}

/// Embeds a synchronous strategy as a bipartite one: maximally entangled
/// state `(1/√r) Σ_i |ii⟩` with the second prover using transposed
/// measurements. Game values coincide because
/// `⟨Φ| X ⊗ Yᵀ |Φ⟩ = tr(X Y)/r = τ(X Y)`.
pub fn synchronous_embedding(strategy: &SynchronousStrategy) -> BipartiteStrategy {
    let r = strategy.r;
    let mut psi = DVector::zeros(r * r);
    let amp = Complex64::new(1.0 / (r as f64).sqrt(), 0.0);
    for i in 0..r {
        psi[i * r + i] = amp;
    }
    let tr_fam = |fams: &Vec<Submeasurement<usize>>| -> Vec<Submeasurement<usize>> {
        fams.iter()
            .map(|s| {
                Submeasurement::new(r, s.iter().map(|(l, e)| (*l, e.transpose())).collect())
                    .expect("transposed elements stay valid")
            })
            .collect()
    };
    let tr_pairs = |fams: &Vec<Submeasurement<(usize, usize)>>| {
        fams.iter()
            .map(|s| {
                Submeasurement::new(r, s.iter().map(|(l, e)| (*l, e.transpose())).collect())
                    .expect("transposed elements stay valid")
            })
            .collect()
    };
    BipartiteStrategy {
        ra: r,
        rb: r,
        n: strategy.n,
        m: strategy.m,
        psi,
        points: strategy.points.clone(),
        lines: strategy.lines.clone(),
        pairs: strategy.pairs.clone(),
        points_t: tr_fam(&strategy.points),
        lines_t: tr_fam(&strategy.lines),
        pairs_t: tr_pairs(&strategy.pairs),
    }
}

/// Symmetrizes a bipartite strategy without changing its game value.
///
/// Construction: with `S` the swap operator on the two (equal-dimensional)
/// prover spaces, the new state is
/// `|ψ'⟩ = (1/√2)(|ψ⟩ ⊗ |0⟩⊗|1⟩ + (S|ψ⟩) ⊗ |1⟩⊗|0⟩)` (one auxiliary qubit
/// per prover), the first prover measures
/// `X' = X ⊗ |0⟩⟨0| + X̃ᵀ ⊗ |1⟩⟨1|`, and the second prover measures the
/// transpose `(Y')ᵀ`. Then `⟨ψ'| X' ⊗ (Y')ᵀ |ψ'⟩ = ⟨ψ| X ⊗ Ỹ |ψ⟩` for every
/// question pair, which is verified numerically by the caller's tests.
///
/// Requires `ra = rb`; strategies with unequal dimensions are padded first
/// (state extended by zeros, measurement completeness restored by assigning
/// the orthogonal complement to the lexicographically-first outcome).
pub fn symmetrize(strategy: &BipartiteStrategy) -> BipartiteStrategy {
    let s = if strategy.ra == strategy.rb {
        strategy.clone()
    } else {
        pad_to_square(strategy)
    };
    let r = s.ra;
    let r2 = 2 * r;

    // |ψ'⟩ over (C^r ⊗ C²) ⊗ (C^r ⊗ C²); prover index (i, bit) = i*2 + bit.
    let mut psi = DVector::zeros(r2 * r2);
    let amp = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    for i in 0..r {
        for j in 0..r {
            let v = s.psi[i * r + j];
            // |ψ⟩ ⊗ |0⟩_A |1⟩_B
            psi[(i * 2) * r2 + (j * 2 + 1)] += amp * v;
            // (S|ψ⟩)_{ij} = ψ_{ji}, ⊗ |1⟩_A |0⟩_B
            psi[(j * 2 + 1) * r2 + (i * 2)] += amp * v;
        }
    }

    // X' = X ⊗ |0⟩⟨0| + X̃ᵀ ⊗ |1⟩⟨1| on one prover; the other uses (X')ᵀ.
    let embed = |x: &Op, xt: &Op| -> Op {
        let mut out = Op::zeros(r2, r2);
        for i in 0..r {
            for j in 0..r {
                out[(i * 2, j * 2)] = x[(i, j)];
                out[(i * 2 + 1, j * 2 + 1)] = xt[(j, i)]; // transpose of tilde
            }
        }
        out
    };
    let build = |plain: &Vec<Submeasurement<usize>>, tilde: &Vec<Submeasurement<usize>>| {
        plain
            .iter()
            .zip(tilde)
            .map(|(p, t)| {
                let labels: std::collections::BTreeSet<usize> =
                    p.labels().chain(t.labels()).cloned().collect();
                let z = Op::zeros(r, r);
                Submeasurement::new(
                    r2,
                    labels
                        .into_iter()
                        .map(|l| {
                            let x = p.element(&l).unwrap_or(&z);
                            let xt = t.element(&l).unwrap_or(&z);
                            (l, embed(x, xt))
                        })
                        .collect(),
                )
                .expect("embedded elements stay valid")
            })
            .collect::<Vec<_>>()
    };
    let build_pairs = |plain: &Vec<Submeasurement<(usize, usize)>>,
                       tilde: &Vec<Submeasurement<(usize, usize)>>| {
        plain
            .iter()
            .zip(tilde)
            .map(|(p, t)| {
                let labels: std::collections::BTreeSet<(usize, usize)> =
                    p.labels().chain(t.labels()).cloned().collect();
                let z = Op::zeros(r, r);
                Submeasurement::new(
                    r2,
                    labels
                        .into_iter()
                        .map(|l| {
                            let x = p.element(&l).unwrap_or(&z);
                            let xt = t.element(&l).unwrap_or(&z);
                            (l, embed(x, xt))
                        })
                        .collect(),
                )
                .expect("embedded elements stay valid")
            })
            .collect::<Vec<_>>()
    };

    let points = build(&s.points, &s.points_t);
    let lines = build(&s.lines, &s.lines_t);
    let pairs = build_pairs(&s.pairs, &s.pairs_t);
    let transpose_all = |fams: &Vec<Submeasurement<usize>>| -> Vec<Submeasurement<usize>> {
        fams.iter()
            .map(|f| {
                Submeasurement::new(r2, f.iter().map(|(l, e)| (*l, e.transpose())).collect())
                    .expect("transpose stays valid")
            })
            .collect()
    };
    let transpose_pairs = |fams: &Vec<Submeasurement<(usize, usize)>>| {
        fams.iter()
            .map(|f| {
                Submeasurement::new(r2, f.iter().map(|(l, e)| (*l, e.transpose())).collect())
                    .expect("transpose stays valid")
            })
            .collect()
    };

    BipartiteStrategy {
        ra: r2,
        rb: r2,
        n: s.n,
        m: s.m,
        psi,
        points_t: transpose_all(&points),
        lines_t: transpose_all(&lines),
        pairs_t: transpose_pairs(&pairs),
        points,
        lines,
        pairs,
    }
}

fn pad_to_square(strategy: &BipartiteStrategy) -> BipartiteStrategy {
    let r = strategy.ra.max(strategy.rb);
    let pad_fam = |fams: &Vec<Submeasurement<usize>>, old: usize| -> Vec<Submeasurement<usize>> {
        fams.iter().map(|f| pad_one(f, old, r)).collect()
    };
    let pad_pairs = |fams: &Vec<Submeasurement<(usize, usize)>>, old: usize| {
        fams.iter().map(|f| pad_one(f, old, r)).collect()
    };
    let mut psi = DVector::zeros(r * r);
    for i in 0..strategy.ra {
        for j in 0..strategy.rb {
            psi[i * r + j] = strategy.psi[i * strategy.rb + j];
        }
    }
    BipartiteStrategy {
        ra: r,
        rb: r,
        n: strategy.n,
        m: strategy.m,
        psi,
        points: pad_fam(&strategy.points, strategy.ra),
        lines: pad_fam(&strategy.lines, strategy.ra),
        pairs: pad_pairs(&strategy.pairs, strategy.ra),
        points_t: pad_fam(&strategy.points_t, strategy.rb),
        lines_t: pad_fam(&strategy.lines_t, strategy.rb),
        pairs_t: pad_pairs(&strategy.pairs_t, strategy.rb),
    }
}

fn pad_one<L: Ord + Clone + std::fmt::Debug>(
    f: &Submeasurement<L>,
    old: usize,
    new: usize,
) -> Submeasurement<L> {
    let mut elems: Vec<(L, Op)> = f
        .iter()
        .map(|(l, e)| {
            let mut big = Op::zeros(new, new);
            big.view_mut((0, 0), (old, old)).copy_from(e);
            (l.clone(), big)
        })
        .collect();
    // Restore completeness: the complement block goes to the first outcome.
    if let Some((_, first)) = elems.first_mut() {
        for i in old..new {
            first[(i, i)] = Complex64::new(1.0, 0.0);
        }
    }
    Submeasurement::new(new, elems).expect("padded elements stay valid")
}

/// Result of a Monte-Carlo referee run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MonteCarloResult {
    pub rounds: u64,
    pub accepted: u64,
    pub rate: f64,
    /// Binomial standard error `sqrt(p(1-p)/rounds)`.
    pub standard_error: f64,
}

/// Plays `rounds` seeded rounds of the game against a synchronous strategy.
///
/// Rounds are seeded by a per-round counter stream so the result is
/// independent of any execution order. Outcome distributions
/// `τ(M^x_a M^y_b)` are computed on demand per question pair, cached, and
/// checked to be nonnegative (within −1e−9) and normalized.
pub fn monte_carlo_play(
    strategy: &SynchronousStrategy,
    game: &GameSpec,
    rounds: u64,
    seed: u64,
) -> Result<MonteCarloResult, GameError> {
    check_strategy(strategy, game)?;
    // Cumulative weights over items.
    let weights: Vec<f64> = game.items.iter().map(|i| rat_to_f64(&i.weight)).collect();
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cum.push(acc);
    }
    // Per-item outcome distribution cache: (cumulative probability, accept).
    let mut cache: Vec<Option<(Vec<f64>, Vec<bool>, f64)>> = vec![None; game.items.len()];

    let mut accepted = 0u64;
    for round in 0..rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round);
        let x: f64 = rng.gen_range(0.0..1.0);
        let idx = cum.partition_point(|&c| c < x).min(game.items.len() - 1);
        if cache[idx].is_none() {
            cache[idx] = Some(item_distribution(strategy, game, &game.items[idx].kind)?);
        }
        let (cumdist, accepts, total) = cache[idx].as_ref().unwrap();
        let y: f64 = rng.gen_range(0.0..1.0) * total;
        let oi = cumdist.partition_point(|&c| c < y).min(accepts.len() - 1);
        if accepts[oi] {
            accepted += 1;
        }
    }
    let rate = accepted as f64 / rounds as f64;
    Ok(MonteCarloResult {
        rounds,
        accepted,
        rate,
        standard_error: (rate * (1.0 - rate) / rounds as f64).sqrt(),
    })
}

/// Joint outcome distribution of one question pair, with acceptance flags.
/// Returns (cumulative probabilities, accept flags, total mass).
fn item_distribution(
    strategy: &SynchronousStrategy,
    game: &GameSpec,
    kind: &ItemKind,
) -> Result<(Vec<f64>, Vec<bool>, f64), GameError> {
    let mut probs: Vec<(f64, bool)> = Vec::new();
    let mut push = |p: f64, accept: bool| -> Result<(), GameError> {
        if p < -1e-9 {
            return Err(GameError::InvalidDistribution(format!(
                "negative outcome probability {p}"
            )));
        }
        probs.push((p.max(0.0), accept));
        Ok(())
    };
    match kind {
        ItemKind::LinePoint { line, point, pos } => {
            let b = &strategy.lines[*line];
            let a = &strategy.points[*point];
            for (gidx, bop) in b.iter() {
                let g_at = game.codewords[*gidx as usize].at(*pos).value() as usize;
                for (aval, aop) in a.iter() {
                    push(trace_state(&(bop * aop)).re, g_at == *aval)?;
                }
            }
        }
        ItemKind::PairPoint { u, v, component } => {
            let p = strategy.pair(*u, *v);
            let point = if *component == 0 { *u } else { *v };
            let a = &strategy.points[point];
            for (&(b1, b2), pop) in p.iter() {
                let matchval = if *component == 0 { b1 } else { b2 };
                for (aval, aop) in a.iter() {
                    push(trace_state(&(pop * aop)).re, matchval == *aval)?;
                }
            }
        }
        ItemKind::SyncPoint { point } => {
            let a = &strategy.points[*point];
            for (la, ea) in a.iter() {
                for (lb, eb) in a.iter() {
                    push(trace_state(&(ea * eb)).re, la == lb)?;
                }
            }
        }
        ItemKind::SyncLine { line } => {
            let b = &strategy.lines[*line];
            for (la, ea) in b.iter() {
                for (lb, eb) in b.iter() {
                    push(trace_state(&(ea * eb)).re, la == lb)?;
                }
            }
        }
        ItemKind::SyncPair { u, v } => {
            let p = strategy.pair(*u, *v);
            for (la, ea) in p.iter() {
                for (lb, eb) in p.iter() {
                    push(trace_state(&(ea * eb)).re, la == lb)?;
                }
            }
        }
    }
    let total: f64 = probs.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(GameError::InvalidDistribution(format!(
            "outcome distribution has mass {total}"
        )));
    }
    let mut cumdist = Vec::with_capacity(probs.len());
    let mut accepts = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for (p, a) in probs {
        acc += p;
        cumdist.push(acc);
        accepts.push(a);
    }
    Ok((cumdist, accepts, total))
}
