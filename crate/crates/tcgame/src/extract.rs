//! The constructive soundness pipeline: a duality measurement solved as a
//! small semidefinite program, self-improvement of codeword measurements,
//! two pasting methods that assemble slice measurements into a global
//! codeword measurement, the recursion driver, and commutator / variance
//! diagnostics.
//!
//! All quantities are *measured* at desk scale and asserted against their
//! analytic bounds; nothing is assumed. The central object is, for a
//! synchronous strategy with points measurements `A^u` and a candidate
//! global measurement `G` over tensor codewords:
//!
//! * **duality** — `min tr(W) s.t. W ⪰ A_g/r` with `A_g = E_u A^u_{g(u)}`,
//!   whose dual optimum is attained by a complete measurement `{T_g}` with
//!   `Σ_g tr(T_g A_g)/r = tr(W)` (complementary slackness);
//! * **self-improvement** — `H_g = E_u A^u_{g(u)} T_g A^u_{g(u)}`,
//!   orthogonalized; completeness `τ(H) ≥ 1 − ν − ζ` is a hard runtime
//!   assertion with ν, ζ measured;
//! * **pasting** — Method 1 sandwiches `t` slice measurements
//!   (`G^{x_1}_{g_1} ⋯ G^{x_t}_{g_t} ⋯ G^{x_1}_{g_1}`, outcome interpolated
//!   from the slices); Method 2 sandwiches `k ≥ t` extended measurements
//!   `Ĝ` (with an explicit incomplete outcome ⊥) and keeps outcome patterns
//!   with at least `t` real slices, tying completeness to the binomial tail
//!   `F(x) = Σ_{r≥t} C(k,r) x^r (1−x)^{k−r}`;
//! * **extraction** — the recursion over the last coordinate: restrict,
//!   recurse, self-improve, paste, complete; the final score is
//!   `η = 1 − E_u Σ_c τ(G_c A^u_{c(u)})`.

use crate::codes::LinearCode;
use crate::game::{build_game, goodness_synchronous, SynchronousStrategy};
use crate::opalg::{
    identity, matrix_function, min_eigenvalue, orthogonalize, pair_inconsistency,
    tau_norm, trace_state, zero, Op, Submeasurement,
};
use crate::spectral::distinct_tuples;
use crate::tensor::{
    enumerate_tensor_codewords, interpolate_slices, line_index, point_index,
    restrict_slice, AxisLine, TensorCodeword,
};
use nalgebra::Complex;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Op(#[from] crate::opalg::OpError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
    #[error(transparent)]
    Code(#[from] crate::codes::CodeError),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
    #[error("duality solver did not reach gap {target}: best gap {best}")]
    DualityNonConvergence { target: f64, best: f64 },
    #[error("self-improvement completeness violated: τ(H) = {completeness} < 1 − ν − ζ = {bound}")]
    CompletenessViolated { completeness: f64, bound: f64 },
    #[error("pasting would exceed the tuple budget ({0} tuples) with sampling disabled")]
    TupleBudget(usize),
    #[error("method 2 needs k ≥ t, got k = {k}, t = {t}")]
    KTooSmall { k: usize, t: usize },
    #[error("completion mass is negative beyond tolerance: min eigenvalue {0}")]
    NegativeCompletion(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Duality
// ---------------------------------------------------------------------------

/// Solution of the minimal-dominating-functional program.
#[derive(Debug, Clone)]
pub struct DualitySolution {
    /// Riesz representer of the functional: `ψ(X) = tr(X W)`, `W ⪰ A_g/r`.
    pub w: Op,
    /// Dual optimizer: a complete measurement over the same labels.
    pub t: Submeasurement<usize>,
    /// `tr(W)`.
    pub primal: f64,
    /// `Σ_g tr(T_g A_g)/r`.
    pub dual: f64,
    /// `primal − dual ≥ 0`.
    pub gap: f64,
    /// Max complementary-slackness residual `|tr(XW) − Σ_g tr(sym(T_g A_g/r) X)|`
    /// over 20 seeded random Hermitian `X` of unit operator norm.
    pub cs_residual: f64,
    pub iterations: usize,
}

/// Hermitian basis of r×r matrices (diagonal, then real/imaginary pairs).
fn hermitian_basis(r: usize) -> Vec<Op> {
    let mut basis = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut e = zero(r);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let mut e = zero(r);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            e[(j, i)] = Complex64::new(1.0, 0.0);
            basis.push(e);
            let mut e = zero(r);
            e[(i, j)] = Complex64::new(0.0, 1.0);
            e[(j, i)] = Complex64::new(0.0, -1.0);
            basis.push(e);
        }
    }
    basis
}

/// Solves `min tr(W) s.t. W ⪰ A_g/r` and its dual
/// `max Σ_g tr(T_g A_g)/r` over complete measurements `{T_g}`.
///
/// Strategy: the 1-dimensional case is the scalar maximum in closed form.
/// Otherwise a matrix-exponentiated-gradient (softmax) schedule on the dual
/// simplex produces matched candidates
/// `T_g(μ) = M^{-1/2} e^{X_g/μ} M^{-1/2}` (`M = Σ_g e^{X_g/μ}`, exactly
/// complete) and the operator-monotone-feasible primal
/// `W_μ = μ log Σ_g e^{X_g/μ} ⪰ X_g`. Because the softmax pair can stall at
/// a positive gap when the `A_g` do not commute, a damped-Newton barrier
/// stage (`min tr W − μ Σ_g log det(W − X_g)`) then follows the central
/// path, whose dual certificate `T_g ∝ μ(W − X_g)^{-1}` closes the gap to
/// the target tolerance.
pub fn solve_duality(
    a_g: &BTreeMap<usize, Op>,
    r: usize,
    tol: f64,
) -> Result<DualitySolution, ExtractError> {
    if a_g.is_empty() {
        return Err(ExtractError::Invalid("no constraint operators".into()));
    }
    let labels: Vec<usize> = a_g.keys().copied().collect();
    let xs: Vec<Op> = a_g
        .values()
        .map(|a| a.map(|z| z / r as f64))
        .collect();

    // Scalar closed form: W = max_g x_g, T concentrated on the argmax.
    if r == 1 {
        let vals: Vec<f64> = xs.iter().map(|x| x[(0, 0)].re).collect();
        let best = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .map(|(i, _)| i)
            .expect("nonempty");
        let t = Submeasurement::new(1, vec![(labels[best], identity(1))])?;
        let primal = vals[best];
        return Ok(DualitySolution {
            w: Op::from_element(1, 1, Complex64::new(primal, 0.0)),
            t,
            primal,
            dual: primal,
            gap: 0.0,
            cs_residual: 0.0,
            iterations: 0,
        });
    }

    let g_count = xs.len();
    let dual_value = |ts: &[Op]| -> f64 {
        ts.iter()
            .zip(&xs)
            .map(|(t, x)| (t * x).trace().re)
            .sum()
    };
    // Feasibility repair: lift W by the worst constraint violation.
    let repair = |w: &Op| -> Op {
        let viol = xs
            .iter()
            .map(|x| -min_eigenvalue(&(w - x)))
            .fold(0.0f64, f64::max)
            .max(0.0);
        w + identity(r).map(|z| z * viol)
    };

    let mut best_w: Option<Op> = None;
    let mut best_primal = f64::INFINITY;
    let mut best_ts: Vec<Op> = vec![identity(r).map(|z| z / g_count as f64); g_count];
    let mut best_dual = dual_value(&best_ts);
    let mut iterations = 0usize;

    // Softmax (matrix exponentiated gradient) schedule.
    let mut mu = 1.0f64;
    while mu > 1e-10 {
        iterations += 1;
        let shift = xs
            .iter()
            .map(crate::opalg::max_eigenvalue)
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<Op> = xs
            .iter()
            .map(|x| {
                matrix_function(&(x - identity(r).map(|z| z * shift)), |v| (v / mu).exp())
                    .expect("Hermitian input")
            })
            .collect::<Vec<_>>();
        let m_sum = exps.iter().fold(zero(r), |acc, e| acc + e);
        let m_inv_sqrt = matrix_function(&m_sum, |v| v.max(1e-300).powf(-0.5))
            .expect("Hermitian sum");
        let ts: Vec<Op> = exps.iter().map(|e| &m_inv_sqrt * e * &m_inv_sqrt).collect();
        let d = dual_value(&ts);
        if d > best_dual {
            best_dual = d;
            best_ts = ts;
        }
        // W_μ = shift·I + μ log M, feasible since log is operator monotone.
        let w_mu = repair(
            &(identity(r).map(|z| z * shift)
                + matrix_function(&m_sum, |v| mu * v.max(1e-300).ln()).expect("Hermitian sum")),
        );
        let p = w_mu.trace().re;
        if p < best_primal {
            best_primal = p;
            best_w = Some(w_mu);
        }
        if best_primal - best_dual <= tol {
            break;
        }
        mu *= 0.5;
    }

    // Barrier refinement when the softmax pair has not closed the gap.
    if best_primal - best_dual > tol {
        let basis = hermitian_basis(r);
        let dim = basis.len();
        // Strictly interior start.
        let mut w = best_w.clone().unwrap_or_else(|| identity(r));
        let interior_slack = |w: &Op| -> f64 {
            xs.iter()
                .map(|x| min_eigenvalue(&(w - x)))
                .fold(f64::INFINITY, f64::min)
        };
        w += identity(r).map(|z| z * (1e-3 - interior_slack(&w).min(0.0)));
        let mut mu_b = (best_primal - best_dual).max(tol) / (g_count * r) as f64;
        let mu_target = tol / (4.0 * (g_count * r) as f64);
        loop {
            // Newton centering of tr W − μ Σ log det(W − X_g).
            for _ in 0..60 {
                iterations += 1;
                let slacks: Vec<Op> = xs
                    .iter()
                    .map(|x| {
                        let s = w.clone() - x;
                        s.clone()
                            .try_inverse()
                            .unwrap_or_else(|| {
                                matrix_function(&s, |v| 1.0 / v.max(1e-300)).expect("Hermitian")
                            })
                    })
                    .collect();
                let grad_op = identity(r)
                    - slacks
                        .iter()
                        .fold(zero(r), |acc, s| acc + s.map(|z| z * mu_b));
                let grad: Vec<f64> = basis
                    .iter()
                    .map(|e| (e * &grad_op).trace().re)
                    .collect();
                let mut hess = nalgebra::DMatrix::<f64>::zeros(dim, dim);
                for s in &slacks {
                    let se: Vec<Op> = basis.iter().map(|e| s * e).collect();
                    for a in 0..dim {
                        for b in a..dim {
                            let v = mu_b * (&se[a] * &se[b]).trace().re;
                            hess[(a, b)] += v;
                            hess[(b, a)] = hess[(a, b)];
                        }
                    }
                }
                // Levenberg damping keeps the solve well-posed.
                for i in 0..dim {
                    hess[(i, i)] += 1e-12;
                }
                let g_vec = nalgebra::DVector::from_vec(grad.clone());
                let Some(step) = hess.lu().solve(&g_vec) else { break };
                let decrement = g_vec.dot(&step);
                let mut delta = zero(r);
                for (c, e) in step.iter().zip(&basis) {
                    delta += e.map(|z| z * -c);
                }
                // Backtrack into the interior.
                let mut scale = 1.0;
                let mut accepted = false;
                for _ in 0..40 {
                    let cand = &w + delta.map(|z| z * scale);
                    if interior_slack(&cand) > 0.0 {
                        w = cand;
                        accepted = true;
                        break;
                    }
                    scale *= 0.5;
                }
                if !accepted || decrement.abs() < 1e-14 {
                    break;
                }
            }
            // Dual certificate from the (near-)central point.
            let slacks: Vec<Op> = xs
                .iter()
                .map(|x| {
                    matrix_function(&(w.clone() - x), |v| mu_b / v.max(1e-300))
                        .expect("Hermitian")
                })
                .collect();
            let m_sum = slacks.iter().fold(zero(r), |acc, s| acc + s);
            let m_inv_sqrt =
                matrix_function(&m_sum, |v| v.max(1e-300).powf(-0.5)).expect("Hermitian");
            let ts: Vec<Op> = slacks
                .iter()
                .map(|s| &m_inv_sqrt * s * &m_inv_sqrt)
                .collect();
            let d = dual_value(&ts);
            if d > best_dual {
                best_dual = d;
                best_ts = ts;
            }
            let wr = repair(&w);
            let p = wr.trace().re;
            if p < best_primal {
                best_primal = p;
                best_w = Some(wr);
            }
            if best_primal - best_dual <= tol || mu_b <= mu_target {
                break;
            }
            mu_b *= 0.25;
        }
    }

    let gap = best_primal - best_dual;
    if gap > tol {
        return Err(ExtractError::DualityNonConvergence {
            target: tol,
            best: gap,
        });
    }
    let w = best_w.expect("at least one primal candidate");

    // Complementary-slackness residual on seeded random Hermitian probes.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5D_CA1E);
    let mut cs_residual = 0.0f64;
    let cs_op = best_ts
        .iter()
        .zip(&xs)
        .fold(zero(r), |acc, (t, x)| {
            let tx = t * x;
            acc + (&tx + tx.adjoint()).map(|z| z * 0.5)
        });
    for _ in 0..20 {
        let mut x = crate::opalg::random_hermitian(r, &mut rng);
        let norm = crate::opalg::op_norm(&x).max(1e-12);
        x = x.map(|z| z / norm);
        let lhs = (&x * &w).trace().re;
        let rhs = (&x * &cs_op).trace().re;
        cs_residual = cs_residual.max((lhs - rhs).abs());
    }

    let t = Submeasurement::new(
        r,
        labels.into_iter().zip(best_ts).collect::<Vec<_>>(),
    )?;
    Ok(DualitySolution {
        w,
        t,
        primal: best_primal,
        dual: best_dual,
        gap,
        cs_residual,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Self-improvement
// ---------------------------------------------------------------------------

/// Output of one self-improvement pass.
#[derive(Debug, Clone)]
pub struct SelfImprovement {
    /// The improved measurement: projective, over tensor-codeword indices.
    pub h: Submeasurement<usize>,
    /// Representer of the dominating functional ψ.
    pub w: Op,
    pub duality: DualitySolution,
    /// Measured hypothesis error: inconsistency of the input `G` with the
    /// points measurements.
    pub nu: f64,
    /// `τ(H)` after orthogonalization.
    pub completeness: f64,
    /// Inconsistency of `H` with the points measurements.
    pub consistency_deficit: f64,
    /// `ψ(I − Σ_g H_g) = tr((I − H_tot) W)`.
    pub psi_deficit: f64,
    /// The ζ reading used in the completeness assertion:
    /// `max(consistency_deficit, psi_deficit)`.
    pub zeta_reported: f64,
    /// Projectivity deficit of the pre-rounding sandwich and the rounding
    /// distance actually incurred.
    pub ortho_zeta: f64,
    pub ortho_distance: f64,
}

/// `A_g = E_u A^u_{g(u)}` for every enumerable tensor codeword `g` (zero
/// operators dropped).
pub fn codeword_agreement_operators(
    strategy: &SynchronousStrategy,
    words: &[TensorCodeword],
) -> BTreeMap<usize, Op> {
    let num_points = strategy.num_points();
    let mut out = BTreeMap::new();
    for (gi, g) in words.iter().enumerate() {
        let mut acc = zero(strategy.r);
        for u in 0..num_points {
            let val = g.table[u].value() as usize;
            if let Some(a) = strategy.points[u].element(&val) {
                acc += a;
            }
        }
        acc = acc.map(|z| z / num_points as f64);
        if tau_norm(&acc) > 1e-14 {
            out.insert(gi, acc);
        }
    }
    out
}

/// Inconsistency of a measurement over tensor codewords with the points
/// measurements: `E_u Σ_{a≠b} τ(A^u_a G_{[g↦g(u)|b]})`.
pub fn points_inconsistency(
    strategy: &SynchronousStrategy,
    words: &[TensorCodeword],
    g: &Submeasurement<usize>,
) -> f64 {
    let num_points = strategy.num_points();
    (0..num_points)
        .map(|u| {
            let processed = g.data_process(|gi| words[*gi].table[u].value() as usize);
            pair_inconsistency(&strategy.points[u], &processed)
        })
        .sum::<f64>()
        / num_points as f64
}

/// Self-improvement: solve the duality program for `A_g = E_u A^u_{g(u)}`,
/// sandwich `H_g = E_u A^u_{g(u)} T_g A^u_{g(u)}`, and round to a projective
/// submeasurement. The completeness conclusion
/// `τ(H) ≥ 1 − ν − ζ_measured` is asserted at runtime.
pub fn self_improve(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
    g: &Submeasurement<usize>,
    tol: f64,
) -> Result<SelfImprovement, ExtractError> {
    let words = enumerate_tensor_codewords(code, strategy.m)?;
    let nu = points_inconsistency(strategy, &words, g);

    let a_g = codeword_agreement_operators(strategy, &words);
    let duality = solve_duality(&a_g, strategy.r, tol)?;

    let num_points = strategy.num_points();
    let mut h_elems: BTreeMap<usize, Op> = BTreeMap::new();
    for (gi, t_g) in duality.t.iter() {
        let mut acc = zero(strategy.r);
        for u in 0..num_points {
            let val = words[*gi].table[u].value() as usize;
            if let Some(a) = strategy.points[u].element(&val) {
                acc += a * t_g * a;
            }
        }
        acc = acc.map(|z| z / num_points as f64);
        if tau_norm(&acc) > 1e-14 {
            h_elems.insert(*gi, acc);
        }
    }
    let h_raw = Submeasurement::new(strategy.r, h_elems.into_iter().collect())?;
    let (h, ortho) = orthogonalize(&h_raw)?;

    let completeness = h.mass();
    let consistency_deficit = points_inconsistency(strategy, &words, &h);
    let psi_deficit = ((identity(strategy.r) - h.total()).adjoint() * &duality.w)
        .trace()
        .re
        .max(0.0);
    let zeta_reported = consistency_deficit.max(psi_deficit);
    let bound = 1.0 - nu - zeta_reported;
    if completeness < bound - 1e-7 {
        return Err(ExtractError::CompletenessViolated {
            completeness,
            bound,
        });
    }
    Ok(SelfImprovement {
        h,
        w: duality.w.clone(),
        duality,
        nu,
        completeness,
        consistency_deficit,
        psi_deficit,
        zeta_reported,
        ortho_zeta: ortho.zeta,
        ortho_distance: ortho.distance,
    })
}

// ---------------------------------------------------------------------------
// Restriction
// ---------------------------------------------------------------------------

/// Restricts a strategy over `[n]^{m+1}` at last coordinate `x`:
/// `A^u := A^{u∘x}`, lines and pairs likewise. Dimension is preserved.
pub fn restrict_strategy(
    strategy: &SynchronousStrategy,
    x: usize,
) -> Result<SynchronousStrategy, ExtractError> {
    let (n, big_m) = (strategy.n, strategy.m);
    if big_m < 2 {
        return Err(ExtractError::Invalid("restriction needs m ≥ 2".into()));
    }
    if x >= n {
        return Err(ExtractError::Invalid(format!("x = {x} out of [0, {n})")));
    }
    let m = big_m - 1;
    let num_points = n.pow(m as u32);
    // u∘x appends x as the (fastest-varying) last coordinate.
    let old_point = |u: usize| u * n + x;
    let points = (0..num_points)
        .map(|u| strategy.points[old_point(u)].clone())
        .collect();
    let lines = crate::tensor::enumerate_lines(n, m)
        .iter()
        .map(|line| {
            let mut intercept = line.intercept.clone();
            intercept.push(x);
            let old = AxisLine {
                axis: line.axis,
                intercept,
            };
            strategy.lines[line_index(&old, n, big_m)].clone()
        })
        .collect();
    let old_num_points = n.pow(big_m as u32);
    let pairs = (0..num_points)
        .flat_map(|u| (0..num_points).map(move |v| (u, v)))
        .map(|(u, v)| strategy.pairs[old_point(u) * old_num_points + old_point(v)].clone())
        .collect();
    Ok(SynchronousStrategy {
        r: strategy.r,
        n,
        m,
        points,
        lines,
        pairs,
    })
}

// ---------------------------------------------------------------------------
// Pasting
// ---------------------------------------------------------------------------

/// Configuration of a pasting run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PastingConfig {
    /// 1 = t-fold sandwich, 2 = k-fold sandwich with ⊥-typed outcomes.
    pub method: u8,
    /// Repetition count for Method 2 (`k ≥ t`). `None` picks
    /// `max(t, min(12·m·t, t + 2))`, keeping the enumeration desk-scale.
    pub k: Option<usize>,
    /// Exact tuple enumeration is used while the count stays at or below
    /// this; beyond it, seeded sampling with `tuple_samples` tuples.
    pub tuple_budget: usize,
    pub tuple_samples: usize,
    pub seed: u64,
    /// Duality tolerance for the self-improvement stages.
    pub tol: f64,
}

impl Default for PastingConfig {
    fn default() -> Self {
        Self {
            method: 1,
            k: None,
            tuple_budget: 10_000,
            tuple_samples: 2_000,
            seed: 0,
            tol: 1e-7,
        }
    }
}

impl PastingConfig {
    pub fn effective_k(&self, m: usize, t: usize) -> usize {
        self.k.unwrap_or_else(|| t.max((12 * m * t).min(t + 2)))
    }
}

/// A pasted (and completed) global measurement with its measured metrics.
#[derive(Debug, Clone)]
pub struct PastedMeasurement {
    /// Complete measurement over `C^{⊗(m+1)}` codeword indices.
    pub h: Submeasurement<usize>,
    /// `τ(Σ_h H_h)` before the completion mass was added.
    pub pre_completion_mass: f64,
    /// Inconsistency of the completed `H` with the points measurements.
    pub consistency: f64,
    pub tuples_used: usize,
    pub sampled: bool,
    /// Mass lost to pruned near-zero product branches (upper bound).
    pub pruning_error: f64,
}

fn tuples_for(
    n: usize,
    len: usize,
    cfg: &PastingConfig,
) -> Result<(Vec<Vec<usize>>, bool), ExtractError> {
    let count: usize = (0..len).map(|i| n - i).product();
    if count <= cfg.tuple_budget {
        Ok((distinct_tuples(n, len), false))
    } else if cfg.tuple_samples == 0 {
        Err(ExtractError::TupleBudget(count))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut out = Vec::with_capacity(cfg.tuple_samples);
        for _ in 0..cfg.tuple_samples {
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(&mut rng);
            pool.truncate(len);
            out.push(pool);
        }
        Ok((out, true))
    }
}

fn word_index_map(words: &[TensorCodeword]) -> HashMap<Vec<u64>, usize> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.table.iter().map(|v| v.value()).collect(), i))
        .collect()
}

fn complete_at_first(
    r: usize,
    mut elems: BTreeMap<usize, Op>,
) -> Result<(Submeasurement<usize>, f64), ExtractError> {
    let total = elems.values().fold(zero(r), |acc, e| acc + e);
    let rem = identity(r) - &total;
    let min_eig = min_eigenvalue(&rem);
    if min_eig < -1e-7 {
        return Err(ExtractError::NegativeCompletion(min_eig));
    }
    let pre = trace_state(&total).re;
    // Clip tiny negativity so the completed family stays PSD.
    let rem = matrix_function(&rem, |v| v.max(0.0))?;
    *elems.entry(0).or_insert_with(|| zero(r)) += rem;
    Ok((Submeasurement::new(r, elems.into_iter().collect())?, pre))
}

const PRODUCT_PRUNE: f64 = 1e-14;

/// Method 1: `H_h` averaged over distinct `t`-tuples of coordinates of the
/// palindromic sandwich `G^{x_1}_{g_1} ⋯ G^{x_t}_{g_t} ⋯ G^{x_1}_{g_1}`,
/// where `h` interpolates the slice outcomes `g_1 … g_t`; completed at the
/// lexicographically-first codeword.
pub fn paste_method1(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
    slices: &[Submeasurement<usize>],
    cfg: &PastingConfig,
) -> Result<PastedMeasurement, ExtractError> {
    let n = strategy.n;
    let m = strategy.m; // target dimension m (slices live over m−1)
    let t = code.t();
    if slices.len() != n {
        return Err(ExtractError::Invalid("need one slice measurement per x".into()));
    }
    let words_lo = enumerate_tensor_codewords(code, m - 1)?;
    let words_hi = enumerate_tensor_codewords(code, m)?;
    let hi_index = word_index_map(&words_hi);
    let (tuples, sampled) = tuples_for(n, t, cfg)?;
    let r = strategy.r;
    let weight = 1.0 / tuples.len() as f64;

    let mut acc: BTreeMap<usize, Op> = BTreeMap::new();
    let mut pruning_error = 0.0;
    for tuple in &tuples {
        // Depth-first over slice outcomes with prefix products
        // L_i = G^{x_1}_{g_1} ⋯ G^{x_i}_{g_i}.
        let mut stack: Vec<(usize, Vec<usize>, Op)> = vec![(0, Vec::new(), identity(r))];
        while let Some((depth, picked, prefix)) = stack.pop() {
            if depth == t {
                let slice_words: Vec<TensorCodeword> =
                    picked.iter().map(|&g| words_lo[g].clone()).collect();
                let h_word = interpolate_slices(code, tuple, &slice_words)?;
                let key: Vec<u64> = h_word.table.iter().map(|v| v.value()).collect();
                let hi = *hi_index
                    .get(&key)
                    .ok_or_else(|| ExtractError::Invalid("interpolation left the code".into()))?;
                // prefix = L_{t-1} · G^{x_t}_{g_t}; sandwich = prefix · L_{t-1}†
                // equals L_{t-1} G L_{t-1}†, recovered from the stored parts.
                let entry = acc.entry(hi).or_insert_with(|| zero(r));
                *entry += prefix.map(|z| z * weight);
                continue;
            }
            let x = tuple[depth];
            for (g, e) in slices[x].iter() {
                let next = if depth + 1 == t {
                    // Final factor closes the palindrome: L·G·L†.
                    &prefix * e * prefix.adjoint()
                } else {
                    &prefix * e
                };
                let nrm = crate::opalg::op_norm(&next);
                if nrm <= PRODUCT_PRUNE {
                    pruning_error += nrm;
                    continue;
                }
                let mut p = picked.clone();
                p.push(*g);
                stack.push((depth + 1, p, next));
            }
        }
    }

    let (h, pre) = complete_at_first(r, acc)?;
    let consistency = points_inconsistency(strategy, &words_hi, &h);
    Ok(PastedMeasurement {
        h,
        pre_completion_mass: pre,
        consistency,
        tuples_used: tuples.len(),
        sampled,
        pruning_error,
    })
}

/// Method 2: extend each slice measurement with the explicit incomplete
/// outcome ⊥ (`Ĝ^x_⊥ = I − Σ_g G^x_g`), form
/// `Ĥ_{ĝ} = P P†` with `P = Ĝ^{x_1}_{ĝ_1} ⋯ Ĝ^{x_k}_{ĝ_k}` over distinct
/// `k`-tuples, and set `H_h = Σ_{w : |w| ≥ t} Ĥ_{h_w}` where `h_w` pins the
/// non-⊥ entries to the restrictions of `h`. Completed at the
/// lexicographically-first codeword.
pub fn paste_method2(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
    slices: &[Submeasurement<usize>],
    cfg: &PastingConfig,
) -> Result<PastedMeasurement, ExtractError> {
    let n = strategy.n;
    let m = strategy.m;
    let t = code.t();
    let k = cfg.effective_k(m, t);
    if k < t {
        return Err(ExtractError::KTooSmall { k, t });
    }
    if slices.len() != n {
        return Err(ExtractError::Invalid("need one slice measurement per x".into()));
    }
    let words_lo = enumerate_tensor_codewords(code, m - 1)?;
    let words_hi = enumerate_tensor_codewords(code, m)?;
    let hi_index = word_index_map(&words_hi);
    let (tuples, sampled) = tuples_for(n, k, cfg)?;
    let r = strategy.r;
    let weight = 1.0 / tuples.len() as f64;

    // Bottoms: the incomplete parts Ĝ^x_⊥.
    let bottoms: Vec<Op> = slices.iter().map(|s| s.incomplete_part()).collect();

    let mut acc: BTreeMap<usize, Op> = BTreeMap::new();
    let mut pruning_error = 0.0;
    for tuple in &tuples {
        // ĝ entries: Some(g) or None (⊥), explored depth-first with prefix
        // products P_i = Ĝ^{x_1}_{ĝ_1} ⋯ Ĝ^{x_i}_{ĝ_i}.
        let mut stack: Vec<(usize, Vec<Option<usize>>, Op)> =
            vec![(0, Vec::new(), identity(r))];
        while let Some((depth, picked, prefix)) = stack.pop() {
            if depth == k {
                let real: Vec<(usize, usize)> = picked
                    .iter()
                    .enumerate()
                    .filter_map(|(i, g)| g.map(|g| (tuple[i], g)))
                    .collect();
                if real.len() < t {
                    continue; // |w| < t outcomes are discarded before completion
                }
                // Interpolate h from the first t real slices, then require
                // the remaining real outcomes to be restrictions of h —
                // otherwise ĝ is not of the form h_w for any h.
                let coords: Vec<usize> = real.iter().take(t).map(|&(x, _)| x).collect();
                let first: Vec<TensorCodeword> = real
                    .iter()
                    .take(t)
                    .map(|&(_, g)| words_lo[g].clone())
                    .collect();
                let h_word = interpolate_slices(code, &coords, &first)?;
                let consistent = real.iter().skip(t).all(|&(x, g)| {
                    restrict_slice(&h_word, x)
                        .map(|s| s == words_lo[g])
                        .unwrap_or(false)
                });
                if !consistent {
                    continue;
                }
                let key: Vec<u64> = h_word.table.iter().map(|v| v.value()).collect();
                let hi = *hi_index
                    .get(&key)
                    .ok_or_else(|| ExtractError::Invalid("interpolation left the code".into()))?;
                let piece = &prefix * prefix.adjoint();
                let entry = acc.entry(hi).or_insert_with(|| zero(r));
                *entry += piece.map(|z| z * weight);
                continue;
            }
            let x = tuple[depth];
            // ⊥ branch.
            let bot = &prefix * &bottoms[x];
            let nrm = crate::opalg::op_norm(&bot);
            if nrm > PRODUCT_PRUNE {
                let mut p = picked.clone();
                p.push(None);
                stack.push((depth + 1, p, bot));
            } else {
                pruning_error += nrm;
            }
            for (g, e) in slices[x].iter() {
                let next = &prefix * e;
                let nrm = crate::opalg::op_norm(&next);
                if nrm <= PRODUCT_PRUNE {
                    pruning_error += nrm;
                    continue;
                }
                let mut p = picked.clone();
                p.push(Some(*g));
                stack.push((depth + 1, p, next));
            }
        }
    }

    let (h, pre) = complete_at_first(r, acc)?;
    let consistency = points_inconsistency(strategy, &words_hi, &h);
    Ok(PastedMeasurement {
        h,
        pre_completion_mass: pre,
        consistency,
        tuples_used: tuples.len(),
        sampled,
        pruning_error,
    })
}

// ---------------------------------------------------------------------------
// Error bookkeeping
// ---------------------------------------------------------------------------

/// The named error quantities of the soundness analysis, evaluated from the
/// measured primitives (ε, δ, ζ) at one recursion level. All are finite and
/// O(1) at desk scale; they are diagnostic readings, not assumptions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NuSeries {
    pub eps: f64,
    pub delta: f64,
    pub zeta: f64,
    pub gamma_m: f64,
    pub kappa: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub nu4: f64,
    pub nu5: f64,
    pub nu6: f64,
    pub nu7: f64,
    pub mu: f64,
    pub nu_p2: f64,
    pub nu_pp3: f64,
    pub nu_p3: f64,
    pub nu_p4: f64,
    pub nu_p5: f64,
    pub nu_p6: f64,
    pub nu_method2: f64,
}

/// Evaluates the ν-chain:
/// ν₁ = 8(√ζ + √((m+1)δ)), ν₂ = 4(γ_m + ν₁),
/// ν₃ = t(t·ν₂ + √(ζ + √(2(m+1)ε))), ν₄ = ν₃ + √(2(m+1)ε),
/// ν₅ = √ν₄ + √ζ, ν₆ = 2t²(ν₂ + 1/n), ν₇ = ν₆ + 2(ν₅ + 2ν₆)^{1/t},
/// μ = κ + ν₄ + ν₇; and the primed chain
/// ν′₂ = 27ν₂^{1/4}, ν″₃ = kν′₂ + (ζ + (2(m+1)ε)^{1/2})^{1/2},
/// ν′₃ = kν″₃ + k²/n, ν′₄ = ν′₃ + √(2(m+1)ε),
/// ν′₅ = 2k²/n + kν″₃ + γ_m, ν′₆ = 2k²ν′₂, ν_method2 = ν′₅ + ν′₆.
#[allow(clippy::too_many_arguments)]
pub fn nu_series(
    eps: f64,
    delta: f64,
    zeta: f64,
    gamma_m: f64,
    kappa: f64,
    m: usize,
    t: usize,
    n: usize,
    k: usize,
) -> NuSeries {
    let mf = m as f64;
    let tf = t as f64;
    let nf = n as f64;
    let kf = k as f64;
    let nu1 = 8.0 * (zeta.sqrt() + ((mf + 1.0) * delta).sqrt());
    let nu2 = 4.0 * (gamma_m + nu1);
    let root = (zeta + (2.0 * (mf + 1.0) * eps).sqrt()).sqrt();
    let nu3 = tf * (tf * nu2 + root);
    let nu4 = nu3 + (2.0 * (mf + 1.0) * eps).sqrt();
    let nu5 = nu4.sqrt() + zeta.sqrt();
    let nu6 = 2.0 * tf * tf * (nu2 + 1.0 / nf);
    let nu7 = nu6 + 2.0 * (nu5 + 2.0 * nu6).powf(1.0 / tf);
    let mu = kappa + nu4 + nu7;
    let nu_p2 = 27.0 * nu2.powf(0.25);
    let nu_pp3 = kf * nu_p2 + root;
    let nu_p3 = kf * nu_pp3 + kf * kf / nf;
    let nu_p4 = nu_p3 + (2.0 * (mf + 1.0) * eps).sqrt();
    let nu_p5 = 2.0 * kf * kf / nf + kf * nu_pp3 + gamma_m;
    let nu_p6 = 2.0 * kf * kf * nu_p2;
    NuSeries {
        eps,
        delta,
        zeta,
        gamma_m,
        kappa,
        nu1,
        nu2,
        nu3,
        nu4,
        nu5,
        nu6,
        nu7,
        mu,
        nu_p2,
        nu_pp3,
        nu_p3,
        nu_p4,
        nu_p5,
        nu_p6,
        nu_method2: nu_p5 + nu_p6,
    }
}

// ---------------------------------------------------------------------------
// Extraction driver
// ---------------------------------------------------------------------------

/// Per-level record of the extraction recursion.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelRecord {
    pub m: usize,
    /// Measured goodness of the strategy at this level.
    pub eps: f64,
    pub delta: f64,
    /// `1 − E_x τ(Σ_g Ĝ^x_g)` over the improved slice measurements.
    pub kappa: f64,
    /// Average self-improvement metrics over the slices.
    pub nu_mean: f64,
    pub zeta_mean: f64,
    /// Pasted-measurement readings.
    pub pre_completion_mass: f64,
    pub consistency: f64,
    pub tuples_used: usize,
    pub sampled: bool,
    /// The analytic error chain evaluated from the measured primitives.
    pub series: NuSeries,
}

/// Full extraction report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExtractionReport {
    pub method: u8,
    pub levels: Vec<LevelRecord>,
    /// `η = 1 − E_u Σ_c τ(G_c A^u_{c(u)})` of the final measurement.
    pub eta: f64,
}

/// Extracts a global codeword measurement from a synchronous strategy.
///
/// Base case `m = 1`: the lines measurement of the unique line. Recursive
/// case: restrict on the last coordinate, recurse, self-improve each slice
/// measurement, paste (method per config), and complete.
pub fn extract_global(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
    cfg: &PastingConfig,
) -> Result<(Submeasurement<usize>, ExtractionReport), ExtractError> {
    let mut levels = Vec::new();
    let g = extract_rec(strategy, code, cfg, &mut levels)?;
    let words = enumerate_tensor_codewords(code, strategy.m)?;
    let eta = points_inconsistency(strategy, &words, &g);
    Ok((
        g,
        ExtractionReport {
            method: cfg.method,
            levels,
            eta,
        },
    ))
}

fn extract_rec(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
    cfg: &PastingConfig,
    levels: &mut Vec<LevelRecord>,
) -> Result<Submeasurement<usize>, ExtractError> {
    if strategy.m == 1 {
        // The unique axis-parallel line of [n]^1 carries the measurement;
        // base-codeword indices coincide with tensor indices at m = 1.
        return Ok(strategy.lines[0].clone());
    }
    let n = strategy.n;
    let mut improved = Vec::with_capacity(n);
    let mut nu_sum = 0.0;
    let mut zeta_sum = 0.0;
    let mut mass_sum = 0.0;
    let sub_code = code.clone();
    for x in 0..n {
        let restricted = restrict_strategy(strategy, x)?;
        let g_x = extract_rec(&restricted, &sub_code, cfg, levels)?;
        let imp = self_improve(&restricted, &sub_code, &g_x, cfg.tol)?;
        nu_sum += imp.nu;
        zeta_sum += imp.zeta_reported;
        mass_sum += imp.completeness;
        improved.push(imp.h);
    }
    let kappa = 1.0 - mass_sum / n as f64;

    let pasted = if cfg.method == 2 {
        paste_method2(strategy, code, &improved, cfg)?
    } else {
        paste_method1(strategy, code, &improved, cfg)?
    };

    let game = build_game(code, strategy.m)?;
    let goodness = goodness_synchronous(strategy, &game)?;
    let t = code.t();
    let k = cfg.effective_k(strategy.m, t);
    let gamma_m = crate::tensor::gamma(n, code.d(), strategy.m - 1);
    levels.push(LevelRecord {
        m: strategy.m,
        eps: goodness.eps,
        delta: goodness.delta,
        kappa,
        nu_mean: nu_sum / n as f64,
        zeta_mean: zeta_sum / n as f64,
        pre_completion_mass: pasted.pre_completion_mass,
        consistency: pasted.consistency,
        tuples_used: pasted.tuples_used,
        sampled: pasted.sampled,
        series: nu_series(
            goodness.eps,
            goodness.delta,
            zeta_sum / n as f64,
            gamma_m,
            kappa,
            strategy.m - 1,
            t,
            n,
            k,
        ),
    });
    Ok(pasted.h)
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// Commutator diagnostics of the points measurements.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CommutatorReport {
    /// `sqrt(E_{u,v} Σ_{a,b} ‖[A^u_a, A^v_b]‖_τ²)` over independent uniform
    /// point pairs.
    pub measured: f64,
    /// The analytic bound `√(32·m·δ)` at the measured δ.
    pub bound: f64,
    pub delta: f64,
    pub ok: bool,
}

/// Measures the average points commutator and checks it against
/// `√(32·m·δ)` with δ measured from the game.
pub fn commutator_report(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
) -> Result<CommutatorReport, ExtractError> {
    let game = build_game(code, strategy.m)?;
    let goodness = goodness_synchronous(strategy, &game)?;
    let num_points = strategy.num_points();
    let mut acc = 0.0;
    for u in 0..num_points {
        for v in 0..num_points {
            for (_, a) in strategy.points[u].iter() {
                for (_, b) in strategy.points[v].iter() {
                    acc += tau_norm(&(a * b - b * a)).powi(2);
                }
            }
        }
    }
    let measured = (acc / (num_points * num_points) as f64).sqrt();
    let bound = (32.0 * strategy.m as f64 * goodness.delta).sqrt();
    Ok(CommutatorReport {
        measured,
        bound,
        delta: goodness.delta,
        ok: measured <= bound + 1e-9,
    })
}

/// Variance diagnostics: line-local and global closeness of the evaluated
/// points measurements through `T^{1/2}`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VarianceReport {
    /// `sqrt(E_ℓ E_{u,v∈ℓ} Σ_g ‖(A^u_{g(u)} − A^v_{g(v)}) T_g^{1/2}‖_τ²)`.
    pub zeta_local: f64,
    /// Same over independent uniform `u, v`.
    pub zeta_var: f64,
    /// Analytic bounds at the measured ε, γ: `2√(2ε) + 2√γ` and `√m` times it.
    pub local_bound: f64,
    pub var_bound: f64,
    /// The expander relation `global ≤ m · local` (squared quantities).
    pub expander_ok: bool,
    pub ok: bool,
}

/// Computes both variance quantities and checks them against their bounds
/// and against the local-to-global expander relation.
pub fn variance_report(
    strategy: &SynchronousStrategy,
    code: &LinearCode,
    t_meas: &Submeasurement<usize>,
) -> Result<VarianceReport, ExtractError> {
    let words = enumerate_tensor_codewords(code, strategy.m)?;
    let game = build_game(code, strategy.m)?;
    let goodness = goodness_synchronous(strategy, &game)?;
    let n = strategy.n;
    let m = strategy.m;
    let num_points = strategy.num_points();
    let r = strategy.r;
    let gamma_m = crate::tensor::gamma(n, code.d(), m);

    let mut local_sq = 0.0;
    let mut global_sq = 0.0;
    for (gi, t_g) in t_meas.iter() {
        let t_sqrt = matrix_function(t_g, |v| v.max(0.0).sqrt())?;
        let evaluated: Vec<Op> = (0..num_points)
            .map(|u| {
                let val = words[*gi].table[u].value() as usize;
                strategy.points[u]
                    .element(&val)
                    .map(|a| a * &t_sqrt)
                    .unwrap_or_else(|| zero(r))
            })
            .collect();
        // Local: average over lines and ordered pairs on them.
        let lines = crate::tensor::enumerate_lines(n, m);
        for line in &lines {
            for i in 0..n {
                for j in 0..n {
                    let d = &evaluated[point_index(&line.point(i), n)]
                        - &evaluated[point_index(&line.point(j), n)];
                    local_sq += tau_norm(&d).powi(2) / (lines.len() * n * n) as f64;
                }
            }
        }
        // Global: independent uniform pairs, via the mean-square identity.
        let mean = evaluated
            .iter()
            .fold(zero(r), |acc, e| acc + e)
            .map(|z| z / num_points as f64);
        let e_sq: f64 = evaluated
            .iter()
            .map(|e| trace_state(&(e.adjoint() * e)).re)
            .sum::<f64>()
            / num_points as f64;
        global_sq += 2.0 * (e_sq - trace_state(&(mean.adjoint() * &mean)).re);
    }
    let zeta_local = local_sq.max(0.0).sqrt();
    let zeta_var = global_sq.max(0.0).sqrt();
    let local_bound = 2.0 * (2.0 * goodness.eps).sqrt() + 2.0 * gamma_m.sqrt();
    let var_bound = (m as f64).sqrt() * local_bound;
    Ok(VarianceReport {
        zeta_local,
        zeta_var,
        local_bound,
        var_bound,
        expander_ok: global_sq <= m as f64 * local_sq + 1e-9,
        ok: zeta_local <= local_bound + 1e-9 && zeta_var <= var_bound + 1e-9,
    })
}

// Complex helper used by tests.
#[allow(dead_code)]
fn c64(re: f64) -> Complex64 {
    Complex::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::make_reed_solomon;
    use crate::galois::FieldElement;
    use crate::opalg::{op_norm, random_projective_measurement};
    use crate::strategies::{
        corrupt_classical, embed_classical, honest_strategy, ClassicalStrategy, CorruptionModel,
    };
    use crate::tensor::{nearest_tensor_codeword, tensor_encode};
    use rand::Rng;

    fn planted(code: &LinearCode, m: usize, seed: u64) -> TensorCodeword {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = code.k().pow(m as u32);
        let coeffs: Vec<FieldElement> = (0..dim)
            .map(|_| FieldElement::new(rng.gen_range(0..code.q()), code.q()).unwrap())
            .collect();
        tensor_encode(code, m, &coeffs).unwrap()
    }

    fn corrupted_strategy(
        code: &LinearCode,
        m: usize,
        rho: f64,
        seed: u64,
    ) -> (SynchronousStrategy, TensorCodeword, ClassicalStrategy) {
        let c = planted(code, m, seed);
        let cs = ClassicalStrategy::from_table(code.n(), m, code.q(), &c.table);
        let corrupted =
            corrupt_classical(code, &cs, &CorruptionModel::point_flips(rho, seed + 1)).unwrap();
        (embed_classical(code, &corrupted).unwrap(), c, corrupted)
    }

    #[test]
    fn duality_scalar_closed_form() {
        let mut a = BTreeMap::new();
        for (i, v) in [0.2, 0.7, 0.1].into_iter().enumerate() {
            a.insert(i, Op::from_element(1, 1, c64(v)));
        }
        let sol = solve_duality(&a, 1, 1e-9).unwrap();
        assert!((sol.primal - 0.7).abs() < 1e-12);
        assert_eq!(sol.t.len(), 1);
        assert!(sol.t.element(&1).is_some(), "T concentrates on the argmax");
        assert!(sol.gap.abs() < 1e-12);
    }

    #[test]
    fn duality_single_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a0 = crate::opalg::random_contraction_psd(3, &mut rng);
        let mut a = BTreeMap::new();
        a.insert(7usize, a0.clone());
        let sol = solve_duality(&a, 3, 1e-6).unwrap();
        // W = A/r and T = {I}.
        assert!(op_norm(&(&sol.w - a0.map(|z| z / 3.0))) < 1e-5);
        assert!((sol.t.mass() - 1.0).abs() < 1e-9);
        assert!(sol.gap <= 1e-6 && sol.gap >= -1e-9);
    }

    #[test]
    fn duality_commuting_diagonal_is_elementwise_max() {
        let r = 3;
        let diag = |v: &[f64]| {
            let mut op = zero(r);
            for (i, &x) in v.iter().enumerate() {
                op[(i, i)] = c64(x);
            }
            op
        };
        let mut a = BTreeMap::new();
        a.insert(0usize, diag(&[0.9, 0.1, 0.4]));
        a.insert(1usize, diag(&[0.2, 0.8, 0.3]));
        a.insert(2usize, diag(&[0.1, 0.2, 0.6]));
        let sol = solve_duality(&a, r, 1e-7).unwrap();
        let expect = (0.9 + 0.8 + 0.6) / r as f64;
        assert!(
            (sol.primal - expect).abs() < 1e-5,
            "primal {} vs {}",
            sol.primal,
            expect
        );
        assert!(sol.gap <= 1e-7);
    }

    #[test]
    fn duality_random_noncommuting_instances_close_the_gap() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = 3;
            let mut a = BTreeMap::new();
            for i in 0..4usize {
                a.insert(i, crate::opalg::random_contraction_psd(r, &mut rng));
            }
            let sol = solve_duality(&a, r, 1e-6).unwrap();
            assert!(sol.gap <= 1e-6 && sol.gap >= -1e-9, "seed {seed}: gap {}", sol.gap);
            // Primal feasibility.
            for x in a.values() {
                let slack = min_eigenvalue(&(&sol.w - x.map(|z| z / r as f64)));
                assert!(slack > -1e-7, "seed {seed}: W not dominating ({slack})");
            }
            // Dual is a complete measurement.
            assert!((sol.t.mass() - 1.0).abs() < 1e-8);
            sol.t
                .validate(&crate::opalg::TolProfile::default(), false)
                .unwrap();
            assert!(sol.cs_residual <= 1e-5, "seed {seed}: CS residual {}", sol.cs_residual);
        }
    }

    #[test]
    fn duality_value_invariant_under_label_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = 3;
        let ops: Vec<Op> = (0..4)
            .map(|_| crate::opalg::random_contraction_psd(r, &mut rng))
            .collect();
        let a: BTreeMap<usize, Op> = ops.iter().cloned().enumerate().collect();
        let b: BTreeMap<usize, Op> = ops.iter().rev().cloned().enumerate().collect();
        let sa = solve_duality(&a, r, 1e-6).unwrap();
        let sb = solve_duality(&b, r, 1e-6).unwrap();
        assert!((sa.primal - sb.primal).abs() < 2e-6);
    }

    #[test]
    fn self_improvement_is_exact_on_honest_input() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 17);
        let s = honest_strategy(&code, &c).unwrap();
        let words = enumerate_tensor_codewords(&code, 2).unwrap();
        let target = words.iter().position(|w| *w == c).unwrap();
        let g = Submeasurement::new(1, vec![(target, identity(1))]).unwrap();
        let imp = self_improve(&s, &code, &g, 1e-9).unwrap();
        assert!(imp.nu < 1e-12);
        assert!((imp.completeness - 1.0).abs() < 1e-8);
        assert!(imp.consistency_deficit < 1e-8);
        assert!(imp.psi_deficit < 1e-8);
        assert_eq!(imp.h.len(), 1);
        assert!(imp.h.element(&target).is_some(), "H stays the planted indicator");
    }

    #[test]
    fn self_improvement_traces_the_classical_miscount() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let (s, c, corrupted) = corrupted_strategy(&code, 2, 0.04, 23);
        let words = enumerate_tensor_codewords(&code, 2).unwrap();
        let target = words.iter().position(|w| *w == c).unwrap();
        let g = Submeasurement::new(1, vec![(target, identity(1))]).unwrap();
        let imp = self_improve(&s, &code, &g, 1e-9).unwrap();
        let miscount = corrupted
            .point_values
            .iter()
            .zip(c.table.iter())
            .filter(|(a, b)| **a != b.value())
            .count() as f64
            / 25.0;
        assert!((imp.nu - miscount).abs() < 1e-10, "{} vs {miscount}", imp.nu);
        assert!(imp.h.element(&target).is_some(), "H stays the planted indicator");
        assert!((imp.consistency_deficit - miscount).abs() < 1e-10);
        assert!(imp.completeness >= 1.0 - imp.nu - imp.zeta_reported - 1e-7);
    }

    #[test]
    fn self_improvement_recovers_from_a_random_start() {
        // A uniform-random complete measurement on an honest strategy:
        // improvement concentrates where the agreement operators are large.
        let code = make_reed_solomon(3, 3, 1, None).unwrap();
        let c = planted(&code, 2, 31);
        let s = honest_strategy(&code, &c).unwrap();
        let words = enumerate_tensor_codewords(&code, 2).unwrap();
        let g_count = words.len();
        let uniform = Submeasurement::new(
            1,
            (0..g_count)
                .map(|i| (i, identity(1).map(|z| z / g_count as f64)))
                .collect(),
        )
        .unwrap();
        let imp = self_improve(&s, &code, &uniform, 1e-9).unwrap();
        let target = words.iter().position(|w| *w == c).unwrap();
        assert!(imp.h.element(&target).is_some());
        assert!(imp.consistency_deficit < 1e-8);
        assert!(imp.completeness >= 1.0 - imp.nu - imp.zeta_reported - 1e-7);
    }

    #[test]
    fn psi_dominates_evaluated_directions() {
        // ψ(X) ≥ τ(X A_h)/1 for PSD X and every h, by W ⪰ A_h/r.
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let (s, _, _) = corrupted_strategy(&code, 2, 0.08, 41);
        let words = enumerate_tensor_codewords(&code, 2).unwrap();
        let a_g = codeword_agreement_operators(&s, &words);
        let sol = solve_duality(&a_g, s.r, 1e-8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let x = crate::opalg::random_contraction_psd(s.r, &mut rng);
            let h = a_g.keys().nth(rng.gen_range(0..a_g.len())).copied().unwrap();
            let psi = (&x * &sol.w).trace().re;
            let eval = (&x * a_g.get(&h).unwrap().map(|z| z / s.r as f64)).trace().re;
            assert!(psi >= eval - 1e-7, "ψ(X) = {psi} < {eval}");
        }
    }

    #[test]
    fn restriction_of_honest_is_honest_on_the_slice() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 53);
        let s = honest_strategy(&code, &c).unwrap();
        for x in 0..5 {
            let restricted = restrict_strategy(&s, x).unwrap();
            let slice = restrict_slice(&c, x).unwrap();
            let hs = honest_strategy(&code, &slice).unwrap();
            assert_eq!(restricted.r, s.r, "dimension preserved");
            for u in 0..5 {
                let a: Vec<_> = restricted.points[u].labels().collect();
                let b: Vec<_> = hs.points[u].labels().collect();
                assert_eq!(a, b);
            }
            for l in 0..restricted.lines.len() {
                let a: Vec<_> = restricted.lines[l].labels().collect();
                let b: Vec<_> = hs.lines[l].labels().collect();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn restricted_goodness_averages_within_dimension_factor() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let (s, _, _) = corrupted_strategy(&code, 2, 0.08, 61);
        let game2 = build_game(&code, 2).unwrap();
        let g2 = goodness_synchronous(&s, &game2).unwrap();
        let game1 = build_game(&code, 1).unwrap();
        let mut eps_sum = 0.0;
        for x in 0..5 {
            let r = restrict_strategy(&s, x).unwrap();
            eps_sum += goodness_synchronous(&r, &game1).unwrap().eps;
        }
        // E_x ε_x ≤ ((m+1)/m) ε at m = 1 target: factor 2.
        assert!(
            eps_sum / 5.0 <= 2.0 * g2.eps + 1e-12,
            "E_x eps_x = {} vs 2ε = {}",
            eps_sum / 5.0,
            2.0 * g2.eps
        );
    }

    #[test]
    fn pasting_honest_slices_returns_the_honest_indicator() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 71);
        let s = honest_strategy(&code, &c).unwrap();
        let words1 = enumerate_tensor_codewords(&code, 1).unwrap();
        let words2 = enumerate_tensor_codewords(&code, 2).unwrap();
        let target = words2.iter().position(|w| *w == c).unwrap();
        let slices: Vec<Submeasurement<usize>> = (0..5)
            .map(|x| {
                let sl = restrict_slice(&c, x).unwrap();
                let idx = words1.iter().position(|w| *w == sl).unwrap();
                Submeasurement::new(1, vec![(idx, identity(1))]).unwrap()
            })
            .collect();
        let cfg = PastingConfig::default();
        let p1 = paste_method1(&s, &code, &slices, &cfg).unwrap();
        assert!((p1.pre_completion_mass - 1.0).abs() < 1e-10);
        assert!(p1.consistency < 1e-10);
        assert_eq!(p1.h.len(), 1);
        assert!(p1.h.element(&target).is_some());

        let cfg2 = PastingConfig {
            method: 2,
            k: Some(3),
            ..PastingConfig::default()
        };
        let p2 = paste_method2(&s, &code, &slices, &cfg2).unwrap();
        assert!((p2.pre_completion_mass - 1.0).abs() < 1e-10);
        assert_eq!(p2.h.len(), 1);
        assert!(p2.h.element(&target).is_some(), "methods agree on honest slices");
    }

    #[test]
    fn pasting_empty_slices_is_pure_completion() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 73);
        let s = honest_strategy(&code, &c).unwrap();
        let slices: Vec<Submeasurement<usize>> =
            (0..5).map(|_| Submeasurement::empty(1)).collect();
        let cfg = PastingConfig {
            method: 2,
            k: Some(3),
            ..PastingConfig::default()
        };
        let p2 = paste_method2(&s, &code, &slices, &cfg).unwrap();
        assert!(p2.pre_completion_mass.abs() < 1e-12, "every pattern has |w| = 0");
        assert!((p2.h.mass() - 1.0).abs() < 1e-9, "completion restores mass");
        assert!(p2.h.element(&0).is_some(), "mass sits at the first codeword");
    }

    #[test]
    fn method2_completeness_matches_the_binomial_tail() {
        // Each slice fires independently with probability 1 − κ = 3/4:
        // realized as the 2^5 deterministic firing patterns S ⊆ [5], weighted
        // (3/4)^|S| (1/4)^{5−|S|}. Pre-completion mass must equal the tail
        // F(3/4) = Σ_{i≥t} C(k,i)(3/4)^i (1/4)^{k−i} at k = 4, t = 2.
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 79);
        let s = honest_strategy(&code, &c).unwrap();
        let words1 = enumerate_tensor_codewords(&code, 1).unwrap();
        let slice_idx: Vec<usize> = (0..5)
            .map(|x| {
                let sl = restrict_slice(&c, x).unwrap();
                words1.iter().position(|w| *w == sl).unwrap()
            })
            .collect();
        let k = 4usize;
        let cfg = PastingConfig {
            method: 2,
            k: Some(k),
            ..PastingConfig::default()
        };
        let p_fire = 0.75f64;
        let mut expected_mass = 0.0;
        for pattern in 0..(1u32 << 5) {
            let weight: f64 = (0..5)
                .map(|x| {
                    if pattern >> x & 1 == 1 {
                        p_fire
                    } else {
                        1.0 - p_fire
                    }
                })
                .product();
            let slices: Vec<Submeasurement<usize>> = (0..5)
                .map(|x| {
                    if pattern >> x & 1 == 1 {
                        Submeasurement::new(1, vec![(slice_idx[x], identity(1))]).unwrap()
                    } else {
                        Submeasurement::empty(1)
                    }
                })
                .collect();
            let p = paste_method2(&s, &code, &slices, &cfg).unwrap();
            expected_mass += weight * p.pre_completion_mass;
        }
        let tail = crate::spectral::binomial_tail(k as u64, code.t() as u64, p_fire);
        assert!(
            (expected_mass - tail).abs() < 1e-6,
            "mass {expected_mass} vs F(3/4) = {tail}"
        );
    }

    #[test]
    fn extraction_on_honest_strategy_is_exact() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 83);
        let s = honest_strategy(&code, &c).unwrap();
        let (g, report) = extract_global(&s, &code, &PastingConfig::default()).unwrap();
        assert!(report.eta <= 1e-8, "η = {}", report.eta);
        let words = enumerate_tensor_codewords(&code, 2).unwrap();
        let target = words.iter().position(|w| *w == c).unwrap();
        assert!(g.element(&target).is_some());
        for rec in &report.levels {
            assert!(rec.series.nu1.is_finite() && rec.series.nu_method2.is_finite());
        }
    }

    #[test]
    fn extraction_decodes_to_the_nearest_codeword() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let mut last_eta = -1.0;
        for (i, rho) in [0.0, 0.01, 0.02, 0.03, 0.04, 0.05].into_iter().enumerate() {
            let (s, c, corrupted) = corrupted_strategy(&code, 2, rho, 101 + i as u64);
            let table: Vec<FieldElement> = corrupted
                .point_values
                .iter()
                .map(|&v| FieldElement::new(v, 5).unwrap())
                .collect();
            let (nearest, dist) = nearest_tensor_codeword(&code, 2, &table).unwrap();
            assert!(dist <= 2, "ρ ≤ 0.05 flips at most 2 of 25 points");
            assert_eq!(nearest, c, "nearest codeword is the planted one");
            let (g, report) = extract_global(&s, &code, &PastingConfig::default()).unwrap();
            let words = enumerate_tensor_codewords(&code, 2).unwrap();
            let target = words.iter().position(|w| *w == c).unwrap();
            // Concentration: the planted outcome carries the dominant mass.
            let planted_mass = g
                .element(&target)
                .map(|e| trace_state(e).re)
                .unwrap_or(0.0);
            assert!(
                planted_mass > 0.5,
                "rho={rho}: planted mass {planted_mass}"
            );
            assert!(
                report.eta >= last_eta - 1e-9,
                "η not nondecreasing at rho={rho}: {} < {last_eta}",
                report.eta
            );
            last_eta = report.eta;
        }
    }

    #[test]
    fn method1_and_method2_agree_in_extraction_on_classical_inputs() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let (s, _, _) = corrupted_strategy(&code, 2, 0.04, 131);
        let (g1, _) = extract_global(&s, &code, &PastingConfig::default()).unwrap();
        let cfg2 = PastingConfig {
            method: 2,
            k: Some(3),
            ..PastingConfig::default()
        };
        let (g2, _) = extract_global(&s, &code, &cfg2).unwrap();
        let labels1: Vec<usize> = g1.labels().copied().collect();
        let labels2: Vec<usize> = g2.labels().copied().collect();
        assert_eq!(labels1, labels2);
        for l in g1.labels() {
            let d = g1.element(l).unwrap() - g2.element(l).unwrap();
            assert!(op_norm(&d) < 1e-9);
        }
    }

    #[test]
    fn commutators_vanish_for_honest_and_bound_holds_for_random() {
        let code = make_reed_solomon(3, 3, 1, None).unwrap();
        let c = planted(&code, 2, 139);
        let s = honest_strategy(&code, &c).unwrap();
        let rep = commutator_report(&s, &code).unwrap();
        assert!(rep.measured < 1e-12 && rep.ok);

        // Random projective strategies satisfy the bound with measured δ.
        for seed in 0..5u64 {
            let s = random_synchronous(&code, 2, 4, seed);
            let rep = commutator_report(&s, &code).unwrap();
            assert!(
                rep.ok,
                "seed {seed}: commutator {} > bound {}",
                rep.measured, rep.bound
            );
        }
    }

    #[test]
    fn anticommuting_exhibit_has_maximal_commutator_and_large_delta() {
        let (s, code) = crate::strategies::anticommuting_pair_strategy().unwrap();
        let rep = commutator_report(&s, &code).unwrap();
        assert!(rep.measured > 0.1, "commutator is substantial: {}", rep.measured);
        assert!(rep.delta > 0.001, "measured δ is correspondingly large");
        assert!(rep.ok, "the bound direction still holds: {} ≤ {}", rep.measured, rep.bound);
    }

    #[test]
    fn variance_vanishes_for_honest_and_bounds_hold_when_corrupted() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let c = planted(&code, 2, 149);
        let s = honest_strategy(&code, &c).unwrap();
        let words = enumerate_tensor_codewords(&code, 2).unwrap();
        let target = words.iter().position(|w| *w == c).unwrap();
        let t_honest = Submeasurement::new(1, vec![(target, identity(1))]).unwrap();
        let rep = variance_report(&s, &code, &t_honest).unwrap();
        assert!(rep.zeta_local < 1e-12 && rep.zeta_var < 1e-12 && rep.ok && rep.expander_ok);

        let (s, _, _) = corrupted_strategy(&code, 2, 0.08, 151);
        let a_g = codeword_agreement_operators(&s, &words);
        let sol = solve_duality(&a_g, s.r, 1e-8).unwrap();
        let rep = variance_report(&s, &code, &sol.t).unwrap();
        assert!(rep.ok, "ζ_local {} ≤ {} and ζ_var {} ≤ {}", rep.zeta_local, rep.local_bound, rep.zeta_var, rep.var_bound);
        assert!(rep.expander_ok);
    }

    /// A seeded random projective strategy (independent families; useful for
    /// property runs, not a good game strategy).
    fn random_synchronous(
        code: &LinearCode,
        m: usize,
        r: usize,
        seed: u64,
    ) -> SynchronousStrategy {
        let n = code.n();
        let num_points = n.pow(m as u32);
        let q = code.q() as usize;
        let points: Vec<Submeasurement<usize>> = (0..num_points)
            .map(|u| random_projective_measurement(r, q.min(r), seed * 1000 + u as u64).unwrap())
            .collect();
        let word_count = code.size() as usize;
        let lines: Vec<Submeasurement<usize>> = crate::tensor::enumerate_lines(n, m)
            .iter()
            .enumerate()
            .map(|(l, _)| {
                random_projective_measurement(r, word_count.min(r), seed * 2000 + l as u64)
                    .unwrap()
            })
            .collect();
        let pairs: Vec<Submeasurement<(usize, usize)>> = (0..num_points * num_points)
            .map(|i| {
                let p =
                    random_projective_measurement(r, (q * q).min(r), seed * 3000 + i as u64)
                        .unwrap();
                Submeasurement::new(
                    r,
                    p.iter().map(|(l, e)| ((*l % q, *l / q), e.clone())).collect(),
                )
                .unwrap()
            })
            .collect();
        SynchronousStrategy {
            r,
            n,
            m,
            points,
            lines,
            pairs,
        }
    }
}
