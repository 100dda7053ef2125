//! Spectral machinery for the axis-parallel line graph on `[n]^m`, the
//! local-to-global variance inequality, and binomial-tail / operator
//! Chernoff utilities.
//!
//! The axis graph connects `u, v ∈ [n]^m` iff they differ in at most one
//! coordinate. Its edge distribution samples a uniform axis `j`, a uniform
//! axis-`j` line, and an independent uniform ordered pair on the line, so
//!
//! ```text
//!   K = E_{(u,v)} |u⟩⟨v| = (1/m) Σ_j (1/n^{m+1}) J_j ⊗ I_rest,
//!   L = (1/N)·I − K,            N = n^m.
//! ```
//!
//! `K` diagonalizes in the per-axis (uniform ⊕ mean-zero) decomposition:
//! an eigenvector uniform along `s` of the `m` axes has `K`-eigenvalue
//! `s/(mN)`, so the Laplacian spectrum is exactly
//! `{(1/N)(1 − s/m) : s = 0..m}` with multiplicity `C(m,s)(n−1)^{m−s}`.
//! The smallest eigenvalue is 0 (uniform vector) and the second smallest is
//! `λ₂ = 1/(mN)`. Note the eigenvalue ordering convention: λ₂ is the second
//! *smallest* Laplacian eigenvalue, the spectral-gap reading consistent
//! with `L ⪰ λ₂ (1 − |φ₀⟩⟨φ₀|)`.

use crate::opalg::Op;
use crate::tensor::{enumerate_lines, point_index};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("axis graph on {0} vertices exceeds the budget {1}")]
    BudgetExceeded(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

const AXIS_GRAPH_BUDGET: usize = 2000;

/// The axis-parallel line graph on `[n]^m` with its Laplacian spectrum.
#[derive(Debug, Clone)]
pub struct AxisGraph {
    pub n: usize,
    pub m: usize,
    /// `N = n^m`.
    pub size: usize,
    /// Edge-average matrix `K`.
    pub k: DMatrix<f64>,
    /// Laplacian `L = (1/N)I − K`.
    pub laplacian: DMatrix<f64>,
    /// Laplacian eigenvalues, ascending.
    pub spectrum: Vec<f64>,
}

impl AxisGraph {
    /// Second smallest Laplacian eigenvalue, equal to `1/(mN)`.
    pub fn lambda2(&self) -> f64 {
        self.spectrum[1]
    }

    /// The closed-form spectrum `(1/N)(1 − s/m)` with multiplicity
    /// `C(m,s)(n−1)^{m−s}`, ascending (s = m first).
    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size);
        for s in (0..=self.m).rev() {
            let eig = (1.0 - s as f64 / self.m as f64) / self.size as f64;
            let mult = binomial(self.m as u64, s as u64) as usize
                * (self.n - 1).pow((self.m - s) as u32);
            out.extend(std::iter::repeat(eig).take(mult));
        }
        out
    }
}

/// Builds the axis graph and diagonalizes its Laplacian.
pub fn axis_graph(n: usize, m: usize) -> Result<AxisGraph, SpectralError> {
    if n < 2 || m < 1 {
        return Err(SpectralError::InvalidParameter(format!("n={n}, m={m}")));
    }
    let size = n
        .checked_pow(m as u32)
        .filter(|&s| s <= AXIS_GRAPH_BUDGET)
        .ok_or(SpectralError::BudgetExceeded(usize::MAX, AXIS_GRAPH_BUDGET))?;

    let mut k = DMatrix::<f64>::zeros(size, size);
    let edge_w = 1.0 / (enumerate_lines(n, m).len() * n * n) as f64;
    for line in enumerate_lines(n, m) {
        for i in 0..n {
            let u = point_index(&line.point(i), n);
            for j in 0..n {
                let v = point_index(&line.point(j), n);
                k[(u, v)] += edge_w;
            }
        }
    }
    let mut laplacian = -k.clone();
    for i in 0..size {
        laplacian[(i, i)] += 1.0 / size as f64;
    }
    let mut spectrum: Vec<f64> = laplacian
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    spectrum.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(AxisGraph {
        n,
        m,
        size,
        k,
        laplacian,
        spectrum,
    })
}

/// Result of the local-to-global variance comparison.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LocalToGlobal {
    /// `E_{u,v uniform} ρ((A^u − A^v)†(A^u − A^v))`.
    pub global: f64,
    /// Same expectation over the axis-graph edge distribution.
    pub local: f64,
    /// `1/(N λ₂) = m`: the expansion factor relating the two.
    pub factor: f64,
    pub bound_ok: bool,
}

/// Checks `global ≤ local / (N λ₂)` for a family of operators `A^u` (one per
/// point of `[n]^m`, canonical order) and a positive functional
/// `ρ(X) = tr(X W)` given by its PSD representer `w`.
pub fn local_to_global_check(ops: &[Op], w: &Op, n: usize, m: usize) -> LocalToGlobal {
    let size = n.pow(m as u32);
    assert_eq!(ops.len(), size, "one operator per point of [n]^m");
    let rho = |x: &Op| (x * w).trace().re;
    let quad = |a: &Op, b: &Op| {
        let d = a - b;
        rho(&(d.adjoint() * d))
    };

    // global = 2[E ρ(A†A) − ρ(Ā†Ā)] by expanding the square.
    let mean = ops.iter().fold(Op::zeros(w.nrows(), w.ncols()), |acc, a| acc + a)
        / nalgebra::Complex::new(size as f64, 0.0);
    let e_sq: f64 = ops.iter().map(|a| rho(&(a.adjoint() * a))).sum::<f64>() / size as f64;
    let global = 2.0 * (e_sq - rho(&(mean.adjoint() * &mean)));

    let lines = enumerate_lines(n, m);
    let mut local = 0.0;
    for line in &lines {
        for i in 0..n {
            for j in 0..n {
                local += quad(
                    &ops[point_index(&line.point(i), n)],
                    &ops[point_index(&line.point(j), n)],
                );
            }
        }
    }
    local /= (lines.len() * n * n) as f64;

    let lambda2 = 1.0 / (m * size) as f64;
    let factor = 1.0 / (size as f64 * lambda2);
    LocalToGlobal {
        global,
        local,
        factor,
        bound_ok: global <= local * factor + 1e-9,
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `F(x) = Σ_{r=t}^k C(k,r) x^r (1−x)^{k−r}`: the probability that a
/// Binomial(k, x) variable reaches `t`. Exact termwise evaluation.
pub fn binomial_tail(k: u64, t: u64, x: f64) -> f64 {
    assert!(t <= k, "need t <= k");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0,1]");
    (t..=k)
        .map(|r| binomial(k, r) as f64 * x.powi(r as i32) * (1.0 - x).powi((k - r) as i32))
        .sum()
}

/// Result of the operator Chernoff comparison.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ChernoffCheck {
    /// `τ(F(G))` via the spectral calculus.
    pub lhs: f64,
    /// `1 − κ/(1−θ) − e^{−θ²k/2}` with `κ = 1 − τ(G)`.
    pub rhs: f64,
    pub kappa: f64,
    /// Whether the hypothesis `k ≥ 2t/θ` of the bound holds. When it does
    /// not, both sides are still computed and compared — the comparison is
    /// then diagnostic, not a theorem instance.
    pub precondition_ok: bool,
    pub ok: bool,
}

/// Checks `τ(F(G)) ≥ 1 − κ/(1−θ) − e^{−θ²k/2}` for `0 ⪯ G ⪯ I`.
pub fn chernoff_operator_check(g: &Op, k: u64, t: u64, theta: f64) -> ChernoffCheck {
    assert!(theta > 0.0 && theta < 1.0);
    let r = g.nrows();
    let kappa = 1.0 - crate::opalg::trace_state(g).re;
    let f_of_g = crate::opalg::matrix_function(g, |x| binomial_tail(k, t, x.clamp(0.0, 1.0)))
        .expect("G must be Hermitian");
    let lhs = (f_of_g.trace().re) / r as f64;
    let rhs = 1.0 - kappa / (1.0 - theta) - (-theta * theta * k as f64 / 2.0).exp();
    ChernoffCheck {
        lhs,
        rhs,
        kappa,
        precondition_ok: k as f64 >= 2.0 * t as f64 / theta,
        ok: lhs >= rhs - 1e-9,
    }
}

/// Exact total-variation distance between a uniform tuple in `[n]^k` and a
/// uniform *distinct* tuple, by enumeration. Equals
/// `1 − n!/(n−k)!/n^k` (the distinct tuples carry the excess mass).
pub fn tv_uniform_vs_distinct(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    let total = (n as f64).powi(k as i32);
    let distinct: f64 = (0..k).map(|i| (n - i) as f64).product();
    // Enumerate to keep this an independent check rather than the formula.
    let mut mass_gap = 0.0;
    let mut tuple = vec![0usize; k];
    loop {
        let is_distinct = (1..k).all(|i| !tuple[..i].contains(&tuple[i]));
        let p_uniform = 1.0 / total;
        let p_distinct = if is_distinct { 1.0 / distinct } else { 0.0 };
        mass_gap += (p_uniform - p_distinct).abs();
        // Odometer increment.
        let mut pos = k;
        loop {
            if pos == 0 {
                return mass_gap / 2.0;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// All `k`-tuples of pairwise-distinct elements of `[n]`, lexicographic.
pub fn distinct_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut tuple = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, tuple: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if tuple.len() == k {
            out.push(tuple.clone());
            return;
        }
        for v in 0..n {
            if !tuple.contains(&v) {
                tuple.push(v);
                rec(n, k, tuple, out);
                tuple.pop();
            }
        }
    }
    rec(n, k, &mut tuple, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{identity, random_contraction_psd, random_hermitian, trace_state};
    use rand::SeedableRng;
    use nalgebra::Complex;

    #[test]
    fn spectrum_matches_closed_form() {
        for (n, m) in [(3usize, 1usize), (3, 2), (4, 2), (3, 3), (5, 2)] {
            let g = axis_graph(n, m).unwrap();
            let closed = g.closed_form_spectrum();
            assert_eq!(closed.len(), g.spectrum.len());
            for (a, b) in g.spectrum.iter().zip(&closed) {
                assert!((a - b).abs() < 1e-9, "(n={n}, m={m}): {a} vs {b}");
            }
            assert!(g.spectrum[0].abs() < 1e-12, "λ₁ = 0");
            let expect = 1.0 / (m * g.size) as f64;
            assert!((g.lambda2() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_vector_is_in_the_kernel() {
        let g = axis_graph(3, 2).unwrap();
        let uni = nalgebra::DVector::<f64>::from_element(g.size, 1.0 / (g.size as f64).sqrt());
        let img = &g.laplacian * &uni;
        assert!(img.amax() < 1e-12);
    }

    #[test]
    fn local_to_global_trivial_and_random() {
        let (n, m, r) = (3usize, 2usize, 3usize);
        let size = n.pow(m as u32);
        // Constant family: both sides zero.
        let ops: Vec<Op> = (0..size).map(|_| identity(r)).collect();
        let w = identity(r);
        let res = local_to_global_check(&ops, &w, n, m);
        assert!(res.global.abs() < 1e-12 && res.local.abs() < 1e-12 && res.bound_ok);
        assert!((res.factor - m as f64).abs() < 1e-12);
        // Random Hermitian families: the inequality holds on every seed.
        for seed in 0..50u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ops: Vec<Op> = (0..size).map(|_| random_hermitian(r, &mut rng)).collect();
            let w = random_contraction_psd(r, &mut rng);
            let res = local_to_global_check(&ops, &w, n, m);
            assert!(
                res.bound_ok,
                "seed {seed}: global {} > m·local {}",
                res.global,
                res.factor * res.local
            );
        }
    }

    #[test]
    fn binomial_tail_values_and_monotonicity() {
        assert!((binomial_tail(4, 0, 0.3) - 1.0).abs() < 1e-12);
        assert!((binomial_tail(5, 3, 1.0) - 1.0).abs() < 1e-12);
        // Brute force over the 16 outcomes of 4 fair coins: 11 have ≥ 2 heads.
        assert!((binomial_tail(4, 2, 0.5) - 11.0 / 16.0).abs() < 1e-12);
        for (k, t) in [(4u64, 2u64), (7, 3), (20, 2)] {
            let mut last = -1.0;
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                let v = binomial_tail(k, t, x);
                assert!(v >= last - 1e-12, "tail not monotone at x={x}");
                last = v;
            }
        }
    }

    #[test]
    fn chernoff_identity_and_scalar_cases() {
        let r = 4;
        let check = chernoff_operator_check(&identity(r), 24, 2, 1.0 / 6.0);
        assert!(check.precondition_ok);
        assert!((check.lhs - 1.0).abs() < 1e-12 && check.ok);
        // Commuting scalar-like case: G = (1−κ)I has τ(F(G)) = F(1−κ).
        for kappa in [0.0, 0.1, 0.3] {
            let g = identity(r).map(|z| z * Complex::new(1.0 - kappa, 0.0));
            let check = chernoff_operator_check(&g, 24, 2, 1.0 / 6.0);
            assert!((check.lhs - binomial_tail(24, 2, 1.0 - kappa)).abs() < 1e-9);
            assert!(check.ok, "kappa={kappa}: {} < {}", check.lhs, check.rhs);
            assert!((check.kappa - kappa).abs() < 1e-12);
        }
    }

    #[test]
    fn chernoff_holds_on_random_contractions() {
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_contraction_psd(4, &mut rng);
            let check = chernoff_operator_check(&g, 20, 2, 1.0 / 6.0);
            assert!(
                check.ok,
                "seed {seed}: τ(F(G)) = {} < rhs = {} (κ = {})",
                check.lhs,
                check.rhs,
                check.kappa
            );
            let _ = trace_state(&g);
        }
    }

    #[test]
    fn tv_distance_enumeration_respects_bounds() {
        for n in 2..=6usize {
            for k in 1..=3usize.min(n) {
                let tv = tv_uniform_vs_distinct(n, k);
                let formula = 1.0 - (0..k).map(|i| (n - i) as f64).product::<f64>()
                    / (n as f64).powi(k as i32);
                assert!((tv - formula).abs() < 1e-12);
                assert!(tv <= (k * k) as f64 / n as f64 + 1e-12, "k²/n bound");
                assert!(
                    tv <= (k * (k - 1)) as f64 / (2.0 * n as f64) + 1e-12,
                    "k(k−1)/(2n) bound"
                );
            }
        }
    }

    #[test]
    fn distinct_tuple_counts() {
        assert_eq!(distinct_tuples(5, 2).len(), 20);
        assert_eq!(distinct_tuples(4, 3).len(), 24);
        assert_eq!(distinct_tuples(3, 3).len(), 6);
    }
}
