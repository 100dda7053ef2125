//! Dense complex operator algebra at dimension `r`: the normalized trace,
//! τ-norms, (sub)measurement types, consistency/closeness metrics, data
//! processing, projective rounding, and matrix functions.
//!
//! The ambient algebra is `B(C^r)` with the normalized trace
//! `τ(X) = tr(X)/r`. The two metrics used throughout are
//!
//! * inconsistency: `E_x Σ_{a≠b} τ(M^x_a N^x_b)` — expected cross-mass on
//!   differing outcomes, and
//! * closeness: `sqrt(E_x Σ_a ‖M^x_a − N^x_a‖_τ²)` — root-mean-square τ-norm
//!   distance,
//!
//! where `‖A‖_τ = sqrt(τ(A*A))`.
//!
//! Everything is double precision; tolerances live in [`TolProfile`] so the
//! whole crate shares one tolerance policy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// A dense complex operator on `C^r`.
pub type Op = DMatrix<Complex64>;

/// Products whose running norm falls below this threshold are treated as
/// zero operators and pruned from exponential enumerations.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Shared numerical tolerance profile.
#[derive(Debug, Clone, Copy)]
pub struct TolProfile {
    /// Minimum-eigenvalue slack for positivity checks.
    pub psd: f64,
    /// Slack for `Σ_a E_a ⪯ I` and completeness checks.
    pub completeness: f64,
    /// `‖E² − E‖_op` slack for projectivity.
    pub idempotence: f64,
    /// `‖E_a E_b‖_op` slack for pairwise orthogonality.
    pub pairwise: f64,
}

impl Default for TolProfile {
    fn default() -> Self {
        Self {
            psd: 1e-9,
            completeness: 1e-9,
            idempotence: 1e-8,
            pairwise: 1e-8,
        }
    }
}

#[derive(Debug, Error)]
pub enum OpError {
    #[error("operator is not Hermitian (‖X − X*‖ = {0:.3e})")]
    NotHermitian(f64),
    #[error("element {label} fails positivity (min eigenvalue {min_eig:.3e})")]
    NotPositive { label: String, min_eig: f64 },
    #[error("elements sum beyond the identity (max eigenvalue of Σ−I is {0:.3e})")]
    Oversized(f64),
    #[error("element {label} is not idempotent (‖E²−E‖ = {dev:.3e})")]
    NotIdempotent { label: String, dev: f64 },
    #[error("elements {a} and {b} are not orthogonal (‖E_a E_b‖ = {dev:.3e})")]
    NotOrthogonal { a: String, b: String, dev: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("projective measurements need outcomes <= r ({outcomes} > {r})")]
    TooManyOutcomes { outcomes: usize, r: usize },
    #[error("rounding bound violated: distance {distance:.6e} > sqrt(18 ζ) = {bound:.6e}")]
    RoundingBoundViolated { distance: f64, bound: f64 },
}

/// `τ(X) = tr(X)/r`, the normalized trace.
pub fn trace_state(x: &Op) -> Complex64 {
    let r = x.nrows();
    x.trace() / Complex64::new(r as f64, 0.0)
}

/// `‖X‖_τ = sqrt(τ(X*X))`.
pub fn tau_norm(x: &Op) -> f64 {
    let r = x.nrows() as f64;
    (x.iter().map(|v| v.norm_sqr()).sum::<f64>() / r).sqrt()
}

/// `τ(|X|)`: the normalized sum of singular values.
pub fn one_norm(x: &Op) -> f64 {
    let r = x.nrows() as f64;
    x.clone().svd(false, false).singular_values.iter().sum::<f64>() / r
}

/// Operator (spectral) norm: the largest singular value.
pub fn op_norm(x: &Op) -> f64 {
    x.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Conjugate transpose.
pub fn dagger(x: &Op) -> Op {
    x.adjoint()
}

/// `‖X − X*‖_op`, a Hermiticity defect.
pub fn hermiticity_defect(x: &Op) -> f64 {
    op_norm(&(x - x.adjoint()))
}

/// Identity at dimension `r`.
pub fn identity(r: usize) -> Op {
    Op::identity(r, r)
}

/// Zero operator at dimension `r`.
pub fn zero(r: usize) -> Op {
    Op::zeros(r, r)
}

/// Eigendecomposition of a Hermitian operator: `(eigenvalues, unitary)` with
/// ascending eigenvalues. Fails when the input is visibly non-Hermitian.
pub fn hermitian_eigen(h: &Op) -> Result<(Vec<f64>, Op), OpError> {
    let defect = hermiticity_defect(h);
    if defect > 1e-9 * (1.0 + op_norm(h)) {
        return Err(OpError::NotHermitian(defect));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    // Sort ascending for determinism.
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let r = h.nrows();
    let mut vectors = Op::zeros(r, r);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Applies a scalar function to a Hermitian operator through its
/// eigendecomposition; the result is Hermitian.
pub fn matrix_function(h: &Op, f: impl Fn(f64) -> f64) -> Result<Op, OpError> {
    let (values, vectors) = hermitian_eigen(h)?;
    let r = h.nrows();
    let diag = DVector::from_iterator(r, values.iter().map(|&v| Complex64::new(f(v), 0.0)));
    let scaled = &vectors * Op::from_diagonal(&diag);
    Ok(scaled * vectors.adjoint())
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(h: &Op) -> f64 {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a Hermitian operator.
pub fn max_eigenvalue(h: &Op) -> f64 {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// An outcome-labelled collection of positive operators with `Σ_a E_a ⪯ I`.
/// Absent labels denote zero operators, so sparse indicator families stay
/// sparse. Labels are kept sorted for deterministic iteration.
#[derive(Debug, Clone)]
pub struct Submeasurement<L: Ord + Clone> {
    r: usize,
    elements: BTreeMap<L, Op>,
}

impl<L: Ord + Clone + std::fmt::Debug> Submeasurement<L> {
    /// Builds a submeasurement from labelled elements; zero operators
    /// (τ-norm below the pruning threshold) are dropped.
    pub fn new(r: usize, elements: Vec<(L, Op)>) -> Result<Self, OpError> {
        let mut map = BTreeMap::new();
        for (label, op) in elements {
            if op.nrows() != r || op.ncols() != r {
                return Err(OpError::DimensionMismatch(format!(
                    "element {label:?} is {}x{}, expected {r}x{r}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            if tau_norm(&op) <= PRUNE_THRESHOLD {
                continue;
            }
            map.insert(label, op);
        }
        Ok(Self { r, elements: map })
    }

    /// The all-zero submeasurement.
    pub fn empty(r: usize) -> Self {
        Self {
            r,
            elements: BTreeMap::new(),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The element at `label`, or `None` for (implicit) zero.
    pub fn element(&self, label: &L) -> Option<&Op> {
        self.elements.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, &Op)> {
        self.elements.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = &L> {
        self.elements.keys()
    }

    /// `Σ_a E_a`.
    pub fn total(&self) -> Op {
        let mut sum = zero(self.r);
        for op in self.elements.values() {
            sum += op;
        }
        sum
    }

    /// `τ(Σ_a E_a)`, the completeness (real part).
    pub fn mass(&self) -> f64 {
        trace_state(&self.total()).re
    }

    /// `Σ_a τ(E_a − E_a²)`: the projectivity deficit ζ.
    pub fn projectivity_deficit(&self) -> f64 {
        self.elements
            .values()
            .map(|e| trace_state(&(e - e * e)).re)
            .sum()
    }

    /// Validates positivity and `Σ ⪯ I`; with `projective`, additionally
    /// idempotence and pairwise orthogonality.
    pub fn validate(&self, tol: &TolProfile, projective: bool) -> Result<(), OpError> {
        for (label, e) in &self.elements {
            let defect = hermiticity_defect(e);
            if defect > tol.psd.max(1e-9) * 10.0 {
                return Err(OpError::NotHermitian(defect));
            }
            let min_eig = min_eigenvalue(e);
            if min_eig < -tol.psd {
                return Err(OpError::NotPositive {
                    label: format!("{label:?}"),
                    min_eig,
                });
            }
        }
        let excess = max_eigenvalue(&(self.total() - identity(self.r)));
        if excess > tol.completeness {
            return Err(OpError::Oversized(excess));
        }
        if projective {
            for (label, e) in &self.elements {
                let dev = op_norm(&(e * e - e));
                if dev > tol.idempotence {
                    return Err(OpError::NotIdempotent {
                        label: format!("{label:?}"),
                        dev,
                    });
                }
            }
            let items: Vec<(&L, &Op)> = self.elements.iter().collect();
            for i in 0..items.len() {
                for j in i + 1..items.len() {
                    let dev = op_norm(&(items[i].1 * items[j].1));
                    if dev > tol.pairwise {
                        return Err(OpError::NotOrthogonal {
                            a: format!("{:?}", items[i].0),
                            b: format!("{:?}", items[j].0),
                            dev,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Deficit from completeness, `I − Σ_a E_a`.
    pub fn incomplete_part(&self) -> Op {
        identity(self.r) - self.total()
    }

    /// Coarse-grains outcomes through `f`: `M_{[f|b]} = Σ_{a : f(a)=b} M_a`.
    /// Totals are preserved exactly.
    pub fn data_process<M: Ord + Clone + std::fmt::Debug>(
        &self,
        f: impl Fn(&L) -> M,
    ) -> Submeasurement<M> {
        let mut map: BTreeMap<M, Op> = BTreeMap::new();
        for (label, op) in &self.elements {
            map.entry(f(label))
                .and_modify(|acc| *acc += op)
                .or_insert_with(|| op.clone());
        }
        Submeasurement {
            r: self.r,
            elements: map,
        }
    }
}

/// A finite question set with weights and one submeasurement per question.
/// Weights must be nonnegative and sum to 1 (within 1e−12) to describe a
/// question distribution.
#[derive(Debug, Clone)]
pub struct MeasurementFamily<L: Ord + Clone> {
    pub weights: Vec<f64>,
    pub parts: Vec<Submeasurement<L>>,
}

impl<L: Ord + Clone + std::fmt::Debug> MeasurementFamily<L> {
    pub fn new(weights: Vec<f64>, parts: Vec<Submeasurement<L>>) -> Result<Self, OpError> {
        if weights.len() != parts.len() {
            return Err(OpError::DimensionMismatch(format!(
                "{} weights vs {} parts",
                weights.len(),
                parts.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || weights.iter().any(|&w| w < 0.0) {
            return Err(OpError::DimensionMismatch(format!(
                "weights must be a distribution (sum = {total})"
            )));
        }
        Ok(Self { weights, parts })
    }
}

/// Inconsistency `E_x Σ_{a≠b} τ(M^x_a N^x_b)` between two families sharing a
/// question distribution. Computed as
/// `τ(M_tot N_tot) − Σ_a τ(M_a N_a)` per question.
pub fn consistency<L: Ord + Clone + std::fmt::Debug>(
    m: &MeasurementFamily<L>,
    n: &MeasurementFamily<L>,
) -> f64 {
    assert_eq!(m.parts.len(), n.parts.len(), "question sets must match");
    let mut total = 0.0;
    for ((w, mp), np) in m.weights.iter().zip(&m.parts).zip(&n.parts) {
        total += w * pair_inconsistency(mp, np);
    }
    total
}

/// Single-question inconsistency `Σ_{a≠b} τ(M_a N_b)`.
pub fn pair_inconsistency<L: Ord + Clone + std::fmt::Debug>(
    m: &Submeasurement<L>,
    n: &Submeasurement<L>,
) -> f64 {
    let cross = trace_state(&(m.total() * n.total())).re;
    let diag: f64 = m
        .iter()
        .filter_map(|(label, a)| n.element(label).map(|b| trace_state(&(a * b)).re))
        .sum();
    cross - diag
}

/// Closeness `sqrt(E_x Σ_a ‖M^x_a − N^x_a‖_τ²)` between two families.
pub fn closeness<L: Ord + Clone + std::fmt::Debug>(
    m: &MeasurementFamily<L>,
    n: &MeasurementFamily<L>,
) -> f64 {
    assert_eq!(m.parts.len(), n.parts.len(), "question sets must match");
    let mut total = 0.0;
    for ((w, mp), np) in m.weights.iter().zip(&m.parts).zip(&n.parts) {
        total += w * pair_closeness_sq(mp, np);
    }
    total.max(0.0).sqrt()
}

/// Single-question squared closeness `Σ_a ‖M_a − N_a‖_τ²` over the label
/// union (absent labels are zero operators).
pub fn pair_closeness_sq<L: Ord + Clone + std::fmt::Debug>(
    m: &Submeasurement<L>,
    n: &Submeasurement<L>,
) -> f64 {
    let mut total = 0.0;
    for (label, a) in m.iter() {
        match n.element(label) {
            Some(b) => total += tau_norm(&(a - b)).powi(2),
            None => total += tau_norm(a).powi(2),
        }
    }
    for (label, b) in n.iter() {
        if m.element(label).is_none() {
            total += tau_norm(b).powi(2);
        }
    }
    total
}

/// Report accompanying a projective rounding.
#[derive(Debug, Clone)]
pub struct OrthoReport {
    /// ζ = Σ_a τ(A_a − A_a²) of the input.
    pub zeta: f64,
    /// `sqrt(Σ_a ‖A_a − P_a‖_τ²)` between input and output.
    pub distance: f64,
    /// The guaranteed bound `sqrt(18 ζ)`.
    pub bound: f64,
}

/// Rounds a submeasurement to a projective submeasurement on the same labels
/// by greedy spectral rounding, and *checks* the distance against the
/// `sqrt(18 ζ)` bound (with ζ the projectivity deficit of the input).
///
/// Algorithm: process outcomes in decreasing order of τ(A_a); at each step
/// compress the element to the still-unassigned subspace (`Q A_a Q` with `Q`
/// the complement of previously assigned projectors) and keep the eigenspace
/// with eigenvalues ≥ 1/2. The bound is asserted at runtime rather than
/// assumed; a violation is surfaced as an error, never silently accepted.
pub fn orthogonalize<L: Ord + Clone + std::fmt::Debug>(
    a: &Submeasurement<L>,
) -> Result<(Submeasurement<L>, OrthoReport), OpError> {
    let r = a.r();
    let zeta = a.projectivity_deficit().max(0.0);
    // Order labels by decreasing mass, ties by label order for determinism.
    let mut order: Vec<(&L, f64)> = a
        .iter()
        .map(|(l, e)| (l, trace_state(e).re))
        .collect();
    order.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());

    let mut q = identity(r);
    let mut rounded: Vec<(L, Op)> = Vec::new();
    let mut dist_sq = 0.0;
    for (label, _) in order {
        let elem = a.element(label).expect("label from iteration");
        let compressed = &q * elem * &q;
        let (values, vectors) = hermitian_eigen(&compressed)?;
        let mut p = zero(r);
        for (i, &v) in values.iter().enumerate() {
            if v >= 0.5 {
                let col = vectors.column(i);
                p += &col * col.adjoint();
            }
        }
        q -= &p;
        dist_sq += tau_norm(&(elem - &p)).powi(2);
        rounded.push((label.clone(), p));
    }
    let distance = dist_sq.sqrt();
    let bound = (18.0 * zeta).sqrt();
    let report = OrthoReport { zeta, distance, bound };
    if distance > bound + 1e-9 {
        return Err(OpError::RoundingBoundViolated { distance, bound });
    }
    Ok((Submeasurement::new(r, rounded)?, report))
}

/// A Haar-ish random unitary: QR of a seeded complex Gaussian matrix.
pub fn random_unitary(r: usize, rng: &mut ChaCha8Rng) -> Op {
    let g = Op::from_fn(r, r, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng))
    });
    let qr = g.qr();
    qr.q()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; adequate for test-input generation.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A random projective *measurement* (complete): partitions the column space
/// of a seeded random unitary into `outcomes` consecutive blocks.
pub fn random_projective_measurement(
    r: usize,
    outcomes: usize,
    seed: u64,
) -> Result<Submeasurement<usize>, OpError> {
    if outcomes > r {
        return Err(OpError::TooManyOutcomes { outcomes, r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(r, &mut rng);
    let base = r / outcomes;
    let extra = r % outcomes;
    let mut elements = Vec::with_capacity(outcomes);
    let mut col = 0;
    for a in 0..outcomes {
        let size = base + usize::from(a < extra);
        let mut p = zero(r);
        for c in col..col + size {
            let v = u.column(c);
            p += &v * v.adjoint();
        }
        col += size;
        elements.push((a, p));
    }
    Submeasurement::new(r, elements)
}

/// A random near-projective complete submeasurement: the blend
/// `(1−slack)·P + slack·Q` of two independent random projective
/// measurements. Its projectivity deficit shrinks with `slack`.
pub fn random_submeasurement(
    r: usize,
    outcomes: usize,
    seed: u64,
    slack: f64,
) -> Result<Submeasurement<usize>, OpError> {
    let p = random_projective_measurement(r, outcomes, seed)?;
    let q = random_projective_measurement(r, outcomes, seed.wrapping_add(0x9E3779B97F4A7C15))?;
    let mut elements = Vec::with_capacity(outcomes);
    for a in 0..outcomes {
        let pa = p.element(&a).cloned().unwrap_or_else(|| zero(r));
        let qa = q.element(&a).cloned().unwrap_or_else(|| zero(r));
        elements.push((
            a,
            pa * Complex64::new(1.0 - slack, 0.0) + qa * Complex64::new(slack, 0.0),
        ));
    }
    Submeasurement::new(r, elements)
}

/// A seeded random Hermitian operator with entries of unit scale.
pub fn random_hermitian(r: usize, rng: &mut ChaCha8Rng) -> Op {
    let g = Op::from_fn(r, r, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// A seeded random PSD operator scaled into `0 ⪯ X ⪯ I`.
pub fn random_contraction_psd(r: usize, rng: &mut ChaCha8Rng) -> Op {
    let h = random_hermitian(r, rng);
    let lo = min_eigenvalue(&h);
    let hi = max_eigenvalue(&h);
    let span = (hi - lo).max(1e-12);
    (h - identity(r) * Complex64::new(lo, 0.0)) / Complex64::new(span, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_trace_basics() {
        let id = identity(3);
        assert!((trace_state(&id).re - 1.0).abs() < 1e-15);
        let mut d = zero(2);
        d[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!((trace_state(&d).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trace_is_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = random_hermitian(4, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let ab = trace_state(&(&a * &b));
            let ba = trace_state(&(&b * &a));
            assert!((ab - ba).norm() < 1e-12);
        }
    }

    #[test]
    fn tau_norm_values() {
        assert!((tau_norm(&identity(5)) - 1.0).abs() < 1e-15);
        let mut d = zero(2);
        d[(0, 0)] = Complex64::new(3.0, 0.0);
        d[(1, 1)] = Complex64::new(4.0, 0.0);
        assert!((tau_norm(&d) - (25.0f64 / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn holder_inequalities_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = random_hermitian(4, &mut rng);
            let b = random_hermitian(4, &mut rng);
            // |τ(A)| <= τ(|A|)
            assert!(trace_state(&a).norm() <= one_norm(&a) + 1e-9);
            // τ(|AB|) <= ‖A‖_τ ‖B‖_τ
            assert!(one_norm(&(&a * &b)) <= tau_norm(&a) * tau_norm(&b) + 1e-9);
            // τ(|AB|) <= ‖A‖_op τ(|B|)
            assert!(one_norm(&(&a * &b)) <= op_norm(&a) * one_norm(&b) + 1e-9);
            // triangle: τ(|A+B|) <= τ(|A|) + τ(|B|)
            assert!(one_norm(&(&a + &b)) <= one_norm(&a) + one_norm(&b) + 1e-9);
        }
    }

    #[test]
    fn matrix_function_identity_const_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let same = matrix_function(&h, |x| x).unwrap();
        assert!(op_norm(&(&same - &h)) < 1e-10);
        let one = matrix_function(&h, |_| 1.0).unwrap();
        assert!(op_norm(&(&one - identity(5))) < 1e-10);
        let sq = matrix_function(&h, |x| x * x).unwrap();
        assert!(op_norm(&(&sq - &h * &h)) < 1e-10);
    }

    #[test]
    fn random_projective_measurement_is_valid_and_reproducible() {
        let tol = TolProfile::default();
        for seed in 0..20 {
            let m = random_projective_measurement(6, 3, seed).unwrap();
            m.validate(&tol, true).unwrap();
            assert!(op_norm(&(m.total() - identity(6))) < 1e-10);
            let m2 = random_projective_measurement(6, 3, seed).unwrap();
            for (l, e) in m.iter() {
                assert!(op_norm(&(e - m2.element(l).unwrap())) == 0.0);
            }
        }
    }

    #[test]
    fn data_process_preserves_totals() {
        let m = random_projective_measurement(6, 4, 7).unwrap();
        let grouped = m.data_process(|&a| a % 2);
        assert!(op_norm(&(grouped.total() - m.total())) < 1e-12);
        let all = m.data_process(|_| 0usize);
        assert!(op_norm(&(all.element(&0).unwrap() - m.total())) < 1e-12);
    }

    #[test]
    fn identical_families_are_fully_consistent() {
        let m = random_projective_measurement(6, 3, 9).unwrap();
        let fam = MeasurementFamily::new(vec![1.0], vec![m]).unwrap();
        assert!(consistency(&fam, &fam).abs() < 1e-10);
        assert!(closeness(&fam, &fam).abs() < 1e-12);
    }

    #[test]
    fn disjoint_support_is_fully_inconsistent() {
        let m = random_projective_measurement(6, 2, 11).unwrap();
        // Relabel outcomes so supports are disjoint.
        let n = m.data_process(|&a| a + 10);
        let fm = MeasurementFamily::new(vec![1.0], vec![m]).unwrap();
        let fn_ = MeasurementFamily::new(vec![1.0], vec![n]).unwrap();
        assert!((consistency(&fm, &fn_) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn consistency_to_closeness_bound() {
        // For complete families, closeness <= sqrt(2 * consistency).
        for seed in 0..100 {
            let m = random_submeasurement(6, 3, seed, 0.2).unwrap();
            let n = random_submeasurement(6, 3, seed + 1000, 0.2).unwrap();
            let fm = MeasurementFamily::new(vec![1.0], vec![m]).unwrap();
            let fn_ = MeasurementFamily::new(vec![1.0], vec![n]).unwrap();
            let cons = consistency(&fm, &fn_);
            let close = closeness(&fm, &fn_);
            assert!(
                close <= (2.0 * cons).sqrt() + 1e-9,
                "seed {seed}: {close} > sqrt(2*{cons})"
            );
        }
    }

    #[test]
    fn closeness_to_consistency_for_projective_m() {
        for seed in 0..100 {
            let m = random_projective_measurement(6, 3, seed).unwrap();
            let n = random_submeasurement(6, 3, seed + 2000, 0.15).unwrap();
            let fm = MeasurementFamily::new(vec![1.0], vec![m]).unwrap();
            let fn_ = MeasurementFamily::new(vec![1.0], vec![n]).unwrap();
            assert!(consistency(&fm, &fn_) <= closeness(&fm, &fn_) + 1e-9);
        }
    }

    #[test]
    fn data_processing_never_increases_inconsistency() {
        for seed in 0..100 {
            let m = random_submeasurement(8, 4, seed, 0.1).unwrap();
            let n = random_submeasurement(8, 4, seed + 500, 0.1).unwrap();
            let before = pair_inconsistency(&m, &n);
            let after = pair_inconsistency(&m.data_process(|&a| a % 2), &n.data_process(|&a| a % 2));
            assert!(after <= before + 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn orthogonalize_fixes_projective_input() {
        let m = random_projective_measurement(6, 3, 42).unwrap();
        let (p, report) = orthogonalize(&m).unwrap();
        assert!(report.zeta.abs() < 1e-12);
        assert!(report.distance < 1e-7);
        p.validate(&TolProfile::default(), true).unwrap();
    }

    #[test]
    fn orthogonalize_commuting_scaled_projector() {
        // A = {0.9 P, 0.9 (I−P)}: rounds back to {P, I−P}.
        let m = random_projective_measurement(4, 2, 5).unwrap();
        let scaled: Vec<(usize, Op)> = m
            .iter()
            .map(|(l, e)| (*l, e * Complex64::new(0.9, 0.0)))
            .collect();
        let a = Submeasurement::new(4, scaled).unwrap();
        let (p, report) = orthogonalize(&a).unwrap();
        for (l, e) in m.iter() {
            assert!(op_norm(&(p.element(l).unwrap() - e)) < 1e-9);
        }
        // ζ = Σ τ(0.9P − 0.81P²) = 0.09 Σ τ(P) = 0.09.
        assert!((report.zeta - 0.09).abs() < 1e-12);
        assert!(report.distance <= report.bound + 1e-12);
    }

    #[test]
    fn orthogonalize_bound_holds_on_random_near_projective_inputs() {
        let mut checked = 0;
        for seed in 0..100 {
            let a = random_submeasurement(6, 3, seed, 0.02).unwrap();
            if a.projectivity_deficit() > 0.05 {
                continue;
            }
            let (_, report) = orthogonalize(&a).unwrap();
            assert!(
                report.distance <= report.bound + 1e-9,
                "seed {seed}: {report:?}"
            );
            checked += 1;
        }
        assert!(checked >= 90);
    }

    #[test]
    fn switcheroo_product_commutators() {
        // If pairwise commutators are ε-small in τ-norm, the k-fold product
        // commutator is <= k ε (checked for k <= 4 on seeded families).
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            // Build nearly commuting contractions: diagonal + small noise.
            let base = random_contraction_psd(5, &mut rng);
            let ops: Vec<Op> = (0..4)
                .map(|_| {
                    let noise = random_hermitian(5, &mut rng) * Complex64::new(0.01, 0.0);
                    let x = &base + noise;
                    // Rescale into contractions.
                    &x / Complex64::new(op_norm(&x).max(1.0), 0.0)
                })
                .collect();
            let eps = ops
                .iter()
                .enumerate()
                .flat_map(|(i, a)| {
                    ops.iter()
                        .skip(i + 1)
                        .map(move |b| tau_norm(&(a * b - b * a)))
                })
                .fold(0.0, f64::max);
            for k in 2..=4usize {
                let mut prod = identity(5);
                for op in ops.iter().take(k) {
                    prod = &prod * op;
                }
                let mut rev = identity(5);
                for op in ops.iter().take(k).rev() {
                    rev = &rev * op;
                }
                let dev = tau_norm(&(&prod - &rev));
                assert!(dev <= k as f64 * eps + 1e-8, "k={k}: {dev} > {k}·{eps}");
            }
        }
    }
}
