//! Tensor codes `C^{⊗m}`: evaluation tables on `[n]^m`, axis-parallel lines,
//! subcubes, slice restriction/interpolation, and distance facts.
//!
//! A tensor codeword is an evaluation table over `[n]^m` whose restriction to
//! every axis-parallel line is a codeword of the base code. Tables are stored
//! row-major with the *last* coordinate fastest; this indexing is part of the
//! report format contract, as are the enumeration orders of points, lines and
//! subcubes.
//!
//! Axes are 0-based internally (`axis ∈ 0..m`); a subcube is described by the
//! number of *fixed trailing coordinates* (so zero fixed coordinates means
//! the whole cube).

use crate::codes::{CodeError, Codeword, LinearCode, ENUMERATION_BUDGET};
use crate::galois::FieldElement;
use num_rational::BigRational;
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Galois(#[from] crate::galois::GaloisError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("line restriction at axis {axis} is not a base codeword")]
    LineNotCodeword { axis: usize },
    #[error("enumeration budget exceeded ({0} items)")]
    BudgetExceeded(u128),
    #[error("duplicate slice coordinates")]
    DuplicateCoords,
}

/// Row-major point index with the last coordinate fastest.
pub fn point_index(u: &[usize], n: usize) -> usize {
    u.iter().fold(0, |acc, &c| {
        debug_assert!(c < n);
        acc * n + c
    })
}

/// Inverse of [`point_index`].
pub fn index_point(mut idx: usize, n: usize, m: usize) -> Vec<usize> {
    let mut u = vec![0; m];
    for i in (0..m).rev() {
        u[i] = idx % n;
        idx /= n;
    }
    u
}

/// All points of `[n]^m` in canonical order.
pub fn enumerate_points(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..n.pow(m as u32)).map(|i| index_point(i, n, m)).collect()
}

/// An axis-parallel line: the points varying only in coordinate `axis`,
/// with the remaining coordinates pinned to `intercept` (length `m - 1`,
/// in coordinate order with the varying one removed).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisLine {
    pub axis: usize,
    pub intercept: Vec<usize>,
}

impl AxisLine {
    /// The point on the line at position `i` along the varying axis.
    pub fn point(&self, i: usize) -> Vec<usize> {
        let mut u = Vec::with_capacity(self.intercept.len() + 1);
        u.extend_from_slice(&self.intercept[..self.axis]);
        u.push(i);
        u.extend_from_slice(&self.intercept[self.axis..]);
        u
    }

    /// Whether `u` lies on this line; if so, returns its position along the
    /// varying axis.
    pub fn position_of(&self, u: &[usize]) -> Option<usize> {
        let mut it = u
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.axis)
            .map(|(_, &c)| c);
        if self.intercept.iter().all(|&c| it.next() == Some(c)) {
            Some(u[self.axis])
        } else {
            None
        }
    }
}

/// All axis-parallel lines of `[n]^m` in canonical order: axis ascending,
/// then intercept row-major. There are `m * n^(m-1)` of them.
pub fn enumerate_lines(n: usize, m: usize) -> Vec<AxisLine> {
    let mut lines = Vec::with_capacity(m * n.pow((m - 1) as u32));
    for axis in 0..m {
        for idx in 0..n.pow((m - 1) as u32) {
            lines.push(AxisLine {
                axis,
                intercept: index_point(idx, n, m - 1),
            });
        }
    }
    lines
}

/// Canonical index of a line in the [`enumerate_lines`] order.
pub fn line_index(line: &AxisLine, n: usize, m: usize) -> usize {
    line.axis * n.pow((m - 1) as u32) + point_index(&line.intercept, n)
}

/// A subcube of `[n]^m`: the points whose last `fixed` coordinates equal
/// `tail`. With `fixed = 0` the subcube is all of `[n]^m`; the free
/// coordinates are always a prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subcube {
    pub m: usize,
    /// Values of the last `tail.len()` coordinates.
    pub tail: Vec<usize>,
}

impl Subcube {
    pub fn free_coords(&self) -> usize {
        self.m - self.tail.len()
    }

    /// Number of points in the subcube.
    pub fn len(&self, n: usize) -> usize {
        n.pow(self.free_coords() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The subcube's points in canonical order.
    pub fn points(&self, n: usize) -> Vec<Vec<usize>> {
        let free = self.free_coords();
        (0..self.len(n))
            .map(|i| {
                let mut u = index_point(i, n, free);
                u.extend_from_slice(&self.tail);
                u
            })
            .collect()
    }

    pub fn contains(&self, u: &[usize]) -> bool {
        u.len() == self.m && u[self.free_coords()..] == self.tail[..]
    }
}

/// All subcubes of `[n]^m` with their sampling weights: a uniformly random
/// number of fixed trailing coordinates `j - 1 ∈ {0, .., m-1}` (matching a
/// uniform choice of `j ∈ {1..m}`), then uniform tail values. Weights are
/// exact rationals and sum to 1.
pub fn enumerate_subcubes(n: usize, m: usize) -> Vec<(Subcube, BigRational)> {
    let mut out = Vec::new();
    for fixed in 0..m {
        let tails = n.pow(fixed as u32);
        let w = BigRational::new(BigInt::from(1), BigInt::from(m as u64 * tails as u64));
        for idx in 0..tails {
            out.push((
                Subcube {
                    m,
                    tail: index_point(idx, n, fixed),
                },
                w.clone(),
            ));
        }
    }
    out
}

/// An evaluation table over `[n]^m` whose every axis-parallel line
/// restriction lies in the base code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorCodeword {
    pub m: usize,
    pub n: usize,
    /// `n^m` values, row-major with the last coordinate fastest.
    pub table: Vec<FieldElement>,
}

impl TensorCodeword {
    pub fn at(&self, u: &[usize]) -> FieldElement {
        self.table[point_index(u, self.n)]
    }
}

/// Encodes a `k^m` coefficient tensor by applying the generator along every
/// axis. The map is linear and injective; the result passes
/// [`is_tensor_codeword`].
pub fn tensor_encode(
    code: &LinearCode,
    m: usize,
    coeffs: &[FieldElement],
) -> Result<TensorCodeword, TensorError> {
    let k = code.k();
    let n = code.n();
    if coeffs.len() != k.pow(m as u32) {
        return Err(TensorError::ShapeMismatch(format!(
            "expected k^m = {} coefficients, got {}",
            k.pow(m as u32),
            coeffs.len()
        )));
    }
    // Apply the generator axis by axis. After processing axis `a`, the table
    // has shape n^a x k^(m-a) (processed axes slowest).
    let mut cur: Vec<FieldElement> = coeffs.to_vec();
    let mut rows = 1usize; // product of processed axis sizes
    let mut tail = k.pow(m as u32); // product of remaining axis sizes
    for _axis in 0..m {
        tail /= k;
        let mut next = vec![code.generator().get(0, 0); rows * n * tail];
        for r in 0..rows {
            for tidx in 0..tail {
                // Gather the k coefficients along this axis.
                let mut col = Vec::with_capacity(k);
                for j in 0..k {
                    col.push(cur[(r * k + j) * tail + tidx]);
                }
                let enc = code.generator().mul_vec(&col)?;
                for (i, &v) in enc.iter().enumerate() {
                    next[(r * n + i) * tail + tidx] = v;
                }
            }
        }
        cur = next;
        rows *= n;
    }
    Ok(TensorCodeword { m, n, table: cur })
}

/// True iff every axis-parallel line restriction of `table` is a codeword.
pub fn is_tensor_codeword(
    code: &LinearCode,
    m: usize,
    table: &TensorCodeword,
) -> Result<bool, TensorError> {
    let n = code.n();
    if table.m != m || table.n != n || table.table.len() != n.pow(m as u32) {
        return Err(TensorError::ShapeMismatch(format!(
            "expected n^m = {} entries over [{}]^{}",
            n.pow(m as u32),
            n,
            m
        )));
    }
    for line in enumerate_lines(n, m) {
        let cw = restrict_line(table, &line);
        if !code.is_codeword(&cw)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The restriction of `c` to an axis-parallel line, as a length-`n` word.
pub fn restrict_line(c: &TensorCodeword, line: &AxisLine) -> Codeword {
    Codeword {
        values: (0..c.n).map(|i| c.at(&line.point(i))).collect(),
    }
}

/// The slice `c(·, …, ·, x)` fixing the last coordinate, a codeword of
/// `C^{⊗(m-1)}`.
pub fn restrict_slice(c: &TensorCodeword, x: usize) -> Result<TensorCodeword, TensorError> {
    if x >= c.n || c.m == 0 {
        return Err(TensorError::OutOfRange(format!("slice x = {x}")));
    }
    let n = c.n;
    let inner = n.pow((c.m - 1) as u32);
    let table = (0..inner).map(|i| c.table[i * n + x]).collect();
    Ok(TensorCodeword {
        m: c.m - 1,
        n,
        table,
    })
}

/// Interpolates `t` slices `g_j ∈ C^{⊗m}` at distinct last-coordinate values
/// `coords[j]` into the unique `h ∈ C^{⊗(m+1)}` with `h|_{coords[j]} = g_j`:
/// pointwise, `h(z, x)` is the base-code interpolation through the values
/// `g_j(z)` evaluated at `x`.
pub fn interpolate_slices(
    code: &LinearCode,
    coords: &[usize],
    slices: &[TensorCodeword],
) -> Result<TensorCodeword, TensorError> {
    let t = code.t();
    let n = code.n();
    if coords.len() != t || slices.len() != t {
        return Err(TensorError::ShapeMismatch(format!(
            "need t = {t} coords and slices, got {} and {}",
            coords.len(),
            slices.len()
        )));
    }
    let mut seen = vec![false; n];
    for &c in coords {
        if c >= n || seen[c] {
            return Err(TensorError::DuplicateCoords);
        }
        seen[c] = true;
    }
    let m = slices[0].m;
    if slices.iter().any(|g| g.m != m || g.n != n) {
        return Err(TensorError::ShapeMismatch("slice shapes differ".into()));
    }
    let inner = n.pow(m as u32);
    let mut table = vec![code.generator().get(0, 0); inner * n];
    for z in 0..inner {
        let values: Vec<FieldElement> = slices.iter().map(|g| g.table[z]).collect();
        let fiber = code.interpolate(coords, &values)?;
        for x in 0..n {
            table[z * n + x] = fiber.at(x);
        }
    }
    Ok(TensorCodeword { m: m + 1, n, table })
}

/// Fraction of points where two tables agree, as an exact rational.
pub fn agreement_fraction(
    c: &TensorCodeword,
    c2: &TensorCodeword,
) -> Result<BigRational, TensorError> {
    if c.m != c2.m || c.n != c2.n {
        return Err(TensorError::ShapeMismatch("tables differ in shape".into()));
    }
    let agree = c
        .table
        .iter()
        .zip(&c2.table)
        .filter(|(a, b)| a == b)
        .count();
    Ok(BigRational::new(
        BigInt::from(agree),
        BigInt::from(c.table.len()),
    ))
}

/// `γ_m = 1 - (d/n)^m`: the maximum agreement fraction of two distinct
/// codewords of `C^{⊗m}`; satisfies `γ_m <= m t / n`.
pub fn gamma(n: usize, d: usize, m: usize) -> f64 {
    1.0 - (d as f64 / n as f64).powi(m as i32)
}

/// All codewords of `C^{⊗m}` in lexicographic coefficient order (first
/// coefficient most significant). Gated by the enumeration budget since the
/// count is `q^(k^m)`.
pub fn enumerate_tensor_codewords(
    code: &LinearCode,
    m: usize,
) -> Result<Vec<TensorCodeword>, TensorError> {
    let k = code.k();
    let q = code.q();
    let dim = k.pow(m as u32);
    let count = (q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_BUDGET as u128 {
        return Err(TensorError::BudgetExceeded(count));
    }
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count as u64 {
        let mut digits = vec![0u64; dim];
        let mut rem = idx;
        for i in (0..dim).rev() {
            digits[i] = rem % q;
            rem /= q;
        }
        let coeffs: Vec<FieldElement> = digits
            .into_iter()
            .map(|v| FieldElement::new(v, q).expect("valid modulus"))
            .collect();
        out.push(tensor_encode(code, m, &coeffs)?);
    }
    Ok(out)
}

/// Brute-force nearest-codeword search: returns the tensor codeword at
/// minimum Hamming distance from `table` together with that distance.
/// Ties broken by canonical enumeration order. Budget-gated like
/// [`enumerate_tensor_codewords`].
pub fn nearest_tensor_codeword(
    code: &LinearCode,
    m: usize,
    table: &[FieldElement],
) -> Result<(TensorCodeword, usize), TensorError> {
    let mut best: Option<(TensorCodeword, usize)> = None;
    for c in enumerate_tensor_codewords(code, m)? {
        let dist = c
            .table
            .iter()
            .zip(table)
            .filter(|(a, b)| a != b)
            .count();
        if best.as_ref().map_or(true, |(_, d)| dist < *d) {
            best = Some((c, dist));
        }
    }
    Ok(best.expect("every linear code contains zero"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::make_reed_solomon;

    fn fe(v: u64, q: u64) -> FieldElement {
        FieldElement::new(v, q).unwrap()
    }

    #[test]
    fn line_and_subcube_counts() {
        assert_eq!(enumerate_lines(3, 2).len(), 2 * 3);
        assert_eq!(enumerate_lines(5, 2).len(), 2 * 5);
        assert_eq!(enumerate_lines(3, 3).len(), 3 * 9);
        // (n=3, m=2): whole cube + 3 fixed-tail subcubes.
        assert_eq!(enumerate_subcubes(3, 2).len(), 4);
        let total: BigRational = enumerate_subcubes(3, 2)
            .into_iter()
            .map(|(_, w)| w)
            .sum();
        assert_eq!(total, BigRational::from(BigInt::from(1)));
    }

    #[test]
    fn point_index_roundtrip_last_coordinate_fastest() {
        assert_eq!(point_index(&[1, 2], 5), 7);
        assert_eq!(index_point(7, 5, 2), vec![1, 2]);
        for idx in 0..27 {
            assert_eq!(point_index(&index_point(idx, 3, 3), 3), idx);
        }
    }

    #[test]
    fn rank_one_product_structure() {
        // coeffs v ⊗ w encode to the product table c1(u1) * c2(u2).
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let v = [fe(1, 5), fe(2, 5)];
        let w = [fe(3, 5), fe(1, 5)];
        let mut coeffs = Vec::new();
        for a in v {
            for b in w {
                coeffs.push(a * b);
            }
        }
        let tc = tensor_encode(&code, 2, &coeffs).unwrap();
        let c1 = code.encode(&v).unwrap();
        let c2 = code.encode(&w).unwrap();
        for u1 in 0..5 {
            for u2 in 0..5 {
                assert_eq!(tc.at(&[u1, u2]), c1.at(u1) * c2.at(u2));
            }
        }
        assert!(is_tensor_codeword(&code, 2, &tc).unwrap());
    }

    #[test]
    fn m_equals_one_reduces_to_base_encoding() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let msg = [fe(2, 5), fe(3, 5)];
        let tc = tensor_encode(&code, 1, &msg).unwrap();
        let cw = code.encode(&msg).unwrap();
        assert_eq!(tc.table, cw.values);
    }

    #[test]
    fn single_flip_breaks_membership() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let mut tc = tensor_encode(&code, 2, &[fe(1, 5), fe(2, 5), fe(0, 5), fe(1, 5)]).unwrap();
        assert!(is_tensor_codeword(&code, 2, &tc).unwrap());
        tc.table[7] = tc.table[7] + fe(1, 5);
        assert!(!is_tensor_codeword(&code, 2, &tc).unwrap());
    }

    #[test]
    fn restrictions_commute() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let tc = tensor_encode(&code, 2, &[fe(1, 5), fe(4, 5), fe(2, 5), fe(3, 5)]).unwrap();
        // Slice then read = read the full table at the sliced coordinate.
        for x in 0..5 {
            let slice = restrict_slice(&tc, x).unwrap();
            for z in 0..5 {
                assert_eq!(slice.at(&[z]), tc.at(&[z, x]));
            }
        }
        // Line restriction along axis 0 at intercept [x] is the slice.
        let line = AxisLine { axis: 0, intercept: vec![2] };
        let cw = restrict_line(&tc, &line);
        let slice = restrict_slice(&tc, 2).unwrap();
        assert_eq!(cw.values, slice.table);
    }

    #[test]
    fn interpolate_slices_inverts_restriction() {
        // Exact bijection at (q=3, n=3, s=1, m=1): restricting h ∈ C^{⊗2} at
        // coords (0,1) and re-interpolating returns h, over the full
        // enumeration.
        let code = make_reed_solomon(3, 3, 1, None).unwrap();
        let all = enumerate_tensor_codewords(&code, 2).unwrap();
        assert_eq!(all.len(), 81);
        for h in &all {
            let g0 = restrict_slice(h, 0).unwrap();
            let g1 = restrict_slice(h, 1).unwrap();
            let back = interpolate_slices(&code, &[0, 1], &[g0, g1]).unwrap();
            assert_eq!(&back, h);
        }
    }

    #[test]
    fn interpolated_slices_restrict_back() {
        let code = make_reed_solomon(3, 3, 1, None).unwrap();
        let base = enumerate_tensor_codewords(&code, 1).unwrap();
        // Two arbitrary base codewords as slices at x = 0, 2.
        let g0 = base[5].clone();
        let g1 = base[7].clone();
        let h = interpolate_slices(&code, &[0, 2], &[g0.clone(), g1.clone()]).unwrap();
        assert!(is_tensor_codeword(&code, 2, &h).unwrap());
        assert_eq!(restrict_slice(&h, 0).unwrap(), g0);
        assert_eq!(restrict_slice(&h, 2).unwrap(), g1);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(5, 4, 2) - 0.36).abs() < 1e-12);
        assert!(gamma(5, 4, 2) <= 2.0 * 2.0 / 5.0);
        assert!((gamma(3, 2, 2) - (1.0 - 4.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn tensor_distance_is_d_to_the_m() {
        for (q, n, s, m) in [(3u64, 3usize, 1usize, 2usize), (5, 5, 1, 2)] {
            let code = make_reed_solomon(q, n, s, None).unwrap();
            let d = code.d();
            let min_weight = enumerate_tensor_codewords(&code, m)
                .unwrap()
                .iter()
                .map(|c| c.table.iter().filter(|v| !v.is_zero()).count())
                .filter(|&w| w > 0)
                .min()
                .unwrap();
            assert_eq!(min_weight, d.pow(m as u32), "q={q} n={n} s={s} m={m}");
        }
    }

    #[test]
    fn agreement_bounded_by_gamma_on_distinct_codewords() {
        let code = make_reed_solomon(5, 5, 1, None).unwrap();
        let all = enumerate_tensor_codewords(&code, 2).unwrap();
        let g = gamma(5, code.d(), 2);
        // 100 deterministic pairs out of the full 625^2.
        for i in 0..100 {
            let a = &all[(i * 37) % all.len()];
            let b = &all[(i * 101 + 13) % all.len()];
            if a == b {
                continue;
            }
            let frac = agreement_fraction(a, b).unwrap();
            let frac_f = frac.numer().to_string().parse::<f64>().unwrap()
                / frac.denom().to_string().parse::<f64>().unwrap();
            assert!(frac_f <= g + 1e-12);
        }
    }
}
