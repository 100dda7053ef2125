//! Exact arithmetic and linear algebra over prime finite fields GF(q).
//!
//! Everything here is exact integer arithmetic modulo a prime `q`. Only prime
//! fields are supported: Reed–Solomon codes over GF(p) supply every
//! interpolable code the desk-scale experiments need. Primality is checked at
//! construction by trial division, which is adequate for the supported range
//! `q <= 10_000`.

use thiserror::Error;

/// Largest supported field modulus. Trial-division primality and exhaustive
/// enumeration elsewhere assume desk-scale fields.
pub const MAX_MODULUS: u64 = 10_000;

/// Errors from field construction and linear algebra.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaloisError {
    #[error("modulus {0} is not a prime in [2, {MAX_MODULUS}]")]
    BadModulus(u64),
    #[error("operands have different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Returns true iff `q` is prime, by trial division.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of GF(q) with its modulus carried alongside the value.
///
/// Carrying the modulus keeps mixed-field bugs loud: all binary operations
/// check that both operands live in the same field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl FieldElement {
    /// Builds `value mod q`, validating that `q` is a prime in range.
    pub fn new(value: u64, q: u64) -> Result<Self, GaloisError> {
        if q < 2 || q > MAX_MODULUS || !is_prime(q) {
            return Err(GaloisError::BadModulus(q));
        }
        Ok(Self { value: value % q, q })
    }

    /// The canonical representative in `[0, q)`.
    pub fn value(&self) -> u64 {
        self.value
    }

    /// The field modulus.
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<(), GaloisError> {
        if self.q != other.q {
            Err(GaloisError::ModulusMismatch(self.q, other.q))
        } else {
            Ok(())
        }
    }

    /// Additive inverse.
    pub fn neg(&self) -> Self {
        Self {
            value: (self.q - self.value) % self.q,
            q: self.q,
        }
    }

    /// Multiplicative inverse via Fermat's little theorem (`a^(q-2)`).
    pub fn inv(&self) -> Result<Self, GaloisError> {
        if self.value == 0 {
            return Err(GaloisError::ZeroInverse);
        }
        Ok(self.pow(self.q - 2))
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self { value: 1, q: self.q };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(base);
            }
            base = base.mul_unchecked(base);
            e >>= 1;
        }
        acc
    }

    fn mul_unchecked(self, rhs: Self) -> Self {
        // q <= 10^4 so products fit comfortably in u64.
        Self {
            value: (self.value * rhs.value) % self.q,
            q: self.q,
        }
    }
}

/// `(a + b) mod q`; errors on modulus mismatch.
pub fn field_add(a: FieldElement, b: FieldElement) -> Result<FieldElement, GaloisError> {
    a.check(&b)?;
    Ok(FieldElement {
        value: (a.value + b.value) % a.q,
        q: a.q,
    })
}

/// `(a - b) mod q`; errors on modulus mismatch.
pub fn field_sub(a: FieldElement, b: FieldElement) -> Result<FieldElement, GaloisError> {
    a.check(&b)?;
    Ok(FieldElement {
        value: (a.value + a.q - b.value) % a.q,
        q: a.q,
    })
}

/// `(a * b) mod q`; errors on modulus mismatch.
pub fn field_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement, GaloisError> {
    a.check(&b)?;
    Ok(a.mul_unchecked(b))
}

/// Multiplicative inverse; errors on zero.
pub fn field_inv(a: FieldElement) -> Result<FieldElement, GaloisError> {
    a.inv()
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        field_add(self, rhs).expect("field modulus mismatch")
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        field_sub(self, rhs).expect("field modulus mismatch")
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        field_mul(self, rhs).expect("field modulus mismatch")
    }
}

/// A dense row-major matrix over GF(q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    q: u64,
    entries: Vec<FieldElement>,
}

impl FieldMatrix {
    /// Builds a matrix from a row-major entry list. All entries must share
    /// the same modulus.
    pub fn new(rows: usize, cols: usize, entries: Vec<FieldElement>) -> Result<Self, GaloisError> {
        if entries.len() != rows * cols || entries.is_empty() {
            return Err(GaloisError::DimensionMismatch(format!(
                "expected {}x{} = {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        let q = entries[0].modulus();
        if let Some(e) = entries.iter().find(|e| e.modulus() != q) {
            return Err(GaloisError::ModulusMismatch(q, e.modulus()));
        }
        Ok(Self { rows, cols, q, entries })
    }

    /// Convenience constructor from integer values.
    pub fn from_values(rows: usize, cols: usize, q: u64, values: &[u64]) -> Result<Self, GaloisError> {
        let entries = values
            .iter()
            .map(|&v| FieldElement::new(v, q))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize, q: u64) -> Result<Self, GaloisError> {
        let zero = FieldElement::new(0, q)?;
        Self::new(rows, cols, vec![zero; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        assert_eq!(v.modulus(), self.q, "field modulus mismatch");
        self.entries[r * self.cols + c] = v;
    }

    /// Returns the sub-matrix consisting of the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        let entries = rows
            .iter()
            .flat_map(|&r| (0..self.cols).map(move |c| self.get(r, c)))
            .collect();
        FieldMatrix::new(rows.len(), self.cols, entries).expect("valid sub-matrix")
    }

    /// Matrix-vector product over GF(q).
    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, GaloisError> {
        if v.len() != self.cols {
            return Err(GaloisError::DimensionMismatch(format!(
                "matrix has {} cols, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        let zero = FieldElement::new(0, self.q)?;
        Ok((0..self.rows)
            .map(|r| {
                (0..self.cols).fold(zero, |acc, c| acc + self.get(r, c) * v[c])
            })
            .collect())
    }

    /// Rank via Gaussian elimination.
    pub fn rank(&self) -> usize {
        let zero = FieldElement::new(0, self.q).expect("valid modulus");
        let b = vec![zero; self.rows];
        match solve_linear(self, &b) {
            Ok(sol) => sol.rank,
            Err(_) => unreachable!("homogeneous system is always consistent"),
        }
    }
}

/// Outcome of Gaussian elimination on `A x = b`.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    /// A particular solution, if the system is consistent.
    pub solution: Option<Vec<FieldElement>>,
    /// Rank of the coefficient matrix.
    pub rank: usize,
}

/// Solves `A x = b` over GF(q) by Gaussian elimination.
///
/// Returns a particular solution (free variables set to zero) together with
/// the rank of `A`, or `solution: None` when the system is inconsistent.
pub fn solve_linear(a: &FieldMatrix, b: &[FieldElement]) -> Result<LinearSolution, GaloisError> {
    if b.len() != a.rows {
        return Err(GaloisError::DimensionMismatch(format!(
            "matrix has {} rows, rhs has {} entries",
            a.rows,
            b.len()
        )));
    }
    let q = a.q;
    if let Some(e) = b.iter().find(|e| e.modulus() != q) {
        return Err(GaloisError::ModulusMismatch(q, e.modulus()));
    }
    let zero = FieldElement::new(0, q)?;

    // Augmented matrix [A | b], reduced in place.
    let mut m: Vec<Vec<FieldElement>> = (0..a.rows)
        .map(|r| {
            let mut row: Vec<FieldElement> = (0..a.cols).map(|c| a.get(r, c)).collect();
            row.push(b[r]);
            row
        })
        .collect();

    let ncols = a.cols;
    let mut pivot_cols = Vec::new();
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(sel) = (pivot_row..a.rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, sel);
        let inv = m[pivot_row][col].inv().expect("pivot is nonzero");
        for c in col..=ncols {
            m[pivot_row][c] = m[pivot_row][c] * inv;
        }
        for r in 0..a.rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let factor = m[r][col];
                for c in col..=ncols {
                    let sub = factor * m[pivot_row][c];
                    m[r][c] = m[r][c] - sub;
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == a.rows {
            break;
        }
    }
    let rank = pivot_cols.len();

    // Inconsistent iff a zero row of A meets a nonzero rhs.
    for r in rank..a.rows {
        if !m[r][ncols].is_zero() {
            return Ok(LinearSolution { solution: None, rank });
        }
    }

    let mut x = vec![zero; ncols];
    for (i, &col) in pivot_cols.iter().enumerate() {
        x[col] = m[i][ncols];
    }
    Ok(LinearSolution { solution: Some(x), rank })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: u64, q: u64) -> FieldElement {
        FieldElement::new(v, q).unwrap()
    }

    #[test]
    fn addition_in_gf5() {
        assert_eq!(field_add(fe(3, 5), fe(4, 5)).unwrap(), fe(2, 5));
        assert_eq!(field_add(fe(0, 5), fe(3, 5)).unwrap(), fe(3, 5));
        assert_eq!(field_add(fe(6, 7), fe(6, 7)).unwrap(), fe(5, 7));
    }

    #[test]
    fn inverse_in_gf5() {
        assert_eq!(field_inv(fe(3, 5)).unwrap(), fe(2, 5));
        assert_eq!(field_inv(fe(1, 5)).unwrap(), fe(1, 5));
        assert_eq!(field_inv(fe(0, 5)), Err(GaloisError::ZeroInverse));
    }

    #[test]
    fn modulus_mismatch_is_an_error() {
        assert!(matches!(
            field_add(fe(1, 5), fe(1, 7)),
            Err(GaloisError::ModulusMismatch(5, 7))
        ));
    }

    #[test]
    fn non_prime_modulus_rejected() {
        assert!(FieldElement::new(1, 6).is_err());
        assert!(FieldElement::new(1, 1).is_err());
        assert!(FieldElement::new(1, 10_007).is_err()); // prime, but out of range
    }

    #[test]
    fn field_axioms_hold_exhaustively_in_gf7() {
        let q = 7;
        for a in 0..q {
            for b in 0..q {
                assert_eq!(fe(a, q) + fe(b, q), fe(b, q) + fe(a, q));
                assert_eq!(fe(a, q) * fe(b, q), fe(b, q) * fe(a, q));
                for c in 0..q {
                    assert_eq!((fe(a, q) + fe(b, q)) + fe(c, q), fe(a, q) + (fe(b, q) + fe(c, q)));
                    assert_eq!(
                        fe(a, q) * (fe(b, q) + fe(c, q)),
                        fe(a, q) * fe(b, q) + fe(a, q) * fe(c, q)
                    );
                }
                if a != 0 {
                    assert_eq!(fe(a, q) * fe(a, q).inv().unwrap(), fe(1, q));
                }
            }
        }
    }

    #[test]
    fn solve_identity_system() {
        let a = FieldMatrix::from_values(2, 2, 5, &[1, 0, 0, 1]).unwrap();
        let b = vec![fe(4, 5), fe(2, 5)];
        let sol = solve_linear(&a, &b).unwrap();
        assert_eq!(sol.solution.unwrap(), b);
        assert_eq!(sol.rank, 2);
    }

    #[test]
    fn solve_2x2_hand_oracle() {
        // GF(5): x + y = 2, x + 2y = 3  =>  x = 1, y = 1.
        let a = FieldMatrix::from_values(2, 2, 5, &[1, 1, 1, 2]).unwrap();
        let b = vec![fe(2, 5), fe(3, 5)];
        let sol = solve_linear(&a, &b).unwrap();
        assert_eq!(sol.solution.unwrap(), vec![fe(1, 5), fe(1, 5)]);
    }

    #[test]
    fn inconsistent_system_reports_no_solution() {
        let a = FieldMatrix::from_values(2, 2, 5, &[1, 1, 0, 0]).unwrap();
        let b = vec![fe(2, 5), fe(3, 5)];
        let sol = solve_linear(&a, &b).unwrap();
        assert!(sol.solution.is_none());
        assert_eq!(sol.rank, 1);
    }

    #[test]
    fn solve_agrees_with_exhaustive_search_small_fields() {
        // For every q in {2,3,5,7} and a few seeded-free deterministic systems,
        // compare against brute force over all q^cols vectors.
        for q in [2u64, 3, 5, 7] {
            let cols = 3usize;
            let rows = 3usize;
            // Deterministic pseudo-random entries from a simple LCG.
            let mut state = 12345u64;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) % q
            };
            for _case in 0..20 {
                let vals: Vec<u64> = (0..rows * cols).map(|_| next()).collect();
                let a = FieldMatrix::from_values(rows, cols, q, &vals).unwrap();
                let b: Vec<FieldElement> = (0..rows).map(|_| fe(next(), q)).collect();
                let sol = solve_linear(&a, &b).unwrap();
                // Brute force.
                let mut found = None;
                'outer: for idx in 0..q.pow(cols as u32) {
                    let mut x = Vec::with_capacity(cols);
                    let mut rem = idx;
                    for _ in 0..cols {
                        x.push(fe(rem % q, q));
                        rem /= q;
                    }
                    if a.mul_vec(&x).unwrap() == b {
                        found = Some(x);
                        break 'outer;
                    }
                }
                match (sol.solution, found) {
                    (Some(x), Some(_)) => assert_eq!(a.mul_vec(&x).unwrap(), b),
                    (None, None) => {}
                    (got, expect) => panic!("solver/brute-force disagree: {got:?} vs {expect:?}"),
                }
            }
        }
    }

    #[test]
    fn rank_of_rectangular_matrices() {
        let a = FieldMatrix::from_values(3, 2, 5, &[1, 2, 2, 4, 0, 1]).unwrap();
        assert_eq!(a.rank(), 2);
        // (3,1) = 3·(1,2) over GF(5), so this one is rank 1.
        let b = FieldMatrix::from_values(3, 2, 5, &[1, 2, 2, 4, 3, 1]).unwrap();
        assert_eq!(b.rank(), 1);
        let c = FieldMatrix::from_values(2, 2, 5, &[1, 2, 2, 4]).unwrap();
        assert_eq!(c.rank(), 1);
    }
}
