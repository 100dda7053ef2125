//! Interpolable linear codes: construction, membership, distance, and
//! interpolation maps.
//!
//! A linear `[n, k, d]` code over GF(q) is carried by its `n x k` generator
//! matrix; codewords are the column span. The distance `d` is computed by
//! exhaustive enumeration (desk scale, zero trust in metadata) and cached.
//! With `t = n - d + 1`, an *interpolable* code admits, for every choice of
//! `t` distinct coordinates and `t` target values, a unique codeword matching
//! those values. We check interpolability literally: every `t`-row submatrix
//! of the generator must have rank `t`. Since the rows live in a
//! `k`-dimensional space this is only satisfiable when `t = k`, i.e. an
//! interpolable code in this sense is necessarily MDS; Reed–Solomon codes are
//! the canonical family.
//!
//! Codeword enumeration order is lexicographic over message vectors (first
//! message symbol most significant). This order is the canonical outcome
//! index for all measurement families downstream; changing it would silently
//! change report contents.

use crate::galois::{solve_linear, FieldElement, FieldMatrix, GaloisError};
use thiserror::Error;

/// Maximum number of codewords we are willing to enumerate (`q^k`).
pub const ENUMERATION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error("evaluation points must be distinct")]
    RepeatedEvalPoints,
    #[error("degree bound s = {s} must satisfy s < n = {n}")]
    DegreeTooLarge { s: usize, n: usize },
    #[error("blocklength n = {n} exceeds field size q = {q}")]
    BlocklengthTooLarge { n: usize, q: u64 },
    #[error("enumeration budget exceeded: q^k = {0} codewords")]
    BudgetExceeded(u64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coordinates must be distinct and in range")]
    BadCoordinates,
    #[error("code is not interpolable")]
    NotInterpolable,
    #[error("generator matrix must have full column rank")]
    RankDeficientGenerator,
}

/// A codeword: a length-`n` vector over GF(q), viewed as a function
/// `[n] -> GF(q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    pub values: Vec<FieldElement>,
}

impl Codeword {
    /// Value at coordinate `i` (0-based).
    pub fn at(&self, i: usize) -> FieldElement {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}

/// An interpolable linear `[n, k, d]` code over GF(q).
///
/// Immutable after construction; distance and interpolability are computed
/// eagerly and cached.
#[derive(Debug, Clone)]
pub struct LinearCode {
    q: u64,
    n: usize,
    k: usize,
    d: usize,
    interpolable: bool,
    /// `n x k` generator; codewords are `G * message`.
    generator: FieldMatrix,
}

impl LinearCode {
    /// Builds a code from an explicit `n x k` generator matrix. Computes and
    /// caches the brute-force distance and the interpolability flag.
    pub fn from_generator(generator: FieldMatrix) -> Result<Self, CodeError> {
        let n = generator.rows();
        let k = generator.cols();
        let q = generator.modulus();
        if generator.rank() != k {
            return Err(CodeError::RankDeficientGenerator);
        }
        let count = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if count > ENUMERATION_BUDGET as u128 {
            return Err(CodeError::BudgetExceeded(count.min(u64::MAX as u128) as u64));
        }
        let mut code = Self {
            q,
            n,
            k,
            d: 0,
            interpolable: false,
            generator,
        };
        code.d = code.brute_force_distance();
        code.interpolable = code.check_interpolable_internal();
        Ok(code)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum Hamming weight over nonzero codewords (cached brute force).
    pub fn d(&self) -> usize {
        self.d
    }

    /// `t = n - d + 1`: the number of coordinates that pin down a codeword.
    pub fn t(&self) -> usize {
        self.n - self.d + 1
    }

    pub fn generator(&self) -> &FieldMatrix {
        &self.generator
    }

    /// Whether every `t`-row submatrix of the generator has rank `t`.
    pub fn is_interpolable(&self) -> bool {
        self.interpolable
    }

    /// Number of codewords, `q^k`.
    pub fn size(&self) -> u64 {
        self.q.pow(self.k as u32)
    }

    /// Encodes a length-`k` message as `G * message`.
    pub fn encode(&self, message: &[FieldElement]) -> Result<Codeword, CodeError> {
        if message.len() != self.k {
            return Err(CodeError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        Ok(Codeword {
            values: self.generator.mul_vec(message)?,
        })
    }

    /// True iff `word` lies in the column span of the generator.
    pub fn is_codeword(&self, word: &Codeword) -> Result<bool, CodeError> {
        if word.len() != self.n {
            return Err(CodeError::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let sol = solve_linear(&self.generator, &word.values)?;
        Ok(sol.solution.is_some())
    }

    /// The message vector with lexicographic index `idx` (first symbol most
    /// significant).
    pub fn message_from_index(&self, idx: u64) -> Vec<FieldElement> {
        let mut digits = vec![0u64; self.k];
        let mut rem = idx;
        for i in (0..self.k).rev() {
            digits[i] = rem % self.q;
            rem /= self.q;
        }
        digits
            .into_iter()
            .map(|v| FieldElement::new(v, self.q).expect("valid modulus"))
            .collect()
    }

    /// Lexicographic index of a message vector.
    pub fn index_from_message(&self, message: &[FieldElement]) -> u64 {
        message.iter().fold(0u64, |acc, e| acc * self.q + e.value())
    }

    /// The codeword with lexicographic message index `idx`. Index 0 is the
    /// zero codeword; this is the canonical outcome order downstream.
    pub fn codeword_from_index(&self, idx: u64) -> Codeword {
        self.encode(&self.message_from_index(idx))
            .expect("message has length k")
    }

    /// The lexicographic message index of a codeword, or `None` if the word
    /// is not in the code.
    pub fn index_of_codeword(&self, word: &Codeword) -> Result<Option<u64>, CodeError> {
        if word.len() != self.n {
            return Err(CodeError::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let sol = solve_linear(&self.generator, &word.values)?;
        // Full column rank makes the preimage unique when it exists.
        Ok(sol.solution.map(|m| self.index_from_message(&m)))
    }

    /// All codewords in canonical (lexicographic message) order.
    pub fn enumerate_codewords(&self) -> Vec<Codeword> {
        (0..self.size()).map(|i| self.codeword_from_index(i)).collect()
    }

    fn brute_force_distance(&self) -> usize {
        (1..self.size())
            .map(|i| self.codeword_from_index(i).weight())
            .min()
            .expect("code has at least one nonzero codeword (k >= 1)")
    }

    fn check_interpolable_internal(&self) -> bool {
        let t = self.t();
        if t != self.k {
            // Rows live in a k-dimensional space: t rows can only have rank t
            // when t = k, so interpolability forces the code to be MDS.
            return false;
        }
        // Every t-subset of rows must be linearly independent.
        let mut combo: Vec<usize> = (0..t).collect();
        loop {
            if self.generator.select_rows(&combo).rank() != t {
                return false;
            }
            // Next combination in lexicographic order.
            let mut i = t;
            loop {
                if i == 0 {
                    return true;
                }
                i -= 1;
                if combo[i] != i + self.n - t {
                    combo[i] += 1;
                    for j in i + 1..t {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// The unique codeword taking `values[j]` at coordinate `coords[j]`.
    ///
    /// Requires an interpolable code and `t` distinct coordinates; uniqueness
    /// follows because two codewords agreeing on `t = n - d + 1` coordinates
    /// would differ in fewer than `d` places.
    pub fn interpolate(
        &self,
        coords: &[usize],
        values: &[FieldElement],
    ) -> Result<Codeword, CodeError> {
        if !self.interpolable {
            return Err(CodeError::NotInterpolable);
        }
        let t = self.t();
        if coords.len() != t || values.len() != t {
            return Err(CodeError::LengthMismatch {
                expected: t,
                got: coords.len().max(values.len()),
            });
        }
        let mut seen = vec![false; self.n];
        for &c in coords {
            if c >= self.n || seen[c] {
                return Err(CodeError::BadCoordinates);
            }
            seen[c] = true;
        }
        let sub = self.generator.select_rows(coords);
        let sol = solve_linear(&sub, values)?;
        let message = sol
            .solution
            .expect("interpolable: t x k system with rank t is solvable");
        self.encode(&message)
    }
}

/// Builds the Reed–Solomon code of degree `<= s` evaluated at `eval_points`
/// (defaults to `0, 1, ..., n-1` when `None`): an interpolable
/// `[n, s+1, n-s]` code over GF(q).
pub fn make_reed_solomon(
    q: u64,
    n: usize,
    s: usize,
    eval_points: Option<&[u64]>,
) -> Result<LinearCode, CodeError> {
    if n as u64 > q {
        return Err(CodeError::BlocklengthTooLarge { n, q });
    }
    if s >= n {
        return Err(CodeError::DegreeTooLarge { s, n });
    }
    let default_points: Vec<u64>;
    let points: &[u64] = match eval_points {
        Some(p) => p,
        None => {
            default_points = (0..n as u64).collect();
            &default_points
        }
    };
    if points.len() != n {
        return Err(CodeError::LengthMismatch {
            expected: n,
            got: points.len(),
        });
    }
    let elems = points
        .iter()
        .map(|&p| FieldElement::new(p, q))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..n {
        for j in i + 1..n {
            if elems[i] == elems[j] {
                return Err(CodeError::RepeatedEvalPoints);
            }
        }
    }
    // Generator column j is the evaluation of x^j at the points.
    let k = s + 1;
    let mut entries = Vec::with_capacity(n * k);
    for &x in &elems {
        for j in 0..k {
            entries.push(x.pow(j as u64));
        }
    }
    let generator = FieldMatrix::new(n, k, entries)?;
    LinearCode::from_generator(generator)
}
