//! Exact integer linear algebra: Smith normal form, saturated kernel
//! lattices, sublattice indices and determinants.
//!
//! Everything here works over [`BigInt`], so pivoting can never overflow.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    /// Builds a matrix from row-major entries. Both dimensions must be at least one.
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                context: "integer matrix",
                expected: 1,
                found: 0,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "integer matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[i64]>>(rows: usize, columns: &[C]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            assert_eq!(col.len(), rows, "column length");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    /// Zero matrix; unlike [`IntMatrix::new`] this allows an empty dimension
    /// (a rank-zero kernel basis has no columns).
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, indices.len());
        for (k, &j) in indices.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, k)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "integer matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Entries as `f64`, row-major.
    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.data
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += factor * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[source * self.cols + j] * factor;
            self.data[target * self.cols + j] += v;
        }
    }

    /// col[target] += factor * col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + source] * factor;
            self.data[i * self.cols + target] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[i * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = &mut self.data[i * self.cols + j];
            *v = -std::mem::take(v);
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(ToString::to_string).collect())
            .collect();
        write!(f, "IntMatrix{rows:?}")
    }
}

/// `U · A · V = S` with `U`, `V` unimodular and `S` diagonal in Smith form.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// The diagonal of `S`, including trailing zeros, of length `min(rows, cols)`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s[(i, i)].clone())
            .collect()
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.invariant_factors()
            .iter()
            .filter(|d| !d.is_zero())
            .count()
    }
}

/// Smith normal form by gcd row/column reduction with smallest-pivot selection.
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let (m, n) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = smallest_nonzero(&s, t) else {
                return SnfDecomposition { u, s, v };
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = s[(t, t)].clone();
            let mut dirty = false;
            for i in t + 1..m {
                let q = s[(i, t)].div_floor(&pivot);
                if !q.is_zero() {
                    let f = -q;
                    s.add_row_multiple(i, t, &f);
                    u.add_row_multiple(i, t, &f);
                }
                dirty |= !s[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = s[(t, j)].div_floor(&pivot);
                if !q.is_zero() {
                    let f = -q;
                    s.add_col_multiple(j, t, &f);
                    v.add_col_multiple(j, t, &f);
                }
                dirty |= !s[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }

            // pivot must divide the remaining block
            let offender = (t + 1..m)
                .find(|&i| (t + 1..n).any(|j| !s[(i, j)].is_multiple_of(&pivot)));
            if let Some(i) = offender {
                let one = BigInt::one();
                s.add_row_multiple(t, i, &one);
                u.add_row_multiple(t, i, &one);
                continue;
            }
            break;
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfDecomposition { u, s, v }
}

fn smallest_nonzero(s: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in t..s.rows {
        for j in t..s.cols {
            let a = s[(i, j)].abs();
            if a.is_zero() {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b)| a < *b) {
                best = Some(((i, j), a));
            }
        }
    }
    best.map(|(pos, _)| pos)
}

/// Columns form a ℤ-basis of the saturated kernel lattice `{x ∈ ℤ^cols : A x = 0}`.
///
/// The basis is echelonized and each vector's leading entry is positive, so
/// the output is deterministic for a given matrix.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    let free: Vec<usize> = (rank..a.cols).collect();
    let raw = snf.v.select_columns(&free);
    echelonize_columns(&raw)
}

/// Row-style Hermite reduction of the column set; preserves the lattice spanned.
fn echelonize_columns(basis: &IntMatrix) -> IntMatrix {
    let mut b = basis.transpose();
    let (k, d) = (b.rows, b.cols);
    let mut pivot_row = 0;
    for col in 0..d {
        if pivot_row == k {
            break;
        }
        loop {
            let candidate = (pivot_row..k)
                .filter(|&i| !b[(i, col)].is_zero())
                .min_by(|&x, &y| b[(x, col)].abs().cmp(&b[(y, col)].abs()));
            let Some(p) = candidate else { break };
            b.swap_rows(pivot_row, p);
            let pivot = b[(pivot_row, col)].clone();
            let mut done = true;
            for i in pivot_row + 1..k {
                let q = b[(i, col)].div_floor(&pivot);
                if !q.is_zero() {
                    b.add_row_multiple(i, pivot_row, &-q);
                }
                done &= b[(i, col)].is_zero();
            }
            if done {
                break;
            }
        }
        if b[(pivot_row, col)].is_zero() {
            continue;
        }
        if b[(pivot_row, col)].is_negative() {
            b.negate_row(pivot_row);
        }
        let pivot = b[(pivot_row, col)].clone();
        for i in 0..pivot_row {
            let q = b[(i, col)].div_floor(&pivot);
            if !q.is_zero() {
                b.add_row_multiple(i, pivot_row, &-q);
            }
        }
        pivot_row += 1;
    }
    let mut out = b.transpose();
    for j in 0..out.cols {
        let lead = (0..out.rows).find(|&i| !out[(i, j)].is_zero());
        if lead.is_some_and(|i| out[(i, j)].is_negative()) {
            out.negate_col(j);
        }
    }
    out
}

/// Index of a sublattice of ℤⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeIndex {
    Finite(BigInt),
    Infinite,
}

impl LatticeIndex {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            LatticeIndex::Finite(v) => Some(v),
            LatticeIndex::Infinite => None,
        }
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeIndex::Finite(v) => write!(f, "{v}"),
            LatticeIndex::Infinite => f.write_str("infinite"),
        }
    }
}

/// `[ℤⁿ : ⟨columns⟩]` where `n` is the row count of `generators`.
pub fn sublattice_index(generators: &IntMatrix) -> LatticeIndex {
    let n = generators.rows;
    if generators.cols == 0 {
        return if n == 0 {
            LatticeIndex::Finite(BigInt::one())
        } else {
            LatticeIndex::Infinite
        };
    }
    let snf = smith_normal_form(generators);
    if snf.rank() < n {
        return LatticeIndex::Infinite;
    }
    LatticeIndex::Finite(snf.invariant_factors().iter().product())
}

/// Exact `|det A|` by fraction-free (Bareiss) elimination.
pub fn abs_determinant(a: &IntMatrix) -> Result<BigInt> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            context: "determinant of non-square matrix",
            expected: a.rows,
            found: a.cols,
        });
    }
    let n = a.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                return Ok(BigInt::zero());
            };
            m.swap_rows(k, p);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                m[(i, j)] = num / &prev;
            }
        }
        prev = m[(k, k)].clone();
    }
    Ok(m[(n - 1, n - 1)].abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn check_snf(a: &IntMatrix) -> SnfDecomposition {
        let snf = smith_normal_form(a);
        assert_eq!(snf.u.mul(a).unwrap().mul(&snf.v).unwrap(), snf.s);
        assert_eq!(abs_determinant(&snf.u).unwrap(), big(1));
        assert_eq!(abs_determinant(&snf.v).unwrap(), big(1));
        let d = snf.invariant_factors();
        for i in 0..snf.s.rows() {
            for j in 0..snf.s.cols() {
                if i != j {
                    assert!(snf.s[(i, j)].is_zero());
                }
            }
        }
        for w in d.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        snf
    }

    #[test]
    fn snf_identity() {
        let snf = check_snf(&IntMatrix::identity(2));
        assert_eq!(snf.s, IntMatrix::identity(2));
        assert_eq!(snf.u, IntMatrix::identity(2));
        assert_eq!(snf.v, IntMatrix::identity(2));
    }

    #[test]
    fn snf_small_examples() {
        let snf = check_snf(&IntMatrix::from_rows(&[[2, 4], [6, 8]]));
        assert_eq!(snf.invariant_factors(), vec![big(2), big(4)]);
        let snf = check_snf(&IntMatrix::from_rows(&[[2, 0], [0, 3]]));
        assert_eq!(snf.invariant_factors(), vec![big(1), big(6)]);
    }

    #[test]
    fn snf_rectangular_and_zero() {
        check_snf(&IntMatrix::from_rows(&[[1, 0, -1], [0, 1, -1]]));
        check_snf(&IntMatrix::from_rows(&[[0, 0], [0, 0], [0, 0]]));
        let snf = check_snf(&IntMatrix::from_rows(&[[4, 6, 10]]));
        assert_eq!(snf.invariant_factors(), vec![big(2)]);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&IntMatrix::from_rows(&[[1, -1]]));
        assert_eq!(k, IntMatrix::from_columns(2, &[[1, 1]]));
        let k = kernel_basis(&IntMatrix::from_rows(&[[1, 0, -1], [0, 1, -1]]));
        assert_eq!(k, IntMatrix::from_columns(3, &[[1, 1, 1]]));
        let k = kernel_basis(&IntMatrix::from_rows(&[[1, -2]]));
        assert_eq!(k, IntMatrix::from_columns(2, &[[2, 1]]));
    }

    #[test]
    fn kernel_of_square_normals_is_echelonized() {
        let k = kernel_basis(&IntMatrix::from_rows(&[[1, -1, 0, 0], [0, 0, 1, -1]]));
        assert_eq!(k, IntMatrix::from_columns(4, &[[1, 1, 0, 0], [0, 0, 1, 1]]));
    }

    #[test]
    fn kernel_of_full_rank_square_is_empty() {
        let k = kernel_basis(&IntMatrix::from_rows(&[[2, 1], [1, 1]]));
        assert_eq!(k.cols(), 0);
        assert_eq!(k.rows(), 2);
    }

    #[test]
    fn index_examples() {
        let idx = |cols: &[[i64; 2]]| sublattice_index(&IntMatrix::from_columns(2, cols));
        assert_eq!(idx(&[[1, 0], [0, 1]]), LatticeIndex::Finite(big(1)));
        assert_eq!(idx(&[[1, 0], [0, 1], [-1, -1]]), LatticeIndex::Finite(big(1)));
        assert_eq!(idx(&[[2, 0], [0, 3]]), LatticeIndex::Finite(big(6)));
        assert_eq!(idx(&[[1, 2], [2, 4]]), LatticeIndex::Infinite);
        assert_eq!(sublattice_index(&IntMatrix::zeros(2, 0)), LatticeIndex::Infinite);
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(abs_determinant(&IntMatrix::identity(3)).unwrap(), big(1));
        assert_eq!(
            abs_determinant(&IntMatrix::from_columns(2, &[[1, 0], [-1, -1]])).unwrap(),
            big(1)
        );
        assert_eq!(abs_determinant(&IntMatrix::from_rows(&[[-2]])).unwrap(), big(2));
        assert_eq!(
            abs_determinant(&IntMatrix::from_rows(&[[0, 1], [1, 0]])).unwrap(),
            big(1)
        );
        assert!(abs_determinant(&IntMatrix::from_rows(&[[1, 2, 3]])).is_err());
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(IntMatrix::new(0, 2, vec![]).is_err());
        assert!(IntMatrix::new(2, 2, vec![big(1)]).is_err());
        assert!(IntMatrix::new(1, 1, vec![big(1)]).is_ok());
    }
}
