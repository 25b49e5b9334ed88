//! Dense matrices over a Witt ring.
//!
//! `W_n(F_q)` is a local principal ideal ring whose ideals are the `p^k W`,
//! so elimination always pivots on an entry of minimal valuation. This gives
//! inverses of unimodular matrices, ranks of reductions mod `p`, and a Smith
//! form `U A V = diag(p^v_1, ...)` with `U`, `V` invertible.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::witt::{RingError, WittElement, WittRing};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not invertible over {0}")]
    NotInvertible(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    ring: WittRing,
    rows: usize,
    cols: usize,
    data: Vec<WittElement>,
}

/// `u * a * v = diag(p^valuations[i])`, with `u`, `v` invertible. A valuation
/// equal to `n` stands for a zero diagonal entry.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: Matrix,
    pub v: Matrix,
    pub valuations: Vec<usize>,
}

impl Matrix {
    pub fn zeros(ring: &WittRing, rows: usize, cols: usize) -> Self {
        Matrix { ring: ring.clone(), rows, cols, data: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: &WittRing, size: usize) -> Self {
        let mut m = Self::zeros(ring, size, size);
        for i in 0..size {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_fn(ring: &WittRing, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> WittElement) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let x = f(i, j);
                assert_eq!(x.ring(), ring, "matrix entry from another ring");
                data.push(x);
            }
        }
        Matrix { ring: ring.clone(), rows, cols, data }
    }

    /// Matrix with integer entries, given row by row.
    pub fn from_ints(ring: &WittRing, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged integer matrix");
        Self::from_fn(ring, r, c, |i, j| ring.from_int(rows[i][j]))
    }

    pub fn from_rows(ring: &WittRing, rows: Vec<Vec<WittElement>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("rows have different lengths".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for x in rows.into_iter().flatten() {
            if x.ring() != ring {
                return Err(RingError::Mismatch { left: ring.to_string(), right: x.ring().to_string() }.into());
            }
            data.push(x);
        }
        Ok(Matrix { ring: ring.clone(), rows: r, cols: c, data })
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &WittElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: WittElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> Vec<WittElement> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<WittElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<WittElement>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn entries(&self) -> &[WittElement] {
        &self.data
    }

    /// Columns `cols` of `self`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(&self.ring, self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::Shape(format!("cannot concatenate {} and {} rows", self.rows, other.rows)));
        }
        Ok(Matrix::from_fn(&self.ring, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn map(&self, f: impl Fn(&WittElement) -> WittElement) -> Matrix {
        let data: Vec<WittElement> = self.data.iter().map(f).collect();
        let ring = data.first().map_or_else(|| self.ring.clone(), |x| x.ring().clone());
        Matrix { ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.ring, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn frobenius(&self) -> Matrix {
        self.map(|x| x.frobenius())
    }

    pub fn frobenius_inverse(&self) -> Matrix {
        self.map(|x| x.frobenius_inverse())
    }

    pub fn scale(&self, c: &WittElement) -> Matrix {
        self.map(|x| x * c)
    }

    pub fn scale_int(&self, k: u64) -> Matrix {
        self.map(|x| x.scale_int(k))
    }

    /// Entry-wise reduction mod `p`, over the residue field.
    pub fn residue(&self) -> Matrix {
        let res = self.ring.residue_field();
        let data = self.data.iter().map(|x| x.residue()).collect();
        Matrix { ring: res, rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Smallest valuation of an entry (`n` for the zero matrix).
    pub fn valuation(&self) -> usize {
        self.data.iter().map(|x| x.valuation()).min().unwrap_or(self.ring.n())
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.ring != other.ring {
            return Err(RingError::Mismatch { left: self.ring.to_string(), right: other.ring.to_string() }.into());
        }
        let mut out = Matrix::zeros(&self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a * other.get(k, j);
                    let cur = out.get(i, j) + &t;
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(&WittElement, &WittElement) -> WittElement) -> Result<Matrix, LinalgError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::Shape(format!(
                "{}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[WittElement]) -> Vec<WittElement> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.ring.zero();
                for (j, x) in v.iter().enumerate() {
                    acc = acc + self.get(i, j) * x;
                }
                acc
            })
            .collect()
    }

    /// Rank over `F_q` of the reduction mod `p`.
    pub fn rank_mod_p(&self) -> usize {
        let mut m = self.residue();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(r) = (rank..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            m.swap_rows(rank, r);
            let inv = m.get(rank, c).inverse().expect("nonzero residue is a unit");
            for i in 0..m.rows {
                if i != rank && !m.get(i, c).is_zero() {
                    let f = m.get(i, c) * &inv;
                    m.add_row_multiple(i, rank, &-f);
                }
            }
            rank += 1;
        }
        rank
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

    /// `row[dst] += f * row[src]`.
    fn add_row_multiple(&mut self, dst: usize, src: usize, f: &WittElement) {
        for j in 0..self.cols {
            let t = self.get(dst, j) + &(f * self.get(src, j));
            self.set(dst, j, t);
        }
    }

    /// `col[dst] += f * col[src]`.
    fn add_col_multiple(&mut self, dst: usize, src: usize, f: &WittElement) {
        for i in 0..self.rows {
            let t = self.get(i, dst) + &(self.get(i, src) * f);
            self.set(i, dst, t);
        }
    }

    fn scale_row(&mut self, i: usize, f: &WittElement) {
        for j in 0..self.cols {
            let t = self.get(i, j) * f;
            self.set(i, j, t);
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank_mod_p() == self.rows
    }

    /// Gauss-Jordan inverse; requires the reduction mod `p` to be invertible.
    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(&self.ring, n);
        for c in 0..n {
            let r = (c..n)
                .find(|&r| a.get(r, c).is_unit())
                .ok_or_else(|| LinalgError::NotInvertible(self.ring.to_string()))?;
            a.swap_rows(c, r);
            inv.swap_rows(c, r);
            let pinv = a.get(c, c).inverse()?;
            a.scale_row(c, &pinv);
            inv.scale_row(c, &pinv);
            for i in 0..n {
                if i != c && !a.get(i, c).is_zero() {
                    let f = -a.get(i, c).clone();
                    a.add_row_multiple(i, c, &f);
                    inv.add_row_multiple(i, c, &f);
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn determinant(&self) -> Result<WittElement, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape(format!("{}x{} is not square", self.rows, self.cols)));
        }
        Ok(self.det_minor(&(0..self.cols).collect::<Vec<_>>(), 0))
    }

    fn det_minor(&self, cols: &[usize], row: usize) -> WittElement {
        if cols.is_empty() {
            return self.ring.one();
        }
        let mut acc = self.ring.zero();
        for (k, &c) in cols.iter().enumerate() {
            let a = self.get(row, c);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a * self.det_minor(&rest, row + 1);
            acc = if k % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    /// Smith normal form over the local ring.
    pub fn smith(&self) -> SmithForm {
        let n = self.ring.n();
        let mut a = self.clone();
        let mut u = Matrix::identity(&self.ring, self.rows);
        let mut v = Matrix::identity(&self.ring, self.cols);
        let steps = self.rows.min(self.cols);
        let mut valuations = Vec::with_capacity(steps);
        for k in 0..steps {
            let mut best: Option<(usize, usize, usize)> = None;
            for i in k..a.rows {
                for j in k..a.cols {
                    let val = a.get(i, j).valuation();
                    if best.is_none_or(|(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                    }
                }
            }
            let (val, i, j) = best.expect("nonempty submatrix");
            if val >= n {
                valuations.extend(std::iter::repeat_n(n, steps - k));
                break;
            }
            a.swap_rows(k, i);
            u.swap_rows(k, i);
            a.swap_cols(k, j);
            v.swap_cols(k, j);
            let unit = a.get(k, k).div_p_pow(val).expect("pivot valuation");
            let uinv = unit.inverse().expect("pivot divided by its valuation is a unit");
            a.scale_row(k, &uinv);
            u.scale_row(k, &uinv);
            for r in k + 1..a.rows {
                if a.get(r, k).is_zero() {
                    continue;
                }
                let f = -a.get(r, k).div_p_pow(val).expect("minimal pivot divides the column");
                a.add_row_multiple(r, k, &f);
                u.add_row_multiple(r, k, &f);
            }
            for c in k + 1..a.cols {
                if a.get(k, c).is_zero() {
                    continue;
                }
                let f = -a.get(k, c).div_p_pow(val).expect("minimal pivot divides the row");
                a.add_col_multiple(c, k, &f);
                v.add_col_multiple(c, k, &f);
            }
            valuations.push(val);
        }
        SmithForm { u, v, valuations }
    }

    /// Valuations of the elementary divisors, ascending.
    pub fn elementary_divisor_valuations(&self) -> Vec<usize> {
        self.smith().valuations
    }

    /// Whether every column of `other` lies in the column span of `self`
    /// modulo `p^k`.
    pub fn spans_columns_mod(&self, other: &Matrix, k: usize) -> bool {
        assert_eq!(self.rows, other.rows, "column spaces of different ambient rank");
        let k = k.min(self.ring.n());
        let s = self.smith();
        let ub = s.u.try_mul(other).expect("shapes agree");
        (0..ub.rows).all(|i| {
            let need = s.valuations.get(i).copied().unwrap_or(k).min(k);
            (0..ub.cols).all(|j| ub.get(i, j).valuation() >= need)
        })
    }

    /// Whether every column of `other` lies in the column span of `self`.
    pub fn spans_columns(&self, other: &Matrix) -> bool {
        self.spans_columns_mod(other, self.ring.n())
    }

    /// Equality of column spans modulo `p^k`.
    pub fn same_column_span_mod(&self, other: &Matrix, k: usize) -> bool {
        self.spans_columns_mod(other, k) && other.spans_columns_mod(self, k)
    }

    /// Image of every entry under a ring map.
    pub fn map_to(&self, ring: &WittRing, f: impl Fn(&WittElement) -> WittElement) -> Matrix {
        Matrix::from_fn(ring, self.rows, self.cols, |i, j| f(self.get(i, j)))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix over {}:\n{}", self.ring, self)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        &self * &rhs
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.map(|x| -x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> WittRing {
        WittRing::with_order(9, 3).unwrap()
    }

    #[test]
    fn inverse_round_trip() {
        let r = ring();
        let a = Matrix::from_ints(&r, &[vec![1, 3, 0], vec![2, 1, 9], vec![0, 4, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Matrix::identity(&r, 3));
        assert_eq!(&inv * &a, Matrix::identity(&r, 3));
    }

    #[test]
    fn non_unit_determinant_is_not_invertible() {
        let r = ring();
        let a = Matrix::from_ints(&r, &[vec![3, 0], vec![0, 1]]);
        assert!(a.inverse().is_err());
        assert_eq!(a.determinant().unwrap(), r.from_int(3));
    }

    #[test]
    fn smith_form_diagonalises() {
        let r = ring();
        let a = Matrix::from_ints(&r, &[vec![0, 0, 3, 0], vec![0, 0, 0, 1], vec![-3, 0, 0, 0], vec![0, -1, 0, 0]]);
        let s = a.smith();
        assert_eq!(s.valuations, vec![0, 0, 1, 1]);
        let d = &(&s.u * &a) * &s.v;
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { r.from_int(3i64.pow(s.valuations[i] as u32)) } else { r.zero() };
                assert_eq!(d.get(i, j), &expected);
            }
        }
        assert!(s.u.is_invertible() && s.v.is_invertible());
    }

    #[test]
    fn smith_of_zero_matrix() {
        let r = ring();
        assert_eq!(Matrix::zeros(&r, 2, 3).elementary_divisor_valuations(), vec![3, 3]);
    }

    #[test]
    fn rank_mod_p_ignores_p_multiples() {
        let r = ring();
        let a = Matrix::from_ints(&r, &[vec![1, 2], vec![3, 6]]);
        assert_eq!(a.rank_mod_p(), 1);
        let b = Matrix::from_ints(&r, &[vec![1, 2], vec![0, 3]]);
        assert_eq!(b.rank_mod_p(), 1);
        assert_eq!(Matrix::identity(&r, 4).rank_mod_p(), 4);
    }

    #[test]
    fn column_span_containment() {
        let r = ring();
        // span(e1, 3 e2) inside Z^2
        let a = Matrix::from_ints(&r, &[vec![1, 0], vec![0, 3]]);
        let b = Matrix::from_ints(&r, &[vec![5], vec![9]]);
        let c = Matrix::from_ints(&r, &[vec![0], vec![1]]);
        assert!(a.spans_columns(&b));
        assert!(!a.spans_columns(&c));
        assert!(a.spans_columns_mod(&c, 0));
        assert!(a.same_column_span_mod(&Matrix::from_ints(&r, &[vec![1, 1], vec![3, 0]]), 3));
    }
}
