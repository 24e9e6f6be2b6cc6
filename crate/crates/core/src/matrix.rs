//! Dense matrices over a [`Scalar`]. Exact determinants use fraction-free
//! Bareiss elimination; float determinants use partially pivoted Gaussian
//! elimination.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer-entry constructor, mostly for tests and fixtures.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_i64(v)).collect())
                .collect(),
        )
        .expect("ragged literal")
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

    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix<S> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| self.at(i, j).approx_eq(self.at(j, i))))
    }

    pub fn mul(&self, other: &Matrix<S>) -> Result<Matrix<S>> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc = acc + self.at(i, k).clone() * other.at(k, j).clone();
            }
            acc
        }))
    }

    pub fn scale(&self, c: &S) -> Matrix<S> {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j).clone() * c.clone())
    }

    pub fn add(&self, other: &Matrix<S>) -> Result<Matrix<S>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in add".into()));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.at(i, j).clone() + other.at(i, j).clone()
        }))
    }

    /// Keeps the given rows and columns, in order.
    pub fn submatrix(&self, keep_rows: &[usize], keep_cols: &[usize]) -> Matrix<S> {
        Matrix::from_fn(keep_rows.len(), keep_cols.len(), |i, j| {
            self.at(keep_rows[i], keep_cols[j]).clone()
        })
    }

    /// Deletes row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> Matrix<S> {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.submatrix(&rows, &cols)
    }

    /// Block-diagonal matrix with `self` repeated twice.
    pub fn double_block_diagonal(&self) -> Matrix<S> {
        let n = self.rows;
        Matrix::from_fn(2 * n, 2 * self.cols, |i, j| {
            if i < n && j < self.cols {
                self.at(i, j).clone()
            } else if i >= n && j >= self.cols {
                self.at(i - n, j - self.cols).clone()
            } else {
                S::zero()
            }
        })
    }

    /// Determinant; the empty matrix has determinant one.
    pub fn determinant(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if S::EXACT {
            self.determinant_bareiss()
        } else {
            self.determinant_pivoted()
        }
    }

    /// Fraction-free Bareiss elimination; every division is exact.
    fn determinant_bareiss(&self) -> Result<S> {
        let n = self.rows;
        if n == 0 {
            return Ok(S::one());
        }
        let mut m = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut negate = false;
        let mut prev = S::one();
        for k in 0..n - 1 {
            if m[idx(k, k)].is_zero() {
                let Some(r) = (k + 1..n).find(|&r| !m[idx(r, k)].is_zero()) else {
                    return Ok(S::zero());
                };
                for j in 0..n {
                    m.swap(idx(k, j), idx(r, j));
                }
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[idx(i, j)].clone() * m[idx(k, k)].clone()
                        - m[idx(i, k)].clone() * m[idx(k, j)].clone();
                    m[idx(i, j)] = num / prev.clone();
                }
                m[idx(i, k)] = S::zero();
            }
            prev = m[idx(k, k)].clone();
        }
        let det = m[idx(n - 1, n - 1)].clone();
        Ok(if negate { -det } else { det })
    }

    /// Partially pivoted elimination for the float mode.
    fn determinant_pivoted(&self) -> Result<S> {
        let n = self.rows;
        if n == 0 {
            return Ok(S::one());
        }
        let mut m = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut det = S::one();
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&a, &b| {
                    m[idx(a, k)]
                        .magnitude()
                        .partial_cmp(&m[idx(b, k)].magnitude())
                        .unwrap()
                })
                .unwrap();
            if m[idx(pivot_row, k)].is_zero() {
                return Ok(S::zero());
            }
            if pivot_row != k {
                for j in 0..n {
                    m.swap(idx(k, j), idx(pivot_row, j));
                }
                det = -det;
            }
            det = det * m[idx(k, k)].clone();
            for i in k + 1..n {
                let f = m[idx(i, k)].clone() / m[idx(k, k)].clone();
                for j in k..n {
                    let delta = f.clone() * m[idx(k, j)].clone();
                    m[idx(i, j)] = m[idx(i, j)].clone() - delta;
                }
            }
        }
        Ok(det)
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix<S>> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::<S>::identity(n);
        for k in 0..n {
            let pivot_row = if S::EXACT {
                (k..n).find(|&r| !a.at(r, k).is_zero())
            } else {
                let best = (k..n).max_by(|&x, &y| {
                    a.at(x, k)
                        .magnitude()
                        .partial_cmp(&a.at(y, k).magnitude())
                        .unwrap()
                });
                best.filter(|&r| !a.at(r, k).is_zero())
            };
            let Some(r) = pivot_row else {
                return Err(Error::Singular("matrix is not invertible".into()));
            };
            if r != k {
                for j in 0..n {
                    let tmp = a.at(k, j).clone();
                    a.set(k, j, a.at(r, j).clone());
                    a.set(r, j, tmp);
                    let tmp = inv.at(k, j).clone();
                    inv.set(k, j, inv.at(r, j).clone());
                    inv.set(r, j, tmp);
                }
            }
            let pivot = a.at(k, k).clone();
            for j in 0..n {
                a.set(k, j, a.at(k, j).clone() / pivot.clone());
                inv.set(k, j, inv.at(k, j).clone() / pivot.clone());
            }
            for i in 0..n {
                if i == k || a.at(i, k).is_zero() {
                    continue;
                }
                let f = a.at(i, k).clone();
                for j in 0..n {
                    let da = f.clone() * a.at(k, j).clone();
                    a.set(i, j, a.at(i, j).clone() - da);
                    let di = f.clone() * inv.at(k, j).clone();
                    inv.set(i, j, inv.at(i, j).clone() - di);
                }
            }
        }
        Ok(inv)
    }

    /// Sylvester criterion on leading principal minors; exact in rational mode.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_square() || !self.is_symmetric() {
            return false;
        }
        let keep: Vec<usize> = (0..self.rows).collect();
        (1..=self.rows).all(|k| {
            let sub = self.submatrix(&keep[..k], &keep[..k]);
            match sub.determinant() {
                Ok(d) => d > S::zero(),
                Err(_) => false,
            }
        })
    }
}
