//! Small dense matrices over any [`Scalar`], with partial-pivot LU.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Condition estimate above which a frame solve logs a warning.
pub const CONDITION_WARN: f64 = 1e8;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn col(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn re(&self) -> Mat<f64> {
        self.map(|v| v.re())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn mul(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        let mut out = Mat::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..o.cols {
                    out[(r, c)] += a * o[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for c in 0..self.cols {
                    acc += self[(r, c)] * v[c];
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, o: &Mat<S>) -> Mat<S> {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - o[(r, c)])
    }

    pub fn add(&self, o: &Mat<S>) -> Mat<S> {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + o[(r, c)])
    }

    pub fn scale(&self, s: S) -> Mat<S> {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.re().abs()))
    }

    pub fn lu(&self) -> Result<Lu<S>> {
        Lu::new(self)
    }

    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        Ok(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Result<Mat<S>> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for c in 0..n {
            e[c] = S::one();
            let x = lu.solve(&e);
            e[c] = S::zero();
            for r in 0..n {
                inv[(r, c)] = x[r];
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> S {
        match self.lu() {
            Ok(lu) => lu.det(),
            Err(_) => S::zero(),
        }
    }
}

impl Mat<f64> {
    /// 1-norm condition number; infinite when singular.
    pub fn condition(&self) -> f64 {
        let norm1 = |m: &Mat<f64>| {
            (0..m.cols)
                .map(|c| (0..m.rows).map(|r| m[(r, c)].abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        match self.inverse() {
            Ok(inv) => norm1(self) * norm1(&inv),
            Err(_) => f64::INFINITY,
        }
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

/// `P·A = L·U`, pivoting on the real part of each candidate.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    n: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
    sign: f64,
}

impl<S: Scalar> Lu<S> {
    fn new(a: &Mat<S>) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch { expected: a.rows, got: a.cols });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].re().abs();
            for r in k + 1..n {
                let v = lu[r * n + k].re().abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 1e-14 * scale) {
                return Err(Error::SingularFrame { pivot: best });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / piv;
                lu[r * n + k] = f;
                for c in k + 1..n {
                    let t = lu[k * n + c];
                    lu[r * n + c] -= f * t;
                }
            }
        }
        Ok(Lu { n, lu, perm, sign })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let t = self.lu[r * n + c] * x[c];
                x[r] -= t;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let t = self.lu[r * n + c] * x[c];
                x[r] -= t;
            }
            x[r] = x[r] / self.lu[r * n + r];
        }
        x
    }

    pub fn det(&self) -> S {
        let mut d = S::cst(self.sign);
        for k in 0..self.n {
            d *= self.lu[k * self.n + k];
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_needs_pivoting() {
        let a = Mat::from_rows(3, 3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let x = a.solve(&[3.0, 2.0, 4.0]).unwrap();
        let back = a.mul_vec(&x);
        for (u, v) in back.iter().zip([3.0, 2.0, 4.0]) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!((a.det() - (-5.0)).abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = Mat::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(a.inverse(), Err(Error::SingularFrame { .. })));
        assert!(a.condition().is_infinite());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = Mat::from_rows(3, 3, vec![4.0, -1.0, 0.5, 2.0, 3.0, 1.0, -1.0, 0.0, 2.0]);
        let p = a.mul(&a.inverse().unwrap());
        assert!(p.sub(&Mat::identity(3)).max_abs() < 1e-14);
    }
}
