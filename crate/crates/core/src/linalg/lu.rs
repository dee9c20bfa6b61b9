//! LU factorization with partial pivoting over `Complex64`.

use num_complex::Complex64;

use super::{DenseMatrix, Normality, NormalityDiagnostic};
use crate::error::{MopucError, Result};
use crate::scalar::TolerancePolicy;

/// Below this reciprocal condition number a matrix is numerically singular
/// no matter what the policy says.
const SINGULAR_RCOND: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    // combined L (unit lower, below diagonal) and U
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    /// Fails only on an exactly zero pivot column.
    pub fn factor(a: &DenseMatrix<Complex64>) -> Result<Self> {
        let lu = Self::factor_unchecked(a);
        if lu.has_zero_pivot() {
            return Err(MopucError::Singular);
        }
        Ok(lu)
    }

    fn factor_unchecked(a: &DenseMatrix<Complex64>) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.nrows();
        let mut lu: Vec<Complex64> = (0..n).flat_map(|i| a.row(i).to_vec()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let ukj = lu[k * n + j];
                    lu[i * n + j] -= factor * ukj;
                }
            }
        }
        Lu { n, lu, perm, swaps }
    }

    fn has_zero_pivot(&self) -> bool {
        (0..self.n).any(|k| self.lu[k * self.n + k] == Complex64::new(0.0, 0.0))
    }

    pub fn determinant(&self) -> Complex64 {
        let prod = (0..self.n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * self.lu[k * self.n + k]);
        if self.swaps % 2 == 1 {
            -prod
        } else {
            prod
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    pub fn solve_many(&self, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        Ok(rhs.iter().map(|b| self.solve(b)).collect())
    }

    /// Exact reciprocal 1-norm condition number, via the explicit inverse.
    /// Fine for the matrix sizes we see.
    pub fn rcond(&self, a: &DenseMatrix<Complex64>) -> f64 {
        if self.has_zero_pivot() {
            return 0.0;
        }
        let n = self.n;
        let mut inv_norm: f64 = 0.0;
        for j in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            inv_norm = inv_norm.max(col.iter().map(|c| c.norm()).sum());
        }
        let a_norm = one_norm(a);
        if a_norm == 0.0 || !inv_norm.is_finite() {
            return 0.0;
        }
        1.0 / (a_norm * inv_norm)
    }
}

pub fn one_norm(a: &DenseMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn determinant(a: &DenseMatrix<Complex64>) -> Complex64 {
    if a.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Lu::factor_unchecked(a).determinant()
}

pub fn assess(a: &DenseMatrix<Complex64>, policy: &TolerancePolicy) -> NormalityDiagnostic<Complex64> {
    if a.nrows() == 0 {
        return NormalityDiagnostic::trivially_normal();
    }
    let lu = Lu::factor_unchecked(a);
    let det = lu.determinant();
    let rcond = lu.rcond(a);
    let row_norms: f64 = (0..a.nrows())
        .map(|i| a.row(i).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .product();
    let scaled_det = if row_norms > 0.0 { det.norm() / row_norms } else { 0.0 };
    let verdict = if rcond > policy.rcond_min {
        Normality::Normal
    } else if rcond > SINGULAR_RCOND {
        Normality::Indeterminate
    } else {
        Normality::Singular
    };
    NormalityDiagnostic {
        verdict,
        det,
        rcond: Some(rcond),
        scaled_det,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_complex_system() {
        let a = DenseMatrix::from_rows(vec![
            vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.5)],
            vec![c(-2.0, 1.0), c(1.0, 1.0), c(0.0, 2.0)],
        ]);
        let x_true = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)];
        let b = a.mul_vec(&x_true);
        let x = Lu::factor(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn needs_pivoting() {
        // zero in the (0,0) slot
        let a = DenseMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let lu = Lu::factor(&a).unwrap();
        assert_eq!(lu.determinant(), c(-1.0, 0.0));
        assert_eq!(lu.solve(&[c(2.0, 0.0), c(3.0, 0.0)]), vec![c(3.0, 0.0), c(2.0, 0.0)]);
        assert!((lu.rcond(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::from_rows(vec![vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(1.0, 0.0), c(0.5, 0.0)]]);
        assert!(Lu::factor(&a).is_err());
        let d = assess(&a, &TolerancePolicy::default());
        assert_eq!(d.verdict, Normality::Singular);
        assert_eq!(d.rcond, Some(0.0));
    }

    #[test]
    fn ill_conditioned_is_indeterminate() {
        let a = DenseMatrix::from_rows(vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(1.0 + 1e-12, 0.0)]]);
        let d = assess(&a, &TolerancePolicy::default());
        assert_eq!(d.verdict, Normality::Indeterminate);
    }
}
