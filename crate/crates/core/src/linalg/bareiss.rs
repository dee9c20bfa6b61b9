//! Fraction-free (Bareiss) elimination over Gaussian rationals.
//!
//! Rows are first scaled to Gaussian integers by the lcm of their
//! denominators; every Bareiss quotient is then an exact division and the
//! working entries are minors of the scaled matrix.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{DenseMatrix, Normality, NormalityDiagnostic};
use crate::error::{MopucError, Result};
use crate::scalar::{rational_to_f64, GaussianRational, Scalar};

fn row_scale(row: &[GaussianRational]) -> BigInt {
    row.iter()
        .flat_map(|x| [x.re.denom(), x.im.denom()])
        .fold(BigInt::one(), |acc, d| acc.lcm(d))
}

struct Eliminated {
    // upper-triangular working matrix, augmented columns to the right
    m: Vec<Vec<GaussianRational>>,
    n: usize,
    // det(A) * prod(scales) * sign, i.e. the last pivot, or None when singular
    det_scaled: Option<GaussianRational>,
    scale_product: BigInt,
}

fn eliminate(a: &DenseMatrix<GaussianRational>, rhs: &[Vec<GaussianRational>]) -> Eliminated {
    assert!(a.is_square(), "Bareiss needs a square matrix");
    let n = a.nrows();
    let mut scale_product = BigInt::one();
    let mut m: Vec<Vec<GaussianRational>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            let s = row_scale(&row);
            scale_product *= &s;
            let s = GaussianRational::new(BigRational::from_integer(s), BigRational::zero());
            row.into_iter().map(|x| x * s.clone()).collect()
        })
        .collect();
    let width = n + rhs.len();

    let mut prev = <GaussianRational as Scalar>::one();
    let mut negate = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_exact_zero()) else {
            return Eliminated {
                m,
                n,
                det_scaled: None,
                scale_product,
            };
        };
        if p != k {
            m.swap(p, k);
            negate = !negate;
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..width {
                row[j] = (pivot_row[k].clone() * row[j].clone() - lead.clone() * pivot_row[j].clone())
                    / prev.clone();
            }
            row[k] = <GaussianRational as Scalar>::zero();
        }
        prev = m[k][k].clone();
    }
    let last = if n == 0 { <GaussianRational as Scalar>::one() } else { m[n - 1][n - 1].clone() };
    Eliminated {
        m,
        n,
        det_scaled: Some(if negate { -last } else { last }),
        scale_product,
    }
}

pub fn determinant(a: &DenseMatrix<GaussianRational>) -> GaussianRational {
    let e = eliminate(a, &[]);
    match e.det_scaled {
        None => <GaussianRational as Scalar>::zero(),
        Some(d) => {
            let s = GaussianRational::new(BigRational::from_integer(e.scale_product), BigRational::zero());
            d / s
        }
    }
}

pub fn solve(
    a: &DenseMatrix<GaussianRational>,
    rhs: &[Vec<GaussianRational>],
) -> Result<Vec<Vec<GaussianRational>>> {
    let e = eliminate(a, rhs);
    if e.det_scaled.is_none() {
        return Err(MopucError::Singular);
    }
    let n = e.n;
    Ok((0..rhs.len())
        .map(|c| {
            let col = n + c;
            let mut x = vec![<GaussianRational as Scalar>::zero(); n];
            for i in (0..n).rev() {
                let mut acc = e.m[i][col].clone();
                for j in i + 1..n {
                    acc = acc - e.m[i][j].clone() * x[j].clone();
                }
                x[i] = acc / e.m[i][i].clone();
            }
            x
        })
        .collect())
}

pub fn assess(a: &DenseMatrix<GaussianRational>) -> NormalityDiagnostic<GaussianRational> {
    if a.nrows() == 0 {
        return NormalityDiagnostic::trivially_normal();
    }
    let det = determinant(a);
    let verdict = if det.is_exact_zero() {
        Normality::Singular
    } else {
        Normality::Normal
    };
    let scaled_det = if det.is_exact_zero() {
        0.0
    } else {
        let rows: BigRational = (0..a.nrows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .fold(BigRational::zero(), |acc, x| acc + num_complex::Complex::norm_sqr(x))
            })
            .fold(BigRational::one(), |acc, r| acc * r);
        rational_to_f64(&(num_complex::Complex::norm_sqr(&det) / rows)).sqrt()
    };
    NormalityDiagnostic {
        verdict,
        det,
        rcond: None,
        scaled_det,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
        GaussianRational::gaussian(re, im)
    }

    fn q(n: i64, d: i64) -> GaussianRational {
        GaussianRational::ratio(n, d)
    }

    // cofactor expansion, independent of elimination
    fn det_by_cofactors(m: &[Vec<GaussianRational>]) -> GaussianRational {
        let n = m.len();
        if n == 0 {
            return <GaussianRational as Scalar>::one();
        }
        let mut acc = <GaussianRational as Scalar>::zero();
        for j in 0..n {
            let minor: Vec<Vec<_>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = m[0][j].clone() * det_by_cofactors(&minor);
            acc = if j % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    #[test]
    fn determinant_matches_cofactors() {
        let rows = vec![
            vec![g((1, 2), (1, 3)), q(2, 1), g((0, 1), (-1, 1)), q(1, 7)],
            vec![q(0, 1), g((3, 4), (1, 1)), q(-1, 2), q(5, 3)],
            vec![g((2, 1), (2, 1)), q(1, 1), q(0, 1), g((-1, 5), (1, 2))],
            vec![q(1, 9), q(0, 1), g((1, 1), (1, 1)), q(1, 1)],
        ];
        let a = DenseMatrix::from_rows(rows.clone());
        assert_eq!(determinant(&a), det_by_cofactors(&rows));
    }

    #[test]
    fn two_by_two_moment_matrix() {
        // moment matrix of (BS(1/2), BS(-1/3)) at (1,1)
        let a = DenseMatrix::from_rows(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 1), q(-1, 3)]]);
        assert_eq!(determinant(&a), q(-5, 6));
        let x = solve(&a, &[vec![q(-1, 4), q(-1, 9)]]).unwrap().remove(0);
        assert_eq!(x, vec![q(-1, 6), q(-1, 6)]);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_rows(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 1), q(1, 2)]]);
        assert!(determinant(&a).is_exact_zero());
        assert!(solve(&a, &[vec![q(1, 1), q(1, 1)]]).is_err());
        let d = assess(&a);
        assert_eq!(d.verdict, Normality::Singular);
        assert_eq!(d.scaled_det, 0.0);
    }

    #[test]
    fn zero_leading_entry_pivots() {
        let a = DenseMatrix::from_rows(vec![vec![q(0, 1), q(2, 3)], vec![q(1, 5), q(1, 1)]]);
        assert_eq!(determinant(&a), q(-2, 15));
        let x = solve(&a, &[vec![q(1, 1), q(0, 1)]]).unwrap().remove(0);
        assert_eq!(a.mul_vec(&x), vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn hadamard_ratio_of_identity_is_one() {
        let d = assess(&DenseMatrix::<GaussianRational>::identity(4));
        assert!((d.scaled_det - 1.0).abs() < 1e-15);
    }
}
