//! Scalar field abstraction.
//!
//! Everything in the crate is generic over [`Scalar`], which has two
//! realizations: [`ComplexFloat`] (a pair of `f64`) and [`GaussianRational`]
//! (a pair of arbitrary-precision rationals). The exact backend answers
//! every zero test exactly and ignores the [`TolerancePolicy`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{MopucError, Result};
use crate::linalg::{self, DenseMatrix, NormalityDiagnostic};

pub type ComplexFloat = Complex64;
pub type GaussianRational = Complex<BigRational>;

/// Thresholds used by the float backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Absolute threshold for "is zero".
    pub zero_eps: f64,
    /// Residual threshold for identity checks.
    pub residual_tol: f64,
    /// Reciprocal condition number below which a moment matrix is not
    /// treated as normal.
    pub rcond_min: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            zero_eps: 1e-12,
            residual_tol: 1e-9,
            rcond_min: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn new(zero_eps: f64, residual_tol: f64, rcond_min: f64) -> Result<Self> {
        let policy = TolerancePolicy {
            zero_eps,
            residual_tol,
            rcond_min,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zero_eps", self.zero_eps),
            ("residual_tol", self.residual_tol),
            ("rcond_min", self.rcond_min),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MopucError::Policy(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Backend {
    type Err = MopucError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(MopucError::Schema(format!(
                "unknown backend {other:?} (expected exact or float)"
            ))),
        }
    }
}

/// A complex scalar over which all polynomial and matrix work is done.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_parts(re: &BigRational, im: &BigRational) -> Self;
    fn conj(&self) -> Self;
    /// `|x|^2` as a real-valued scalar.
    fn norm_sqr(&self) -> Self;
    fn is_zero_under(&self, policy: &TolerancePolicy) -> bool;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// Ordering of the real parts.
    fn real_cmp(&self, other: &Self) -> Ordering;
    fn imag_is_zero(&self, policy: &TolerancePolicy) -> bool;
    /// `{"re": .., "im": ..}`; exact values as `"p/q"` strings.
    fn to_json(&self) -> Value;
    /// Compact cell form `re+imi`, used in CSV output.
    fn to_cell(&self) -> String;

    fn solve(a: &DenseMatrix<Self>, rhs: &[Vec<Self>]) -> Result<Vec<Vec<Self>>>;
    fn determinant(a: &DenseMatrix<Self>) -> Self;
    fn assess(a: &DenseMatrix<Self>, policy: &TolerancePolicy) -> NormalityDiagnostic<Self>;

    fn from_i64(v: i64) -> Self {
        Self::from_parts(&BigRational::from_integer(v.into()), &BigRational::zero())
    }

    /// Gaussian rational `re_num/re_den + i im_num/im_den`.
    fn gaussian(re: (i64, i64), im: (i64, i64)) -> Self {
        Self::from_parts(
            &BigRational::new(re.0.into(), re.1.into()),
            &BigRational::new(im.0.into(), im.1.into()),
        )
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::gaussian((num, den), (0, 1))
    }

    fn is_exact_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn powi(&self, p: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for ComplexFloat {
    const BACKEND: Backend = Backend::Float;
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex64::new(rational_to_f64(re), rational_to_f64(im))
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex::norm_sqr(self), 0.0)
    }

    fn is_zero_under(&self, policy: &TolerancePolicy) -> bool {
        self.norm() <= policy.zero_eps
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn real_cmp(&self, other: &Self) -> Ordering {
        self.re.partial_cmp(&other.re).unwrap_or(Ordering::Equal)
    }

    fn imag_is_zero(&self, policy: &TolerancePolicy) -> bool {
        self.im.abs() <= policy.zero_eps
    }

    fn to_json(&self) -> Value {
        serde_json::json!({ "re": self.re, "im": self.im })
    }

    fn to_cell(&self) -> String {
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{}{}i", self.re, sign, self.im.abs())
    }

    fn solve(a: &DenseMatrix<Self>, rhs: &[Vec<Self>]) -> Result<Vec<Vec<Self>>> {
        linalg::lu::Lu::factor(a)?.solve_many(rhs)
    }

    fn determinant(a: &DenseMatrix<Self>) -> Self {
        linalg::lu::determinant(a)
    }

    fn assess(a: &DenseMatrix<Self>, policy: &TolerancePolicy) -> NormalityDiagnostic<Self> {
        linalg::lu::assess(a, policy)
    }
}

impl Scalar for GaussianRational {
    const BACKEND: Backend = Backend::Exact;
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(re.clone(), im.clone())
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn norm_sqr(&self) -> Self {
        Complex::new(Complex::norm_sqr(self), BigRational::zero())
    }

    fn is_zero_under(&self, _policy: &TolerancePolicy) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(&Complex::norm_sqr(self)).sqrt()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn real_cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re)
    }

    fn imag_is_zero(&self, _policy: &TolerancePolicy) -> bool {
        self.im.is_zero()
    }

    fn to_json(&self) -> Value {
        serde_json::json!({ "re": self.re.to_string(), "im": self.im.to_string() })
    }

    fn to_cell(&self) -> String {
        let sign = if self.im.is_negative() { '-' } else { '+' };
        format!("{}{}{}i", self.re, sign, self.im.abs())
    }

    fn solve(a: &DenseMatrix<Self>, rhs: &[Vec<Self>]) -> Result<Vec<Vec<Self>>> {
        linalg::bareiss::solve(a, rhs)
    }

    fn determinant(a: &DenseMatrix<Self>) -> Self {
        linalg::bareiss::determinant(a)
    }

    fn assess(a: &DenseMatrix<Self>, _policy: &TolerancePolicy) -> NormalityDiagnostic<Self> {
        linalg::bareiss::assess(a)
    }
}

/// Backend zero test.
pub fn is_zero<S: Scalar>(x: &S, policy: &TolerancePolicy) -> bool {
    x.is_zero_under(policy)
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parses a real literal: an integer, `p/q`, or a decimal with optional
/// exponent. Decimals are converted exactly (`0.1` is `1/10`).
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let err = |reason: &str| MopucError::Literal {
        literal: text.to_string(),
        reason: reason.to_string(),
    };
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let num = BigInt::from_str(p.trim()).map_err(|_| err("bad numerator"))?;
        let den = BigInt::from_str(q.trim()).map_err(|_| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("not a number"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).map_err(|_| err("not a number"))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

fn parse_real_value(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        // serde_json prints the shortest round-trip form, which we then read exactly
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(MopucError::Literal {
            literal: other.to_string(),
            reason: "expected a number or string".into(),
        }),
    }
}

/// Reads `{"re": .., "im": ..}` (either part may be omitted and defaults to
/// zero) or a bare real number/string.
pub fn scalar_from_json<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::Object(map) => {
            for key in map.keys() {
                if key != "re" && key != "im" {
                    return Err(MopucError::Schema(format!("unexpected scalar field {key:?}")));
                }
            }
            let re = map.get("re").map(parse_real_value).transpose()?.unwrap_or_else(BigRational::zero);
            let im = map.get("im").map(parse_real_value).transpose()?.unwrap_or_else(BigRational::zero);
            Ok(S::from_parts(&re, &im))
        }
        other => Ok(S::from_parts(&parse_real_value(other)?, &BigRational::zero())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> GaussianRational {
        GaussianRational::ratio(n, d)
    }

    #[test]
    fn zero_tests() {
        let policy = TolerancePolicy::default();
        assert!(<GaussianRational as Scalar>::zero().is_zero_under(&policy));
        assert!(Complex64::new(1e-18, 0.0).is_zero_under(&policy));
        assert!(!q(1, 3).is_zero_under(&policy));
        assert!(!Complex64::new(1e-6, 0.0).is_zero_under(&policy));
    }

    #[test]
    fn policy_rejects_nonpositive() {
        assert!(TolerancePolicy::new(0.0, 1e-9, 1e-10).is_err());
        assert!(TolerancePolicy::new(1e-12, -1.0, 1e-10).is_err());
        assert!(TolerancePolicy::new(1e-12, 1e-9, f64::NAN).is_err());
        assert!(TolerancePolicy::new(1e-12, 1e-9, 1e-10).is_ok());
    }

    #[test]
    fn literal_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-3").unwrap(), BigRational::from_integer((-3).into()));
        assert_eq!(parse_rational("0.1").unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("4E2").unwrap(), BigRational::from_integer(400.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn json_round_trip_exact() {
        let x = GaussianRational::gaussian((-7, 12), (5, 3));
        let v = x.to_json();
        assert_eq!(v, serde_json::json!({"re": "-7/12", "im": "5/3"}));
        let back: GaussianRational = scalar_from_json(&v).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn json_numbers_and_partial_objects() {
        let x: GaussianRational = scalar_from_json(&serde_json::json!({"re": 0.25})).unwrap();
        assert_eq!(x, q(1, 4));
        let y: Complex64 = scalar_from_json(&serde_json::json!({"re": "1/3", "im": "-1/2"})).unwrap();
        assert!((y - Complex64::new(1.0 / 3.0, -0.5)).norm() < 1e-16);
        assert!(scalar_from_json::<GaussianRational>(&serde_json::json!({"x": 1})).is_err());
    }

    #[test]
    fn cells() {
        assert_eq!(q(-1, 6).to_cell(), "-1/6+0i");
        assert_eq!(GaussianRational::gaussian((3, 5), (-4, 5)).to_cell(), "3/5-4/5i");
        assert_eq!(Complex64::new(0.5, -0.25).to_cell(), "0.5-0.25i");
    }

    #[test]
    fn conj_and_norm() {
        let x = GaussianRational::gaussian((3, 5), (4, 5));
        assert_eq!(x.conj().conj(), x);
        assert_eq!(x.clone() * x.conj(), <GaussianRational as Scalar>::one());
        assert_eq!(Scalar::norm_sqr(&x), <GaussianRational as Scalar>::one());
        assert_eq!(q(2, 3).powi(3), q(8, 27));
        assert_eq!(Scalar::powi(&q(2, 3), 0), <GaussianRational as Scalar>::one());
    }
}
