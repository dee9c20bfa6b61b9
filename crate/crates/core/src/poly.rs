//! Dense univariate polynomials and r-tuples of them.

use std::ops::{Add, Neg, Sub};

use serde_json::Value;

use crate::error::{MopucError, Result};
use crate::index::MultiIndex;
use crate::scalar::{Scalar, TolerancePolicy};

/// `sum_i coeffs[i] z^i`. Trailing zeros are allowed in storage; the degree
/// is computed with the backend zero test.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// `z^d`.
    pub fn monomial(d: usize) -> Self {
        let mut coeffs = vec![S::zero(); d + 1];
        coeffs[d] = S::one();
        Poly { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient of `z^i`; zero past the stored length.
    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(S::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self, policy: &TolerancePolicy) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero_under(policy))
    }

    pub fn is_zero(&self, policy: &TolerancePolicy) -> bool {
        self.degree(policy).is_none()
    }

    pub fn trimmed(mut self, policy: &TolerancePolicy) -> Self {
        let len = self.degree(policy).map_or(0, |d| d + 1);
        self.coeffs.truncate(len);
        self
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// Polynomial with conjugated coefficients; `p.conj_coeffs().eval(&conj(w))`
    /// is `conj(p(w))`.
    pub fn conj_coeffs(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(Scalar::conj).collect(),
        }
    }

    /// `conj(p(w))`.
    pub fn eval_conj(&self, w: &S) -> S {
        self.conj_coeffs().eval(&w.conj())
    }

    /// `z * p`.
    pub fn mul_z(&self) -> Self {
        if self.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(S::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly { coeffs }
    }

    /// `z^m conj(p(1/conj z))`, i.e. coefficients reversed within degree `m`
    /// and conjugated.
    pub fn reversed(&self, m: usize) -> Self {
        Poly {
            coeffs: (0..=m).map(|i| self.coeff(m - i).conj()).collect(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_exact_zero)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "coeffs": self.coeffs.iter().map(S::to_json).collect::<Vec<_>>() })
    }
}

fn zip_coeffs<S: Scalar>(a: &[S], b: &[S], f: impl Fn(S, S) -> S) -> Vec<S> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(S::zero);
            let y = b.get(i).cloned().unwrap_or_else(S::zero);
            f(x, y)
        })
        .collect()
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;

    fn add(self, rhs: &Poly<S>) -> Poly<S> {
        Poly::from_coeffs(zip_coeffs(&self.coeffs, &rhs.coeffs, |x, y| x + y))
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;

    fn sub(self, rhs: &Poly<S>) -> Poly<S> {
        Poly::from_coeffs(zip_coeffs(&self.coeffs, &rhs.coeffs, |x, y| x - y))
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;

    fn neg(self) -> Poly<S> {
        Poly::from_coeffs(self.coeffs.iter().map(|x| -x.clone()).collect())
    }
}

/// Degree cap of a slot; `None` means the slot must be the zero polynomial.
pub type Cap = Option<usize>;

/// An r-tuple `(Q_1, ..., Q_r)` of polynomials with per-slot degree caps.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVector<S> {
    slots: Vec<Poly<S>>,
    caps: Vec<Cap>,
}

impl<S: Scalar> PolyVector<S> {
    /// Caps `n_j - 1` for the type I families at `n`.
    pub fn caps_for(n: &MultiIndex) -> Vec<Cap> {
        n.entries().iter().map(|&x| x.checked_sub(1)).collect()
    }

    pub fn zeros(n: &MultiIndex) -> Self {
        PolyVector {
            slots: vec![Poly::zero(); n.dim()],
            caps: Self::caps_for(n),
        }
    }

    /// Builds a vector with the type I caps of `n`, rejecting slots that
    /// exceed them.
    pub fn with_caps(slots: Vec<Poly<S>>, n: &MultiIndex, policy: &TolerancePolicy) -> Result<Self> {
        let caps = Self::caps_for(n);
        if slots.len() != caps.len() {
            return Err(MopucError::DimensionMismatch {
                index: n.clone(),
                got: slots.len(),
                expected: caps.len(),
            });
        }
        let v = PolyVector { slots, caps };
        if !v.respects_caps(policy) {
            return Err(MopucError::Schema(format!("polynomial vector exceeds degree caps of {n}")));
        }
        Ok(v)
    }

    pub fn respects_caps(&self, policy: &TolerancePolicy) -> bool {
        self.slots.iter().zip(&self.caps).all(|(p, cap)| match (p.degree(policy), cap) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(d), Some(c)) => d <= *c,
        })
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Poly<S>] {
        &self.slots
    }

    pub fn slot(&self, j: usize) -> &Poly<S> {
        &self.slots[j]
    }

    pub fn caps(&self) -> &[Cap] {
        &self.caps
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Poly<S>, &Poly<S>) -> Poly<S>) -> Self {
        assert_eq!(self.dim(), other.dim());
        PolyVector {
            slots: self.slots.iter().zip(&other.slots).map(|(a, b)| f(a, b)).collect(),
            caps: self.caps.iter().zip(&other.caps).map(|(a, b)| (*a).max(*b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &S) -> Self {
        PolyVector {
            slots: self.slots.iter().map(|p| p.scale(c)).collect(),
            caps: self.caps.clone(),
        }
    }

    pub fn mul_z(&self) -> Self {
        PolyVector {
            slots: self.slots.iter().map(Poly::mul_z).collect(),
            caps: self.caps.iter().map(|c| c.map(|d| d + 1)).collect(),
        }
    }

    /// `conj(Q_j(w))` for every slot.
    pub fn eval_conj(&self, w: &S) -> Vec<S> {
        self.slots.iter().map(|p| p.eval_conj(w)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.slots.iter().map(Poly::max_abs).fold(0.0, f64::max)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.slots.iter().all(Poly::is_exact_zero)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "slots": self.slots.iter().map(Poly::to_json).collect::<Vec<_>>() })
    }
}
