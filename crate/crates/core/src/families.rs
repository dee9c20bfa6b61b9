//! Moment matrices, normality, and the four multiple orthogonal polynomial
//! families (type II, II*, I, I*) at a multi-index.
//!
//! At a normal index `n != 0` the families are fixed by
//!
//! * `Phi_n` monic of degree `|n|`, `<Phi_n, z^p>_j = 0` for `p < n_j`;
//! * `Phi*_n(0) = 1`, `<Phi*_n, z^p>_j = 0` for `1 <= p <= n_j`;
//! * `Lambda_n` with `deg Lambda_{n,j} <= n_j - 1`,
//!   `sum_j <Lambda_{n,j}, z^p>_j = 0` for `p <= |n| - 2` and `= 1` at `p = |n| - 1`;
//! * `Lambda*_n` likewise, vanishing for `1 <= p <= |n| - 1` and `= 1` at `p = 0`.
//!
//! Type II and II* share the moment matrix `M_n`; type I and I* share its
//! conjugate transpose. Each index is factored once and cached.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{MopucError, Result};
use crate::index::MultiIndex;
use crate::linalg::{DenseMatrix, NormalityDiagnostic};
use crate::measures::MeasureSystem;
use crate::poly::{Poly, PolyVector};
use crate::scalar::{Scalar, TolerancePolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct Families<S> {
    pub phi: Poly<S>,
    pub phi_star: Poly<S>,
    pub lambda: PolyVector<S>,
    pub lambda_star: PolyVector<S>,
}

#[derive(Debug, Clone)]
pub struct IndexData<S> {
    pub index: MultiIndex,
    pub diagnostic: NormalityDiagnostic<S>,
    /// `None` when the index is not normal.
    pub families: Option<Families<S>>,
}

/// A measure system together with a tolerance policy and the per-index
/// polynomial cache. Safe to share between threads.
#[derive(Debug)]
pub struct MopucSystem<S> {
    measures: MeasureSystem<S>,
    policy: TolerancePolicy,
    cache: RwLock<HashMap<MultiIndex, Arc<IndexData<S>>>>,
}

impl<S: Scalar> MopucSystem<S> {
    pub fn new(measures: MeasureSystem<S>, policy: TolerancePolicy) -> Self {
        MopucSystem {
            measures,
            policy,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn r(&self) -> usize {
        self.measures.r()
    }

    pub fn measures(&self) -> &MeasureSystem<S> {
        &self.measures
    }

    pub fn policy(&self) -> &TolerancePolicy {
        &self.policy
    }

    pub fn zero_index(&self) -> MultiIndex {
        MultiIndex::zero(self.r())
    }

    pub(crate) fn check_dim(&self, n: &MultiIndex) -> Result<()> {
        if n.dim() != self.r() {
            return Err(MopucError::DimensionMismatch {
                index: n.clone(),
                got: n.dim(),
                expected: self.r(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_measure(&self, j: usize) -> Result<()> {
        if j >= self.r() {
            return Err(MopucError::MeasureOutOfRange { index: j, r: self.r() });
        }
        Ok(())
    }

    fn nu(&self, j: usize, p: i64) -> S {
        self.measures.moment_unchecked(j, p)
    }

    /// `<f, g>_j = sum_{a,b} f_a conj(g_b) nu_j^{a-b}`.
    pub fn inner(&self, j: usize, f: &Poly<S>, g: &Poly<S>) -> Result<S> {
        self.check_measure(j)?;
        let mut acc = S::zero();
        for (a, fa) in f.coeffs().iter().enumerate() {
            if fa.is_exact_zero() {
                continue;
            }
            for (b, gb) in g.coeffs().iter().enumerate() {
                if gb.is_exact_zero() {
                    continue;
                }
                acc = acc + fa.clone() * gb.conj() * self.nu(j, a as i64 - b as i64);
            }
        }
        Ok(acc)
    }

    /// `<f, z^m>_j`.
    pub fn inner_monomial(&self, j: usize, f: &Poly<S>, m: usize) -> Result<S> {
        self.check_measure(j)?;
        Ok(f.coeffs()
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (a, fa)| acc + fa.clone() * self.nu(j, a as i64 - m as i64)))
    }

    /// `sum_j <v_j, z^m>_j`.
    pub fn vector_inner_monomial(&self, v: &PolyVector<S>, m: usize) -> S {
        v.slots()
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (j, p)| acc + self.inner_monomial(j, p, m).expect("slot in range"))
    }

    /// The `|n| x |n|` moment matrix: block `j` has rows
    /// `q = 0..n_j` with entries `nu_j^{c - q}` in column `c`.
    pub fn moment_matrix(&self, n: &MultiIndex) -> Result<DenseMatrix<S>> {
        self.check_dim(n)?;
        if n.is_zero() {
            return Err(MopucError::ZeroIndex);
        }
        let size = n.norm();
        let rows: Vec<(usize, usize)> = block_layout(n);
        Ok(DenseMatrix::from_fn(size, size, |row, c| {
            let (j, q) = rows[row];
            self.nu(j, c as i64 - q as i64)
        }))
    }

    /// Coefficient matrix of the type I systems: row `p`, column `(j, i)`
    /// holds `<z^i, z^p>_j = nu_j^{i - p}`.
    fn type1_matrix(&self, n: &MultiIndex) -> DenseMatrix<S> {
        let size = n.norm();
        let cols = block_layout(n);
        DenseMatrix::from_fn(size, size, |p, col| {
            let (j, i) = cols[col];
            self.nu(j, i as i64 - p as i64)
        })
    }

    /// Normality of `n` with its diagnostic; the zero index is normal.
    pub fn is_normal(&self, n: &MultiIndex) -> Result<(bool, NormalityDiagnostic<S>)> {
        let data = self.data(n)?;
        Ok((data.diagnostic.is_normal(), data.diagnostic.clone()))
    }

    pub(crate) fn normal(&self, n: &MultiIndex) -> bool {
        self.data(n).map(|d| d.families.is_some()).unwrap_or(false)
    }

    /// Cached normality and families for `n`.
    pub fn data(&self, n: &MultiIndex) -> Result<Arc<IndexData<S>>> {
        self.check_dim(n)?;
        if let Some(d) = self.cache.read().expect("family cache poisoned").get(n) {
            return Ok(Arc::clone(d));
        }
        let computed = Arc::new(self.compute(n)?);
        let mut cache = self.cache.write().expect("family cache poisoned");
        Ok(Arc::clone(cache.entry(n.clone()).or_insert(computed)))
    }

    fn compute(&self, n: &MultiIndex) -> Result<IndexData<S>> {
        if n.is_zero() {
            return Ok(IndexData {
                index: n.clone(),
                diagnostic: NormalityDiagnostic::trivially_normal(),
                families: Some(Families {
                    phi: Poly::one(),
                    phi_star: Poly::one(),
                    lambda: PolyVector::zeros(n),
                    lambda_star: PolyVector::zeros(n),
                }),
            });
        }
        let m = self.moment_matrix(n)?;
        let diagnostic = S::assess(&m, &self.policy);
        if !diagnostic.is_normal() {
            return Ok(IndexData {
                index: n.clone(),
                diagnostic,
                families: None,
            });
        }

        let size = n.norm();
        let layout = block_layout(n);
        let rhs_phi: Vec<S> = layout.iter().map(|&(j, q)| -self.nu(j, size as i64 - q as i64)).collect();
        let rhs_star: Vec<S> = layout.iter().map(|&(j, q)| -self.nu(j, -(q as i64) - 1)).collect();
        let mut sol = S::solve(&m, &[rhs_phi, rhs_star]).map_err(|_| MopucError::NotNormal(n.clone()))?;
        let star_tail = sol.pop().expect("two solutions");
        let mut phi = sol.pop().expect("two solutions");
        phi.push(S::one());
        let mut phi_star = Vec::with_capacity(size + 1);
        phi_star.push(S::one());
        phi_star.extend(star_tail);

        let g = self.type1_matrix(n);
        let mut e_last = vec![S::zero(); size];
        e_last[size - 1] = S::one();
        let mut e_first = vec![S::zero(); size];
        e_first[0] = S::one();
        let mut sol = S::solve(&g, &[e_last, e_first]).map_err(|_| MopucError::NotNormal(n.clone()))?;
        let lambda_star = split_slots(n, sol.pop().expect("two solutions"));
        let lambda = split_slots(n, sol.pop().expect("two solutions"));

        Ok(IndexData {
            index: n.clone(),
            diagnostic,
            families: Some(Families {
                phi: Poly::from_coeffs(phi),
                phi_star: Poly::from_coeffs(phi_star),
                lambda,
                lambda_star,
            }),
        })
    }

    /// Families at a normal index, or `NotNormal`.
    pub fn families(&self, n: &MultiIndex) -> Result<Arc<IndexData<S>>> {
        let data = self.data(n)?;
        if data.families.is_none() {
            return Err(MopucError::NotNormal(n.clone()));
        }
        Ok(data)
    }

    fn with_families<T>(&self, n: &MultiIndex, f: impl FnOnce(&Families<S>) -> T) -> Result<T> {
        let data = self.families(n)?;
        Ok(f(data.families.as_ref().expect("checked normal")))
    }

    /// Monic type II polynomial `Phi_n`.
    pub fn type2(&self, n: &MultiIndex) -> Result<Poly<S>> {
        self.with_families(n, |f| f.phi.clone())
    }

    /// Type II* polynomial `Phi*_n` with `Phi*_n(0) = 1`.
    pub fn type2star(&self, n: &MultiIndex) -> Result<Poly<S>> {
        self.with_families(n, |f| f.phi_star.clone())
    }

    /// Type I vector `Lambda_n`, normalized by `sum_j <Lambda_{n,j}, z^{|n|-1}>_j = 1`.
    pub fn type1(&self, n: &MultiIndex) -> Result<PolyVector<S>> {
        self.check_dim(n)?;
        if n.is_zero() {
            return Err(MopucError::ZeroIndex);
        }
        self.with_families(n, |f| f.lambda.clone())
    }

    /// Type I* vector `Lambda*_n`, normalized by `sum_j <Lambda*_{n,j}, 1>_j = 1`.
    /// The zero index gives the zero vector.
    pub fn type1star(&self, n: &MultiIndex) -> Result<PolyVector<S>> {
        self.with_families(n, |f| f.lambda_star.clone())
    }

    /// `Phi_m`, taken as zero outside the lattice.
    pub(crate) fn phi_or_zero(&self, m: Option<&MultiIndex>) -> Result<Poly<S>> {
        match m {
            Some(m) => self.type2(m),
            None => Ok(Poly::zero()),
        }
    }

    /// Type I vector including the zero index (zero vector).
    pub(crate) fn lambda_any(&self, n: &MultiIndex) -> Result<PolyVector<S>> {
        self.with_families(n, |f| f.lambda.clone())
    }
}

/// `(measure, power)` for each row of `M_n`, block by block.
fn block_layout(n: &MultiIndex) -> Vec<(usize, usize)> {
    n.entries()
        .iter()
        .enumerate()
        .flat_map(|(j, &nj)| (0..nj).map(move |q| (j, q)))
        .collect()
}

fn split_slots<S: Scalar>(n: &MultiIndex, coeffs: Vec<S>) -> PolyVector<S> {
    let mut it = coeffs.into_iter();
    let slots = n
        .entries()
        .iter()
        .map(|&nj| Poly::from_coeffs(it.by_ref().take(nj).collect()))
        .collect();
    PolyVector::with_caps(slots, n, &TolerancePolicy::default()).expect("slot lengths match caps")
}
