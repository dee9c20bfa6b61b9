//! Christoffel–Darboux formula along monotone lattice paths.
//!
//! For a path `0 = n_0, ..., n_N` with unit steps, the kernel identity
//!
//! ```text
//! (1 - z conj(w)) sum_k Phi_{n_k}(z) conj(Lambda_{n_{k+1}}(w))
//!     = Phi*_{n_N}(z) conj(Lambda*_{n_N}(w))
//!       - sum_j rho_{n_N,j} z Phi_{n_N - e_j}(z) conj(Lambda_{n_N + e_j}(w))
//! ```
//!
//! holds slot by slot in the vector `Lambda`. [`cd_check`] evaluates both
//! sides at a point pair; [`cd_bivariate`] expands them as coefficient arrays
//! in `z` and `conj(w)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::{MopucError, Result};
use crate::families::MopucSystem;
use crate::index::MultiIndex;
use crate::poly::Poly;
use crate::recurrence;
use crate::scalar::Scalar;

/// Monotone path from the origin; `steps` are 0-based directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    r: usize,
    steps: Vec<usize>,
    indices: Vec<MultiIndex>,
}

impl LatticePath {
    pub fn from_steps(r: usize, steps: Vec<usize>) -> Result<Self> {
        if r == 0 {
            return Err(MopucError::EmptySystem);
        }
        if steps.is_empty() {
            return Err(MopucError::InvalidPath("a path needs at least one step".into()));
        }
        if let Some(bad) = steps.iter().find(|&&s| s >= r) {
            return Err(MopucError::InvalidPath(format!("step {} outside 1..={r}", bad + 1)));
        }
        let mut indices = vec![MultiIndex::zero(r)];
        for &s in &steps {
            let next = indices.last().expect("nonempty").plus(s);
            indices.push(next);
        }
        Ok(LatticePath { r, steps, indices })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// `n_0, ..., n_N`.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn endpoint(&self) -> &MultiIndex {
        self.indices.last().expect("nonempty")
    }

    /// Steps are 1-based in the serialized form.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "steps": self.steps.iter().map(|s| s + 1).collect::<Vec<_>>(),
            "endpoint": self.endpoint(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathKind {
    /// All `e_1` steps, then all `e_2` steps, ... up to the target.
    Stepline(MultiIndex),
    /// Directions cycling `1, 2, ..., r, 1, ...`.
    RoundRobin,
    /// Explicit 0-based steps.
    Explicit(Vec<usize>),
    /// Uniform random directions from a seeded generator.
    Random(u64),
}

pub fn make_path(kind: &PathKind, r: usize, len: usize) -> Result<LatticePath> {
    let steps = match kind {
        PathKind::Stepline(target) => {
            if target.dim() != r {
                return Err(MopucError::DimensionMismatch {
                    index: target.clone(),
                    got: target.dim(),
                    expected: r,
                });
            }
            if target.norm() != len {
                return Err(MopucError::InvalidPath(format!("target {target} has length {}, not {len}", target.norm())));
            }
            (0..r).flat_map(|k| std::iter::repeat(k).take(target.get(k))).collect()
        }
        PathKind::RoundRobin => (0..len).map(|i| i % r.max(1)).collect(),
        PathKind::Explicit(steps) => {
            if steps.len() != len {
                return Err(MopucError::InvalidPath(format!("{} steps given, expected {len}", steps.len())));
            }
            steps.clone()
        }
        PathKind::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..len).map(|_| rng.gen_range(0..r.max(1))).collect()
        }
    };
    LatticePath::from_steps(r, steps)
}

// n normal together with every n +- e_j in the lattice
fn admissible<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Option<MultiIndex> {
    std::iter::once(n.clone())
        .chain((0..n.dim()).flat_map(|j| [n.minus(j), Some(n.plus(j))]).flatten())
        .find(|m| !sys.normal(m))
}

/// Checks the formula's hypothesis: every path index and every in-lattice
/// neighbour of one is normal. Returns the indices checked, or `NotNormal`
/// naming the first failing index.
pub fn cd_hypothesis<S: Scalar>(sys: &MopucSystem<S>, path: &LatticePath) -> Result<Vec<MultiIndex>> {
    if path.r() != sys.r() {
        return Err(MopucError::DimensionMismatch {
            index: path.endpoint().clone(),
            got: path.r(),
            expected: sys.r(),
        });
    }
    let mut checked = Vec::new();
    for n in path.indices() {
        if let Some(bad) = admissible(sys, n) {
            return Err(MopucError::NotNormal(bad));
        }
        for m in std::iter::once(n.clone()).chain((0..n.dim()).flat_map(|j| [n.minus(j), Some(n.plus(j))]).flatten()) {
            if !checked.contains(&m) {
                checked.push(m);
            }
        }
    }
    Ok(checked)
}

/// A seeded random walk of `len` steps that only visits indices satisfying
/// the CD hypothesis. Each step is drawn uniformly among the directions from
/// which the walk can still be completed; fails if no such walk exists.
pub fn random_admissible_path<S: Scalar>(sys: &MopucSystem<S>, len: usize, seed: u64) -> Result<LatticePath> {
    fn extendable<S: Scalar>(
        sys: &MopucSystem<S>,
        n: &MultiIndex,
        remaining: usize,
        memo: &mut HashMap<(MultiIndex, usize), bool>,
    ) -> bool {
        if remaining == 0 {
            return true;
        }
        if let Some(&v) = memo.get(&(n.clone(), remaining)) {
            return v;
        }
        let v = (0..sys.r()).any(|k| {
            let next = n.plus(k);
            admissible(sys, &next).is_none() && extendable(sys, &next, remaining - 1, memo)
        });
        memo.insert((n.clone(), remaining), v);
        v
    }

    let r = sys.r();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut memo = HashMap::new();
    let mut n = sys.zero_index();
    if let Some(bad) = admissible(sys, &n) {
        return Err(MopucError::NotNormal(bad));
    }
    let mut steps = Vec::with_capacity(len);
    for i in 0..len {
        let options: Vec<usize> = (0..r)
            .filter(|&k| {
                let next = n.plus(k);
                admissible(sys, &next).is_none() && extendable(sys, &next, len - i - 1, &mut memo)
            })
            .collect();
        if options.is_empty() {
            return Err(MopucError::InvalidPath(format!("no admissible path of length {len}")));
        }
        let k = options[rng.gen_range(0..options.len())];
        steps.push(k);
        n = n.plus(k);
    }
    LatticePath::from_steps(r, steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdEvaluation<S> {
    pub path: LatticePath,
    pub z: S,
    pub zeta: S,
    /// Per-slot left-hand sides.
    pub lhs: Vec<S>,
    /// Per-slot right-hand sides.
    pub rhs: Vec<S>,
    pub lhs_total: S,
    pub rhs_total: S,
    /// Largest `|lhs_m - rhs_m|`, including the totals.
    pub residual: f64,
    pub pass: bool,
}

impl<S: Scalar> CdEvaluation<S> {
    pub fn to_json(&self) -> Value {
        let list = |v: &[S]| v.iter().map(S::to_json).collect::<Vec<_>>();
        serde_json::json!({
            "path": self.path.to_json(),
            "z": self.z.to_json(),
            "zeta": self.zeta.to_json(),
            "lhs": list(&self.lhs),
            "rhs": list(&self.rhs),
            "lhs_total": self.lhs_total.to_json(),
            "rhs_total": self.rhs_total.to_json(),
            "residual": self.residual,
            "pass": self.pass,
        })
    }
}

fn sum<S: Scalar>(v: &[S]) -> S {
    v.iter().cloned().fold(S::zero(), |a, b| a + b)
}

/// Evaluates both sides of the CD formula at `(z, zeta)`.
pub fn cd_check<S: Scalar>(sys: &MopucSystem<S>, path: &LatticePath, z: &S, zeta: &S) -> Result<CdEvaluation<S>> {
    cd_hypothesis(sys, path)?;
    let r = sys.r();
    let top = path.endpoint();

    let mut lhs = vec![S::zero(); r];
    for pair in path.indices().windows(2) {
        let phi = sys.type2(&pair[0])?.eval(z);
        let lam = sys.type1(&pair[1])?.eval_conj(zeta);
        for (acc, l) in lhs.iter_mut().zip(lam) {
            *acc = acc.clone() + phi.clone() * l;
        }
    }
    let factor = S::one() - z.clone() * zeta.conj();
    let lhs: Vec<S> = lhs.into_iter().map(|v| factor.clone() * v).collect();

    let star = sys.type2star(top)?.eval(z);
    let mut rhs: Vec<S> = sys
        .type1star(top)?
        .eval_conj(zeta)
        .into_iter()
        .map(|l| star.clone() * l)
        .collect();
    for j in 0..r {
        let Some(down) = top.minus(j) else { continue };
        let coef = recurrence::rho(sys, top, j)? * sys.type2(&down)?.mul_z().eval(z);
        for (acc, l) in rhs.iter_mut().zip(sys.type1(&top.plus(j))?.eval_conj(zeta)) {
            *acc = acc.clone() - coef.clone() * l;
        }
    }

    let lhs_total = sum(&lhs);
    let rhs_total = sum(&rhs);
    let mut residual = (lhs_total.clone() - rhs_total.clone()).magnitude();
    let mut exact = (lhs_total.clone() - rhs_total.clone()).is_exact_zero();
    for (a, b) in lhs.iter().zip(&rhs) {
        let d = a.clone() - b.clone();
        residual = residual.max(d.magnitude());
        exact &= d.is_exact_zero();
    }
    let pass = if S::EXACT {
        exact
    } else {
        residual <= sys.policy().residual_tol
    };
    Ok(CdEvaluation {
        path: path.clone(),
        z: z.clone(),
        zeta: zeta.clone(),
        lhs,
        rhs,
        lhs_total,
        rhs_total,
        residual,
        pass,
    })
}

/// Polynomial in `z` and `w`, indexed `[i][j]` for `z^i w^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivariate<S> {
    coeffs: Vec<Vec<S>>,
}

impl<S: Scalar> Bivariate<S> {
    pub fn zero() -> Self {
        Bivariate { coeffs: Vec::new() }
    }

    /// `p(z) q(w)`.
    pub fn outer(p: &Poly<S>, q: &Poly<S>) -> Self {
        Bivariate {
            coeffs: p
                .coeffs()
                .iter()
                .map(|a| q.coeffs().iter().map(|b| a.clone() * b.clone()).collect())
                .collect(),
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> S {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    fn dims(&self) -> (usize, usize) {
        (self.coeffs.len(), self.coeffs.iter().map(Vec::len).max().unwrap_or(0))
    }

    fn combine(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        let (a, b) = self.dims();
        let (c, d) = other.dims();
        let (rows, cols) = (a.max(c), b.max(d));
        Bivariate {
            coeffs: (0..rows)
                .map(|i| (0..cols).map(|j| f(self.coeff(i, j), other.coeff(i, j))).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// `(1 - z w) * self`.
    pub fn one_minus_zw(&self) -> Self {
        let (rows, cols) = self.dims();
        Bivariate {
            coeffs: (0..=rows)
                .map(|i| {
                    (0..=cols)
                        .map(|j| {
                            let shifted = if i > 0 && j > 0 { self.coeff(i - 1, j - 1) } else { S::zero() };
                            self.coeff(i, j) - shifted
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Largest `i` and `j` with a nonzero coefficient, if any.
    pub fn degrees(&self) -> Option<(usize, usize)> {
        let mut out: Option<(usize, usize)> = None;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_exact_zero() {
                    let (di, dj) = out.unwrap_or((0, 0));
                    out = Some((di.max(i), dj.max(j)));
                }
            }
        }
        out
    }

    pub fn eval(&self, z: &S, w: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, row| {
            let inner = row.iter().rev().fold(S::zero(), |a, c| a * w.clone() + c.clone());
            acc * z.clone() + inner
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(Scalar::is_exact_zero)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|row| Value::Array(row.iter().map(S::to_json).collect()))
                .collect(),
        )
    }
}

/// Both sides of the CD formula, per slot, as polynomials in `z` and
/// `w = conj(zeta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdBivariate<S> {
    pub lhs: Vec<Bivariate<S>>,
    pub rhs: Vec<Bivariate<S>>,
}

impl<S: Scalar> CdBivariate<S> {
    pub fn agree(&self) -> bool {
        self.lhs.iter().zip(&self.rhs).all(|(a, b)| a.sub(b).is_exact_zero())
    }

    pub fn residual(&self) -> f64 {
        self.lhs.iter().zip(&self.rhs).map(|(a, b)| a.sub(b).max_abs()).fold(0.0, f64::max)
    }
}

pub fn cd_bivariate<S: Scalar>(sys: &MopucSystem<S>, path: &LatticePath) -> Result<CdBivariate<S>> {
    cd_hypothesis(sys, path)?;
    let r = sys.r();
    let top = path.endpoint();

    let mut lhs = vec![Bivariate::zero(); r];
    for pair in path.indices().windows(2) {
        let phi = sys.type2(&pair[0])?;
        let lam = sys.type1(&pair[1])?;
        for (m, acc) in lhs.iter_mut().enumerate() {
            *acc = acc.add(&Bivariate::outer(&phi, &lam.slot(m).conj_coeffs()));
        }
    }
    let lhs = lhs.iter().map(Bivariate::one_minus_zw).collect();

    let star = sys.type2star(top)?;
    let lam_star = sys.type1star(top)?;
    let mut rhs: Vec<Bivariate<S>> = (0..r)
        .map(|m| Bivariate::outer(&star, &lam_star.slot(m).conj_coeffs()))
        .collect();
    for j in 0..r {
        let Some(down) = top.minus(j) else { continue };
        let zphi = sys.type2(&down)?.mul_z().scale(&recurrence::rho(sys, top, j)?);
        let lam = sys.type1(&top.plus(j))?;
        for (m, acc) in rhs.iter_mut().enumerate() {
            *acc = acc.sub(&Bivariate::outer(&zphi, &lam.slot(m).conj_coeffs()));
        }
    }
    Ok(CdBivariate { lhs, rhs })
}

/// `count` seeded Gaussian-rational points with denominator 8 and `|z| <= 2`.
pub fn random_points<S: Scalar>(seed: u64, count: usize) -> Vec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (a, b): (i64, i64) = (rng.gen_range(-16..=16), rng.gen_range(-16..=16));
        if a * a + b * b <= 256 {
            out.push(S::gaussian((a, 8), (b, 8)));
        }
    }
    out
}

/// Sixteen exact points on the unit circle: `+-1`, `+-i`, and the
/// Pythagorean points `(+-3 +- 4i)/5`, `(+-4 +- 3i)/5`, `(+-5 +- 12i)/13`.
pub fn unit_circle_points<S: Scalar>() -> Vec<S> {
    let mut out: Vec<S> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        .into_iter()
        .map(|(a, b)| S::gaussian((a, 1), (b, 1)))
        .collect();
    for (a, b, c) in [(3, 4, 5), (4, 3, 5), (5, 12, 13)] {
        for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            out.push(S::from_parts(
                &BigRational::new(BigInt::from(sa * a), BigInt::from(c)),
                &BigRational::new(BigInt::from(sb * b), BigInt::from(c)),
            ));
        }
    }
    out
}
