//! Recurrence coefficients and identity checks.
//!
//! [`coeffs`] extracts `alpha_n = Phi_n(0)`, `beta_n = [z^{|n|}] Phi*_n`,
//! `rho_{n,k}` from the inner-product quotient
//! `<Phi_n, z^{n_k}>_k / <Phi_{n-e_k}, z^{n_k-1}>_k`, and `kappa_{n,k}`, the
//! leading coefficient of `Lambda_{n,k}`. The `verify_*` functions then
//! check each recurrence and compatibility identity as an explicit residual,
//! so extraction and verification stay decoupled.
//!
//! A check whose named indices are not all normal is reported as
//! `precondition-failed`; one whose indices leave the lattice, or whose
//! nonvanishing hypothesis fails, is `not-applicable`.

use serde::Serialize;
use serde_json::Value;

use crate::error::{MopucError, Result};
use crate::families::MopucSystem;
use crate::index::MultiIndex;
use crate::linalg::DenseMatrix;
use crate::poly::{Poly, PolyVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffRecord<S> {
    pub index: MultiIndex,
    pub alpha: S,
    pub beta: S,
    pub rho: Vec<S>,
    /// Zero in directions with `n_k = 0`.
    pub kappa: Vec<S>,
    pub normal: bool,
}

impl<S: Scalar> CoeffRecord<S> {
    pub fn rho_sum(&self) -> S {
        self.rho.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "index": self.index,
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "rho": self.rho.iter().map(S::to_json).collect::<Vec<_>>(),
            "kappa": self.kappa.iter().map(S::to_json).collect::<Vec<_>>(),
            "normal": self.normal,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    Type2Orthogonality,
    Type2StarOrthogonality,
    Type1Orthogonality,
    Type1StarOrthogonality,
    NormalityLemmaUp,
    NormalityLemmaDown,
    Biorthogonality,
    KappaRelation,
    Type2Recurrence,
    Type2StarRecurrence,
    BetaIndependence,
    ThirdRecurrence,
    SumRule,
    AMatrixDeterminant,
    AMatrixForward,
    AMatrixInverse,
    AMatrixProduct,
    Type1Recurrence,
    Type1StarRecurrence,
    CompPoly1,
    CompPoly2,
    CompPoly3,
    CompPoly4,
    DiagonalType1,
    Compat1,
    Compat2,
    Compat31,
    Compat32,
    Compat3,
    GammaAntisymmetry,
    GammaAlpha,
    GammaBeta,
    GammaInnerProduct,
}

impl Identity {
    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    PreconditionFailed,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub identity: Identity,
    pub index: MultiIndex,
    pub k: Option<usize>,
    pub l: Option<usize>,
    /// Largest coefficient magnitude of LHS - RHS.
    pub residual: f64,
    pub pass: bool,
    pub status: Status,
    /// Indices whose normality the identity needs.
    pub required: Vec<MultiIndex>,
    pub detail: Option<String>,
}

impl IdentityReport {
    /// A computed identity whose residual is too large.
    pub fn is_failure(&self) -> bool {
        self.status == Status::Ok && !self.pass
    }

    /// Directions are 1-based in the serialized form.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "identity": self.identity,
            "index": self.index,
            "k": self.k.map(|k| k + 1),
            "l": self.l.map(|l| l + 1),
            "residual": self.residual,
            "pass": self.pass,
            "status": self.status,
            "required": self.required,
            "detail": self.detail,
        })
    }
}

/// Max magnitude over a set of differences, plus an exact-zero flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub max_abs: f64,
    pub exact_zero: bool,
}

impl Residual {
    pub fn zero() -> Self {
        Residual {
            max_abs: 0.0,
            exact_zero: true,
        }
    }

    pub fn of_scalar<S: Scalar>(x: &S) -> Self {
        Residual {
            max_abs: x.magnitude(),
            exact_zero: x.is_exact_zero(),
        }
    }

    pub fn of_poly<S: Scalar>(p: &Poly<S>) -> Self {
        Residual {
            max_abs: p.max_abs(),
            exact_zero: p.is_exact_zero(),
        }
    }

    pub fn of_vector<S: Scalar>(v: &PolyVector<S>) -> Self {
        Residual {
            max_abs: v.max_abs(),
            exact_zero: v.is_exact_zero(),
        }
    }

    pub fn max(self, other: Residual) -> Residual {
        Residual {
            max_abs: self.max_abs.max(other.max_abs),
            exact_zero: self.exact_zero && other.exact_zero,
        }
    }

    pub fn passes<S: Scalar>(&self, sys: &MopucSystem<S>) -> bool {
        if S::EXACT {
            self.exact_zero
        } else {
            self.max_abs <= sys.policy().residual_tol
        }
    }
}

struct Site<'a> {
    identity: Identity,
    n: &'a MultiIndex,
    k: Option<usize>,
    l: Option<usize>,
}

impl Site<'_> {
    fn report(&self, residual: f64, pass: bool, status: Status, required: Vec<MultiIndex>, detail: Option<String>) -> IdentityReport {
        IdentityReport {
            identity: self.identity,
            index: self.n.clone(),
            k: self.k,
            l: self.l,
            residual,
            pass,
            status,
            required,
            detail,
        }
    }

    fn not_applicable(&self, why: impl Into<String>) -> IdentityReport {
        self.report(0.0, false, Status::NotApplicable, Vec::new(), Some(why.into()))
    }

    /// `Ok(required)` when every index exists and is normal.
    fn precheck<S: Scalar>(&self, sys: &MopucSystem<S>, named: &[Option<MultiIndex>]) -> std::result::Result<Vec<MultiIndex>, IdentityReport> {
        if named.iter().any(Option::is_none) {
            return Err(self.not_applicable("a named index lies outside the lattice"));
        }
        let required: Vec<MultiIndex> = named.iter().flatten().cloned().collect();
        let failing: Vec<String> = required.iter().filter(|m| !sys.normal(m)).map(|m| m.to_string()).collect();
        if !failing.is_empty() {
            return Err(self.report(
                0.0,
                false,
                Status::PreconditionFailed,
                required,
                Some(format!("not normal: {}", failing.join(" "))),
            ));
        }
        Ok(required)
    }

    fn finish<S: Scalar>(&self, sys: &MopucSystem<S>, required: Vec<MultiIndex>, r: Residual) -> IdentityReport {
        self.report(r.max_abs, r.passes(sys), Status::Ok, required, None)
    }
}

fn site(identity: Identity, n: &MultiIndex, k: Option<usize>, l: Option<usize>) -> Site<'_> {
    Site { identity, n, k, l }
}

fn check_direction<S: Scalar>(sys: &MopucSystem<S>, k: usize) -> Result<()> {
    sys.check_measure(k)
}

fn check_pair<S: Scalar>(sys: &MopucSystem<S>, k: usize, l: usize) -> Result<()> {
    check_direction(sys, k)?;
    check_direction(sys, l)?;
    if k == l {
        return Err(MopucError::SameDirection(k));
    }
    Ok(())
}

/// `alpha_n = Phi_n(0)`.
pub fn alpha<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<S> {
    Ok(sys.type2(n)?.coeff(0))
}

/// `beta_n`, the `z^{|n|}` coefficient of `Phi*_n`.
pub fn beta<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<S> {
    Ok(sys.type2star(n)?.coeff(n.norm()))
}

/// `rho_{n,k}` from the inner-product quotient; zero when `n_k = 0`.
/// Needs `n` and `n - e_k` normal.
pub fn rho<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize) -> Result<S> {
    check_direction(sys, k)?;
    let Some(down) = n.minus(k) else {
        return Ok(S::zero());
    };
    let nk = n.get(k);
    let num = sys.inner_monomial(k, &sys.type2(n)?, nk)?;
    let den = sys.inner_monomial(k, &sys.type2(&down)?, nk - 1)?;
    Ok(num / den)
}

/// `kappa_{n,k}`, the `z^{n_k - 1}` coefficient of `Lambda_{n,k}`.
pub fn kappa<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize) -> Result<S> {
    check_direction(sys, k)?;
    if n.get(k) == 0 {
        return Ok(S::zero());
    }
    Ok(sys.type1(n)?.slot(k).coeff(n.get(k) - 1))
}

/// All recurrence coefficients at `n`. Needs `n` and every `n - e_k` in the
/// lattice to be normal.
pub fn coeffs<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<CoeffRecord<S>> {
    sys.check_dim(n)?;
    let data = sys.families(n)?;
    let fam = data.families.as_ref().expect("normal");
    for k in n.support() {
        let down = n.minus(k).expect("k in support");
        if !sys.normal(&down) {
            return Err(MopucError::NotNormal(down));
        }
    }
    let r = sys.r();
    let rho = (0..r).map(|k| rho(sys, n, k)).collect::<Result<Vec<_>>>()?;
    let kappa = (0..r)
        .map(|k| match n.get(k) {
            0 => S::zero(),
            nk => fam.lambda.slot(k).coeff(nk - 1),
        })
        .collect();
    Ok(CoeffRecord {
        index: n.clone(),
        alpha: fam.phi.coeff(0),
        beta: fam.phi_star.coeff(n.norm()),
        rho,
        kappa,
        normal: true,
    })
}

/// `gamma_n^{kl}` with `Phi_{n+e_k} - Phi_{n+e_l} = gamma_n^{kl} Phi_n`, read
/// off the `z^{|n|}` coefficient of the difference.
pub fn gamma<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize, l: usize) -> Result<S> {
    sys.check_dim(n)?;
    check_pair(sys, k, l)?;
    sys.families(n)?;
    let diff = &sys.type2(&n.plus(k))? - &sys.type2(&n.plus(l))?;
    Ok(diff.coeff(n.norm()))
}

fn down_all(n: &MultiIndex) -> Vec<Option<MultiIndex>> {
    (0..n.dim()).filter_map(|j| n.minus(j).map(Some)).collect()
}

/// Orthogonality and normalization residuals of all four families at `n`.
pub fn verify_orthogonality<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    let named = [Some(n.clone())];
    let ids = [
        Identity::Type2Orthogonality,
        Identity::Type2StarOrthogonality,
        Identity::Type1Orthogonality,
        Identity::Type1StarOrthogonality,
    ];
    let required = match site(ids[0], n, None, None).precheck(sys, &named) {
        Ok(req) => req,
        Err(rep) => {
            return Ok(ids
                .iter()
                .map(|&id| IdentityReport { identity: id, ..rep.clone() })
                .collect())
        }
    };
    let data = sys.families(n)?;
    let fam = data.families.as_ref().expect("normal");
    let size = n.norm();

    let mut phi_res = Residual::of_scalar(&(fam.phi.coeff(size) - S::one()));
    let mut star_res = Residual::of_scalar(&(fam.phi_star.coeff(0) - S::one()));
    for j in 0..sys.r() {
        for p in 0..n.get(j) {
            phi_res = phi_res.max(Residual::of_scalar(&sys.inner_monomial(j, &fam.phi, p)?));
            star_res = star_res.max(Residual::of_scalar(&sys.inner_monomial(j, &fam.phi_star, p + 1)?));
        }
    }

    let mut l_res = Residual::zero();
    let mut ls_res = Residual::zero();
    if size > 0 {
        for p in 0..size {
            let target = if p == size - 1 { S::one() } else { S::zero() };
            l_res = l_res.max(Residual::of_scalar(&(sys.vector_inner_monomial(&fam.lambda, p) - target)));
            let target = if p == 0 { S::one() } else { S::zero() };
            ls_res = ls_res.max(Residual::of_scalar(&(sys.vector_inner_monomial(&fam.lambda_star, p) - target)));
        }
        if !fam.lambda.respects_caps(sys.policy()) || !fam.lambda_star.respects_caps(sys.policy()) {
            l_res.exact_zero = false;
            l_res.max_abs = f64::INFINITY;
        }
    }

    Ok([phi_res, star_res, l_res, ls_res]
        .into_iter()
        .zip(ids)
        .map(|(res, id)| site(id, n, None, None).finish(sys, required.clone(), res))
        .collect())
}

/// Lemma-level facts linking `n` and `n +- e_k`: the two normality
/// criteria, biorthogonality, and `conj(kappa_{n+e_k,k}) <Phi_n, z^{n_k}>_k = 1`.
pub fn verify_lemmas<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    check_direction(sys, k)?;
    let up = n.plus(k);
    let nk = n.get(k);
    let mut out = Vec::new();

    // n + e_k normal  =>  <Phi_n, z^{n_k}>_k != 0
    let s = site(Identity::NormalityLemmaUp, n, Some(k), None);
    out.push(match s.precheck(sys, &[Some(n.clone()), Some(up.clone())]) {
        Err(rep) => rep,
        Ok(req) => {
            let v = sys.inner_monomial(k, &sys.type2(n)?, nk)?;
            let bad = v.is_zero_under(sys.policy());
            s.report(if bad { 1.0 } else { 0.0 }, !bad, Status::Ok, req, None)
        }
    });

    // n - e_k normal  =>  deg Lambda_{n,k} = n_k - 1
    let s = site(Identity::NormalityLemmaDown, n, Some(k), None);
    out.push(match s.precheck(sys, &[Some(n.clone()), n.minus(k)]) {
        Err(rep) => rep,
        Ok(req) => {
            let deg = sys.type1(n)?.slot(k).degree(sys.policy());
            let ok = deg == Some(nk - 1);
            s.report(if ok { 0.0 } else { 1.0 }, ok, Status::Ok, req, None)
        }
    });

    let s = site(Identity::Biorthogonality, n, Some(k), None);
    out.push(match s.precheck(sys, &[Some(n.clone()), Some(up.clone())]) {
        Err(rep) => rep,
        Ok(req) => {
            let phi = sys.type2(n)?;
            let lam = sys.type1(&up)?;
            let single = sys.inner(k, &phi, lam.slot(k))? - S::one();
            let total = (0..sys.r()).try_fold(S::zero(), |acc, m| Ok::<_, MopucError>(acc + sys.inner(m, &phi, lam.slot(m))?))?
                - S::one();
            s.finish(sys, req, Residual::of_scalar(&single).max(Residual::of_scalar(&total)))
        }
    });

    let s = site(Identity::KappaRelation, n, Some(k), None);
    out.push(match s.precheck(sys, &[Some(n.clone()), Some(up.clone())]) {
        Err(rep) => rep,
        Ok(req) => {
            let v = kappa(sys, &up, k)?.conj() * sys.inner_monomial(k, &sys.type2(n)?, nk)? - S::one();
            s.finish(sys, req, Residual::of_scalar(&v))
        }
    });
    Ok(out)
}

/// `Phi_n = alpha_n Phi*_n + sum_j rho_{n,j} z Phi_{n-e_j}`.
pub fn verify_type2<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<IdentityReport> {
    sys.check_dim(n)?;
    let s = site(Identity::Type2Recurrence, n, None, None);
    let mut named = vec![Some(n.clone())];
    named.extend(down_all(n));
    let req = match s.precheck(sys, &named) {
        Ok(req) => req,
        Err(rep) => return Ok(rep),
    };
    let c = coeffs(sys, n)?;
    let mut rhs = sys.type2star(n)?.scale(&c.alpha);
    for j in 0..sys.r() {
        let down = sys.phi_or_zero(n.minus(j).as_ref())?;
        rhs = &rhs + &down.mul_z().scale(&c.rho[j]);
    }
    let diff = &sys.type2(n)? - &rhs;
    Ok(s.finish(sys, req, Residual::of_poly(&diff)))
}

// beta from Phi*_n - Phi*_{n-e_k} = beta z Phi_{n-e_k}, using the lowest
// nonzero coefficient of Phi_{n-e_k} instead of the top one.
fn beta_from_low_order<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize) -> Result<S> {
    let down = n.minus(k).expect("n_k > 0");
    let phi_down = sys.type2(&down)?;
    let diff = &sys.type2star(n)? - &sys.type2star(&down)?;
    let i = phi_down
        .coeffs()
        .iter()
        .position(|c| !c.is_zero_under(sys.policy()))
        .expect("monic");
    Ok(diff.coeff(i + 1) / phi_down.coeff(i))
}

/// `Phi*_n = Phi*_{n-e_k} + beta_n z Phi_{n-e_k}`, plus independence of
/// `beta_n` from `k` across the support.
pub fn verify_type2star<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    check_direction(sys, k)?;
    let Some(down) = n.minus(k) else {
        return Err(MopucError::EmptyDirection { index: n.clone(), k });
    };
    let s = site(Identity::Type2StarRecurrence, n, Some(k), None);
    let req = match s.precheck(sys, &[Some(n.clone()), Some(down.clone())]) {
        Ok(req) => req,
        Err(rep) => return Ok(vec![rep.clone(), IdentityReport { identity: Identity::BetaIndependence, ..rep }]),
    };
    let b = beta(sys, n)?;
    let rhs = &sys.type2star(&down)? + &sys.type2(&down)?.mul_z().scale(&b);
    let diff = &sys.type2star(n)? - &rhs;
    let main = s.finish(sys, req.clone(), Residual::of_poly(&diff));

    let s = site(Identity::BetaIndependence, n, Some(k), None);
    let mut res = Residual::zero();
    let mut used = req;
    for j in n.support() {
        let dj = n.minus(j).expect("support");
        if !sys.normal(&dj) {
            continue;
        }
        if !used.contains(&dj) {
            used.push(dj);
        }
        res = res.max(Residual::of_scalar(&(beta_from_low_order(sys, n, j)? - b.clone())));
    }
    Ok(vec![main, s.finish(sys, used, res)])
}

/// `Phi*_n = beta_n Phi_n + sum_j rho_{n,j} Phi*_{n-e_j}` and
/// `alpha_n beta_n + sum_j rho_{n,j} = 1`.
pub fn verify_third<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    let mut named = vec![Some(n.clone())];
    named.extend(down_all(n));
    let s1 = site(Identity::ThirdRecurrence, n, None, None);
    let s2 = site(Identity::SumRule, n, None, None);
    let req = match s1.precheck(sys, &named) {
        Ok(req) => req,
        Err(rep) => return Ok(vec![rep.clone(), IdentityReport { identity: Identity::SumRule, ..rep }]),
    };
    let c = coeffs(sys, n)?;
    let mut rhs = sys.type2(n)?.scale(&c.beta);
    for j in n.support() {
        let down = n.minus(j).expect("support");
        rhs = &rhs + &sys.type2star(&down)?.scale(&c.rho[j]);
    }
    let diff = &sys.type2star(n)? - &rhs;
    let sum = c.alpha.clone() * c.beta.clone() + c.rho_sum() - S::one();
    Ok(vec![
        s1.finish(sys, req.clone(), Residual::of_poly(&diff)),
        s2.finish(sys, req, Residual::of_scalar(&sum)),
    ])
}

/// Matrix forms of the type II recurrences with `R_n` the `r x r` matrix
/// whose rows all equal `(rho_{n,1}, ..., rho_{n,r})`:
/// `det(I - R_n) = alpha_n beta_n`, `u = A_n Phi*` with `A_n = (I - R_n)/beta_n`,
/// `A_n^{-1} u = Phi*` with `A_n^{-1} = ((1 - sum rho) I + R_n)/alpha_n`,
/// where `u_j = Phi_n - z Phi_{n-e_j}` and `Phi*_j = Phi*_{n-e_j}`.
pub fn verify_a_matrix<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    let r = sys.r();
    let ids = [
        Identity::AMatrixDeterminant,
        Identity::AMatrixForward,
        Identity::AMatrixInverse,
        Identity::AMatrixProduct,
    ];
    let mut named = vec![Some(n.clone())];
    named.extend((0..r).map(|j| n.minus(j)));
    let req = match site(ids[0], n, None, None).precheck(sys, &named) {
        Ok(req) => req,
        Err(rep) => return Ok(ids.iter().map(|&id| IdentityReport { identity: id, ..rep.clone() }).collect()),
    };
    let c = coeffs(sys, n)?;
    let policy = *sys.policy();
    let rmat = DenseMatrix::from_fn(r, r, |_, k| c.rho[k].clone());
    let i_minus_r = DenseMatrix::from_fn(r, r, |i, k| {
        let id = if i == k { S::one() } else { S::zero() };
        id - rmat.get(i, k).clone()
    });
    let mut out = Vec::new();

    let det = S::determinant(&i_minus_r) - c.alpha.clone() * c.beta.clone();
    out.push(site(ids[0], n, None, None).finish(sys, req.clone(), Residual::of_scalar(&det)));

    let phi = sys.type2(n)?;
    let u: Vec<Poly<S>> = (0..r)
        .map(|j| Ok(&phi - &sys.type2(&n.minus(j).expect("checked"))?.mul_z()))
        .collect::<Result<_>>()?;
    let stars: Vec<Poly<S>> = (0..r)
        .map(|j| sys.type2star(&n.minus(j).expect("checked")))
        .collect::<Result<_>>()?;
    let apply = |m: &DenseMatrix<S>, v: &[Poly<S>]| -> Vec<Poly<S>> {
        (0..r)
            .map(|i| (0..r).fold(Poly::zero(), |acc, k| &acc + &v[k].scale(m.get(i, k))))
            .collect()
    };
    let stacked = |a: &[Poly<S>], b: &[Poly<S>]| {
        a.iter()
            .zip(b)
            .fold(Residual::zero(), |acc, (x, y)| acc.max(Residual::of_poly(&(x - y))))
    };

    let beta_ok = !c.beta.is_zero_under(&policy);
    let alpha_ok = !c.alpha.is_zero_under(&policy);
    let a = beta_ok.then(|| DenseMatrix::from_fn(r, r, |i, k| i_minus_r.get(i, k).clone() / c.beta.clone()));
    let sum = c.rho_sum();
    let a_inv = alpha_ok.then(|| {
        DenseMatrix::from_fn(r, r, |i, k| {
            let diag = if i == k { S::one() - sum.clone() } else { S::zero() };
            (diag + rmat.get(i, k).clone()) / c.alpha.clone()
        })
    });

    let s = site(ids[1], n, None, None);
    out.push(match &a {
        Some(a) => s.finish(sys, req.clone(), stacked(&u, &apply(a, &stars))),
        None => s.not_applicable("beta_n = 0"),
    });
    let s = site(ids[2], n, None, None);
    out.push(match &a_inv {
        Some(a_inv) => s.finish(sys, req.clone(), stacked(&apply(a_inv, &u), &stars)),
        None => s.not_applicable("alpha_n = 0"),
    });
    let s = site(ids[3], n, None, None);
    out.push(if let (Some(a), Some(a_inv)) = (&a, &a_inv) {
        let prod = a.mul(a_inv);
        let res = (0..r)
            .flat_map(|i| (0..r).map(move |k| (i, k)))
            .fold(Residual::zero(), |acc, (i, k)| {
                let id = if i == k { S::one() } else { S::zero() };
                acc.max(Residual::of_scalar(&(prod.get(i, k).clone() - id)))
            });
        s.finish(sys, req, res)
    } else {
        s.not_applicable("alpha_n = 0 or beta_n = 0")
    });
    Ok(out)
}

/// `z Lambda_n = -conj(beta_n) Lambda*_n + sum_j conj(rho_{n,j}) Lambda_{n+e_j}`
/// and, for every `k`, `Lambda*_n = Lambda*_{n+e_k} - conj(alpha_n) Lambda_{n+e_k}`.
pub fn verify_type1<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    let r = sys.r();
    let mut out = Vec::new();

    let s = site(Identity::Type1Recurrence, n, None, None);
    let mut named = vec![Some(n.clone())];
    named.extend((0..r).map(|j| Some(n.plus(j))));
    named.extend(down_all(n));
    out.push(match s.precheck(sys, &named) {
        Err(rep) => rep,
        Ok(req) => {
            let b = beta(sys, n)?;
            let lam = sys.lambda_any(n)?;
            let mut rhs = sys.type1star(n)?.scale(&-b.conj());
            for j in 0..r {
                let rj = rho(sys, n, j)?;
                rhs = rhs.add(&sys.type1(&n.plus(j))?.scale(&rj.conj()));
            }
            s.finish(sys, req, Residual::of_vector(&lam.mul_z().sub(&rhs)))
        }
    });

    for k in 0..r {
        let s = site(Identity::Type1StarRecurrence, n, Some(k), None);
        let up = n.plus(k);
        out.push(match s.precheck(sys, &[Some(n.clone()), Some(up.clone())]) {
            Err(rep) => rep,
            Ok(req) => {
                let a = alpha(sys, n)?;
                let rhs = sys.type1star(&up)?.sub(&sys.type1(&up)?.scale(&a.conj()));
                s.finish(sys, req, Residual::of_vector(&sys.type1star(n)?.sub(&rhs)))
            }
        });
    }
    Ok(out)
}

/// The polynomial compatibility relations between `n`, `n + e_k`, `n + e_l`
/// (and `n + e_k + e_l`), plus the type I diagonal relation
/// `Lambda_{n-e_k} - Lambda_{n-e_l} = conj(gamma^{kl}_{n-e_k-e_l}) Lambda_n`.
pub fn verify_compat_polys<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize, l: usize) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    check_pair(sys, k, l)?;
    let (nk, nl) = (n.plus(k), n.plus(l));
    let nkl = nk.plus(l);
    let base = [Some(n.clone()), Some(nk.clone()), Some(nl.clone())];
    let mut out = Vec::new();

    let s = site(Identity::CompPoly1, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &base) {
        Err(rep) => rep,
        Ok(req) => {
            let g = gamma(sys, n, k, l)?;
            let diff = &(&sys.type2(&nk)? - &sys.type2(&nl)?) - &sys.type2(n)?.scale(&g);
            s.finish(sys, req, Residual::of_poly(&diff))
        }
    });

    let s = site(Identity::CompPoly3, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &[Some(nk.clone()), Some(nl.clone()), Some(nkl.clone())]) {
        Err(rep) => rep,
        Ok(req) => {
            let lhs = &sys.type2star(&nk)? - &sys.type2star(&nl)?;
            let rhs = (&sys.type2(&nl)? - &sys.type2(&nk)?).mul_z().scale(&beta(sys, &nkl)?);
            s.finish(sys, req, Residual::of_poly(&(&lhs - &rhs)))
        }
    });

    let s = site(Identity::CompPoly2, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &base) {
        Err(rep) => rep,
        Ok(req) => {
            let lhs = &sys.type2star(&nk)? - &sys.type2star(&nl)?;
            let rhs = sys.type2(n)?.mul_z().scale(&(beta(sys, &nk)? - beta(sys, &nl)?));
            s.finish(sys, req, Residual::of_poly(&(&lhs - &rhs)))
        }
    });

    let s = site(Identity::CompPoly4, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &base) {
        Err(rep) => rep,
        Ok(req) => {
            let star = sys.type2star(n)?;
            let lhs = (&sys.type2star(&nl)? - &star).scale(&beta(sys, &nk)?);
            let rhs = (&sys.type2star(&nk)? - &star).scale(&beta(sys, &nl)?);
            s.finish(sys, req, Residual::of_poly(&(&lhs - &rhs)))
        }
    });

    let s = site(Identity::DiagonalType1, n, Some(k), Some(l));
    let (dk, dl, dkl) = (n.minus(k), n.minus(l), n.shift(None, &[k, l]));
    out.push(match s.precheck(sys, &[Some(n.clone()), dk.clone(), dl.clone(), dkl.clone()]) {
        Err(rep) => rep,
        Ok(req) => {
            let (dk, dl, dkl) = (dk.expect("checked"), dl.expect("checked"), dkl.expect("checked"));
            let g = gamma(sys, &dkl, k, l)?;
            let lhs = sys.lambda_any(&dk)?.sub(&sys.lambda_any(&dl)?);
            let rhs = sys.type1(n)?.scale(&g.conj());
            s.finish(sys, req, Residual::of_vector(&lhs.sub(&rhs)))
        }
    });
    Ok(out)
}

/// Scalar compatibility conditions between recurrence coefficients at
/// neighbouring indices.
pub fn verify_compat_coeffs<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize, l: usize) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    check_pair(sys, k, l)?;
    let dk = n.minus(k);
    let dl = n.minus(l);
    let dkl = n.shift(None, &[k, l]);
    let kl = n.shift(Some(k), &[l]);
    let up_k = n.plus(k);
    let mut out = Vec::new();

    // beta_n (alpha_{n-e_l} - alpha_{n-e_k}) = (beta_{n-e_k} - beta_{n-e_l}) alpha_{n-e_k-e_l}
    let s = site(Identity::Compat1, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &[Some(n.clone()), dk.clone(), dl.clone(), dkl.clone()]) {
        Err(rep) => rep,
        Ok(req) => {
            let (dk, dl, dkl) = (dk.as_ref().unwrap(), dl.as_ref().unwrap(), dkl.as_ref().unwrap());
            let lhs = beta(sys, n)? * (alpha(sys, dl)? - alpha(sys, dk)?);
            let rhs = (beta(sys, dk)? - beta(sys, dl)?) * alpha(sys, dkl)?;
            s.finish(sys, req, Residual::of_scalar(&(lhs - rhs)))
        }
    });

    let s = site(Identity::Compat2, n, Some(k), Some(l));
    let mut named = vec![Some(n.clone())];
    named.extend(down_all(n));
    out.push(match s.precheck(sys, &named) {
        Err(rep) => rep,
        Ok(req) => {
            let c = coeffs(sys, n)?;
            let v = c.alpha.clone() * c.beta.clone() + c.rho_sum() - S::one();
            s.finish(sys, req, Residual::of_scalar(&v))
        }
    });

    let named31 = [Some(n.clone()), dk.clone(), dl.clone(), dkl.clone(), kl.clone()];

    // (alpha_{n-e_l} - alpha_{n-e_k}) alpha_{n-e_l} rho_{n,k}
    //   = (alpha_{n+e_k-e_l} - alpha_n) alpha_{n-e_k-e_l} rho_{n-e_l,k}
    let s = site(Identity::Compat31, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &named31) {
        Err(rep) => rep,
        Ok(req) => {
            let (dk, dl, dkl, kl) = (dk.as_ref().unwrap(), dl.as_ref().unwrap(), dkl.as_ref().unwrap(), kl.as_ref().unwrap());
            let a_dl = alpha(sys, dl)?;
            let lhs = (a_dl.clone() - alpha(sys, dk)?) * a_dl * rho(sys, n, k)?;
            let rhs = (alpha(sys, kl)? - alpha(sys, n)?) * alpha(sys, dkl)? * rho(sys, dl, k)?;
            s.finish(sys, req, Residual::of_scalar(&(lhs - rhs)))
        }
    });

    // rho_{n,k} gamma^{kl}_{n-e_k-e_l} = rho_{n-e_l,k} gamma^{kl}_{n-e_l}
    let s = site(Identity::Compat32, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &named31) {
        Err(rep) => rep,
        Ok(req) => {
            let (dl, dkl) = (dl.as_ref().unwrap(), dkl.as_ref().unwrap());
            let lhs = rho(sys, n, k)? * gamma(sys, dkl, k, l)?;
            let rhs = rho(sys, dl, k)? * gamma(sys, dl, k, l)?;
            s.finish(sys, req, Residual::of_scalar(&(lhs - rhs)))
        }
    });

    // (beta_{n-e_k} - beta_{n-e_l}) beta_{n+e_k} rho_{n,k}
    //   = (beta_n - beta_{n+e_k-e_l}) beta_n rho_{n-e_l,k}
    let s = site(Identity::Compat3, n, Some(k), Some(l));
    let mut named3 = named31.to_vec();
    named3.push(Some(up_k.clone()));
    out.push(match s.precheck(sys, &named3) {
        Err(rep) => rep,
        Ok(req) => {
            let (dk, dl, kl) = (dk.as_ref().unwrap(), dl.as_ref().unwrap(), kl.as_ref().unwrap());
            let b_n = beta(sys, n)?;
            let lhs = (beta(sys, dk)? - beta(sys, dl)?) * beta(sys, &up_k)? * rho(sys, n, k)?;
            let rhs = (b_n.clone() - beta(sys, kl)?) * b_n * rho(sys, dl, k)?;
            s.finish(sys, req, Residual::of_scalar(&(lhs - rhs)))
        }
    });
    Ok(out)
}

/// Consistency of `gamma_n^{kl}` with its antisymmetry, with the alpha and
/// beta formulas, and with the inner-product formula
/// `-<Phi_{n-e_k}, z^{n_k-1}>_k = <Phi_{n-e_k-e_l}, z^{n_k-1}>_k gamma^{kl}_{n-e_k-e_l}`.
pub fn verify_gamma<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex, k: usize, l: usize) -> Result<Vec<IdentityReport>> {
    sys.check_dim(n)?;
    check_pair(sys, k, l)?;
    let (nk, nl) = (n.plus(k), n.plus(l));
    let base = [Some(n.clone()), Some(nk.clone()), Some(nl.clone())];
    let mut out = Vec::new();

    let s = site(Identity::GammaAntisymmetry, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &base) {
        Err(rep) => rep,
        Ok(req) => {
            let v = gamma(sys, n, k, l)? + gamma(sys, n, l, k)?;
            s.finish(sys, req, Residual::of_scalar(&v))
        }
    });

    let s = site(Identity::GammaAlpha, n, Some(k), Some(l));
    out.push(match s.precheck(sys, &base) {
        Err(rep) => rep,
        Ok(req) => {
            let v = alpha(sys, &nk)? - alpha(sys, &nl)? - alpha(sys, n)? * gamma(sys, n, k, l)?;
            s.finish(sys, req, Residual::of_scalar(&v))
        }
    });

    let s = site(Identity::GammaBeta, n, Some(k), Some(l));
    let nkl = nk.plus(l);
    out.push(match s.precheck(sys, &[Some(n.clone()), Some(nk.clone()), Some(nl.clone()), Some(nkl.clone())]) {
        Err(rep) => rep,
        Ok(req) => {
            let v = beta(sys, &nkl)? * gamma(sys, n, k, l)? - (beta(sys, &nl)? - beta(sys, &nk)?);
            s.finish(sys, req, Residual::of_scalar(&v))
        }
    });

    let s = site(Identity::GammaInnerProduct, n, Some(k), Some(l));
    let (dk, dl, dkl) = (n.minus(k), n.minus(l), n.shift(None, &[k, l]));
    out.push(match s.precheck(sys, &[dk.clone(), dl.clone(), dkl.clone()]) {
        Err(rep) => rep,
        Ok(req) => {
            let (dk, dkl) = (dk.unwrap(), dkl.unwrap());
            let p = n.get(k) - 1;
            let lhs = -sys.inner_monomial(k, &sys.type2(&dk)?, p)?;
            let rhs = sys.inner_monomial(k, &sys.type2(&dkl)?, p)? * gamma(sys, &dkl, k, l)?;
            s.finish(sys, req, Residual::of_scalar(&(lhs - rhs)))
        }
    });
    Ok(out)
}

/// Summary of a batch of identity checks.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub reports: Vec<IdentityReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.reports.iter().filter(|r| r.status == Status::Ok && r.pass).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityReport> {
        self.reports.iter().filter(|r| r.is_failure())
    }

    pub fn failed(&self) -> usize {
        self.failures().count()
    }

    pub fn count(&self, status: Status) -> usize {
        self.reports.iter().filter(|r| r.status == status).count()
    }

    pub fn all_ok(&self) -> bool {
        self.failed() == 0
    }

    pub fn max_residual(&self) -> f64 {
        self.reports
            .iter()
            .filter(|r| r.status == Status::Ok)
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "checks": self.reports.len(),
            "passed": self.passed(),
            "failed": self.failed(),
            "precondition_failed": self.count(Status::PreconditionFailed),
            "not_applicable": self.count(Status::NotApplicable),
            "max_residual": self.max_residual(),
            "reports": self.reports.iter().map(IdentityReport::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Runs every check at every index in `indices`, over all directions `k` and
/// ordered pairs `k != l`.
pub fn run_suite<S: Scalar>(sys: &MopucSystem<S>, indices: &[MultiIndex]) -> Result<SuiteReport> {
    let r = sys.r();
    let mut reports = Vec::new();
    for n in indices {
        sys.check_dim(n)?;
        reports.extend(verify_orthogonality(sys, n)?);
        reports.push(verify_type2(sys, n)?);
        reports.extend(verify_third(sys, n)?);
        reports.extend(verify_a_matrix(sys, n)?);
        reports.extend(verify_type1(sys, n)?);
        for k in 0..r {
            reports.extend(verify_lemmas(sys, n, k)?);
            if n.get(k) > 0 {
                reports.extend(verify_type2star(sys, n, k)?);
            }
            for l in (0..r).filter(|&l| l != k) {
                reports.extend(verify_compat_polys(sys, n, k, l)?);
                reports.extend(verify_compat_coeffs(sys, n, k, l)?);
                reports.extend(verify_gamma(sys, n, k, l)?);
            }
        }
    }
    Ok(SuiteReport { reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{MeasureSpec, MeasureSystem};
    use crate::scalar::{ComplexFloat, GaussianRational, TolerancePolicy};

    type G = GaussianRational;

    fn q(n: i64, d: i64) -> G {
        G::ratio(n, d)
    }

    fn idx(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn system<S: Scalar>(a: &[S]) -> MopucSystem<S> {
        let policy = TolerancePolicy::default();
        let specs = a.iter().cloned().map(MeasureSpec::bernstein_szego).collect();
        MopucSystem::new(MeasureSystem::new(specs, &policy).unwrap(), policy)
    }

    fn reference() -> MopucSystem<G> {
        system(&[q(1, 2), q(-1, 3)])
    }

    #[test]
    fn reference_coefficients() {
        let s = reference();
        let c = coeffs(&s, &idx(&[1, 1])).unwrap();
        assert_eq!(c.alpha, q(-1, 6));
        assert_eq!(c.beta, q(-1, 1));
        assert_eq!(c.rho, vec![q(3, 10), q(8, 15)]);
        assert_eq!(c.alpha.clone() * c.beta.clone() + c.rho_sum(), G::one());
        assert_eq!(gamma(&s, &idx(&[0, 0]), 0, 1).unwrap(), q(-5, 6));
        assert_eq!(gamma(&s, &idx(&[0, 0]), 1, 0).unwrap(), q(5, 6));
    }

    #[test]
    fn marginal_coefficients_match_single_measure() {
        // BS(a) has Verblunsky coefficients (a, 0, 0, ...) in this sign convention
        let s = reference();
        let c = coeffs(&s, &idx(&[1, 0])).unwrap();
        assert_eq!(c.alpha, q(-1, 2));
        assert_eq!(c.beta, q(-1, 2));
        assert_eq!(c.rho, vec![q(3, 4), G::zero()]);
        let c = coeffs(&s, &idx(&[3, 0])).unwrap();
        assert_eq!(c.alpha, G::zero());
        assert_eq!(c.rho[0], G::one());
    }

    #[test]
    fn kappa_and_rho_zero_direction() {
        let s = reference();
        assert_eq!(rho(&s, &idx(&[2, 0]), 1).unwrap(), G::zero());
        assert_eq!(kappa(&s, &idx(&[2, 0]), 1).unwrap(), G::zero());
        // single measure BS(1/2): Lambda_(2) = 4z/3 - 2/3
        let single = system(&[q(1, 2)]);
        assert_eq!(kappa(&single, &idx(&[2]), 0).unwrap(), q(4, 3));
    }

    #[test]
    fn suite_is_exact_on_reference_box() {
        let s = reference();
        let indices = MultiIndex::graded_box(&idx(&[3, 3]));
        let rep = run_suite(&s, &indices).unwrap();
        let bad: Vec<_> = rep.failures().map(IdentityReport::to_json).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert!(rep.passed() > 100);
        // geometric moments make every n with n_1, n_2 >= 2 singular
        for r in rep.reports.iter().filter(|r| r.status == Status::PreconditionFailed) {
            assert!(r.required.iter().any(|m| m.entries().iter().all(|&e| e >= 2)), "{:?}", r);
        }
    }

    #[test]
    fn suite_float_within_tolerance() {
        let s = system(&[ComplexFloat::new(0.5, 0.0), ComplexFloat::new(-1.0 / 3.0, 0.0), ComplexFloat::new(0.2, 0.4)]);
        let rep = run_suite(&s, &MultiIndex::simplex(3, 3)).unwrap();
        assert!(rep.all_ok(), "max residual {}", rep.max_residual());
        assert!(rep.max_residual() < 1e-11);
    }

    #[test]
    fn not_applicable_outside_lattice() {
        let s = reference();
        let rep = verify_compat_coeffs(&s, &idx(&[1, 0]), 0, 1).unwrap();
        assert_eq!(rep[0].status, Status::NotApplicable);
        assert_eq!(rep[1].status, Status::Ok);
        assert!(rep[1].pass);
        assert!(matches!(verify_gamma(&s, &idx(&[1, 1]), 1, 1), Err(MopucError::SameDirection(1))));
        assert!(matches!(
            verify_type2star(&s, &idx(&[1, 0]), 1),
            Err(MopucError::EmptyDirection { k: 1, .. })
        ));
    }

    #[test]
    fn json_directions_are_one_based() {
        let s = reference();
        let rep = verify_gamma(&s, &idx(&[1, 1]), 0, 1).unwrap();
        let v = rep[0].to_json();
        assert_eq!(v["k"], 1);
        assert_eq!(v["l"], 2);
        assert_eq!(v["identity"], "gamma-antisymmetry");
        assert_eq!(v["status"], "ok");
    }

    #[test]
    fn precondition_failed_on_identical_measures() {
        // two copies of one measure: (1,1) is not normal
        let s = system(&[q(1, 2), q(1, 2)]);
        let rep = verify_type2(&s, &idx(&[1, 1])).unwrap();
        assert_eq!(rep.status, Status::PreconditionFailed);
        assert!(!rep.is_failure());
        assert!(coeffs(&s, &idx(&[1, 1])).is_err());
    }
}
