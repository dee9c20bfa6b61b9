//! Classical Szegő recursion on a single measure, used as an independent
//! cross-check of the multi-index solver on marginal indices.
//!
//! Works directly on a moment list and raw coefficient vectors; nothing here
//! goes through the moment-matrix solves.

use crate::error::{MopucError, Result};
use crate::scalar::{Scalar, TolerancePolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct SzegoStep<S> {
    /// Monic `Phi_m`, coefficients in ascending order.
    pub phi: Vec<S>,
    /// `Phi*_m`, with `Phi*_m(0) = 1`.
    pub phi_star: Vec<S>,
    /// `alpha_m = Phi_m(0)`; `alpha_0 = 1`.
    pub alpha: S,
    /// `1 - |alpha_m|^2` for `m >= 1`; zero at `m = 0`.
    pub rho: S,
}

// <f, 1> = sum_a f_a nu^a
fn pair_with_one<S: Scalar>(f: &[S], moments: &[S]) -> S {
    f.iter()
        .zip(moments)
        .fold(S::zero(), |acc, (c, nu)| acc + c.clone() * nu.clone())
}

fn shift<S: Scalar>(f: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(f.len() + 1);
    out.push(S::zero());
    out.extend(f.iter().cloned());
    out
}

fn axpy<S: Scalar>(x: &[S], a: &S, y: &[S]) -> Vec<S> {
    let n = x.len().max(y.len());
    (0..n)
        .map(|i| {
            let xi = x.get(i).cloned().unwrap_or_else(S::zero);
            let yi = y.get(i).cloned().unwrap_or_else(S::zero);
            xi + a.clone() * yi
        })
        .collect()
}

/// Runs `Phi_{m+1} = z Phi_m + alpha_{m+1} Phi*_m`,
/// `Phi*_{m+1} = Phi*_m + conj(alpha_{m+1}) z Phi_m` for `m < degree`, with
/// `alpha_{m+1} = -<z Phi_m, 1> / <Phi*_m, 1>`.
///
/// `moments[p]` is `nu^p` for `p = 0..=degree`; negative moments are never
/// needed. Returns `degree + 1` steps.
pub fn szego_oracle<S: Scalar>(moments: &[S], degree: usize, policy: &TolerancePolicy) -> Result<Vec<SzegoStep<S>>> {
    if moments.len() <= degree {
        return Err(MopucError::Schema(format!(
            "need {} moments for degree {degree}, got {}",
            degree + 1,
            moments.len()
        )));
    }
    let mut phi = vec![S::one()];
    let mut star = vec![S::one()];
    let mut out = vec![SzegoStep {
        phi: phi.clone(),
        phi_star: star.clone(),
        alpha: S::one(),
        rho: S::zero(),
    }];
    for m in 0..degree {
        let den = pair_with_one(&star, moments);
        if den.is_zero_under(policy) {
            return Err(MopucError::SingularMinor(m + 1));
        }
        let zphi = shift(&phi);
        let alpha = -(pair_with_one(&zphi, moments) / den);
        phi = axpy(&zphi, &alpha, &star);
        star = axpy(&star, &alpha.conj(), &zphi);
        out.push(SzegoStep {
            phi: phi.clone(),
            phi_star: star.clone(),
            rho: S::one() - alpha.clone() * alpha.conj(),
            alpha,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ComplexFloat, GaussianRational};

    type G = GaussianRational;

    #[test]
    fn lebesgue_gives_monomials() {
        let mut moments = vec![G::zero(); 5];
        moments[0] = G::one();
        let steps = szego_oracle(&moments, 4, &TolerancePolicy::default()).unwrap();
        for (m, s) in steps.iter().enumerate().skip(1) {
            assert_eq!(s.alpha, G::zero());
            assert_eq!(s.rho, G::one());
            assert_eq!(s.phi[m], G::one());
            assert!(s.phi[..m].iter().all(|c| *c == G::zero()));
        }
    }

    #[test]
    fn bernstein_szego_half() {
        // nu^p = 2^{-p}: Phi_m = z^{m-1}(z - 1/2)
        let moments: Vec<G> = (0..7).map(|p| G::ratio(1, 1 << p)).collect();
        let steps = szego_oracle(&moments, 6, &TolerancePolicy::default()).unwrap();
        assert_eq!(steps[1].alpha, G::ratio(-1, 2));
        assert_eq!(steps[1].rho, G::ratio(3, 4));
        for m in 2..=6 {
            assert_eq!(steps[m].alpha, G::zero());
            assert_eq!(steps[m].phi[m - 1], G::ratio(-1, 2));
            assert_eq!(steps[m].phi_star, {
                let mut v = vec![G::zero(); m + 1];
                v[0] = G::one();
                v[1] = G::ratio(-1, 2);
                v
            });
        }
    }

    #[test]
    fn cosine_density_float() {
        // w = 1 + cos(theta)/2: nu^{+-1} = 1/4
        let mut moments = vec![ComplexFloat::new(0.0, 0.0); 9];
        moments[0] = ComplexFloat::new(1.0, 0.0);
        moments[1] = ComplexFloat::new(0.25, 0.0);
        let steps = szego_oracle(&moments, 8, &TolerancePolicy::default()).unwrap();
        for s in &steps[1..] {
            assert!(s.alpha.im.abs() < 1e-15);
            assert!(s.alpha.norm() < 1.0);
        }
        assert!((steps[1].alpha.re + 0.25).abs() < 1e-15);
    }

    #[test]
    fn singular_minor_detected() {
        // point mass at 1: Phi_1 = z - 1 has zero norm
        let moments = vec![G::one(); 4];
        let err = szego_oracle(&moments, 3, &TolerancePolicy::default()).unwrap_err();
        assert_eq!(err, MopucError::SingularMinor(2));
        assert!(szego_oracle(&moments[..2], 3, &TolerancePolicy::default()).is_err());
    }
}
