//! Multiple orthogonal polynomials on the unit circle.
//!
//! Given a system of `r` probability measures on the unit circle (through
//! their trigonometric moments), this crate computes the type II, II*, I and
//! I* multiple orthogonal polynomials at any normal multi-index, extracts the
//! recurrence coefficients `alpha_n`, `beta_n`, `rho_{n,j}`, `gamma_n^{kl}`,
//! `kappa_{n,k}`, and checks the Szegő-type recurrences, the compatibility
//! relations between neighbouring indices and the Christoffel–Darboux
//! formula along lattice paths.
//!
//! Every computation runs over either [`GaussianRational`] (exact) or
//! [`ComplexFloat`] (with a [`TolerancePolicy`]).

pub mod cd;
pub mod error;
pub mod families;
pub mod index;
pub mod linalg;
pub mod measures;
pub mod poly;
pub mod recurrence;
pub mod scalar;
pub mod szego;

pub use cd::{cd_bivariate, cd_check, make_path, CdEvaluation, LatticePath, PathKind};
pub use error::{MopucError, Result};
pub use families::{Families, IndexData, MopucSystem};
pub use index::MultiIndex;
pub use measures::{parse_system, Atom, MeasureSpec, MeasureSystem};
pub use poly::{Poly, PolyVector};
pub use recurrence::{coeffs, gamma, run_suite, CoeffRecord, Identity, IdentityReport, Status, SuiteReport};
pub use scalar::{Backend, ComplexFloat, GaussianRational, Scalar, TolerancePolicy};
pub use szego::{szego_oracle, SzegoStep};
