//! Systems of probability measures on the unit circle, seen only through
//! their trigonometric moments `nu^p = int z^p dmu`.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use serde_json::Value;

use crate::error::{MopucError, Result};
use crate::scalar::{scalar_from_json, Scalar, TolerancePolicy};

/// Grid used for the (warn-only) nonnegativity check of trigonometric densities.
pub const DENSITY_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<S> {
    pub z: S,
    pub w: S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec<S> {
    /// Density `sum_k c_k e^{ik theta}` against `d theta / 2 pi`. Holds both
    /// signs of `k`.
    TrigDensity { coeffs: BTreeMap<i64, S> },
    /// Normalized `1 / |1 - a e^{i theta}|^2` with `|a| < 1`.
    BernsteinSzego { a: S },
    /// `w0` times normalized Lebesgue measure plus point masses on the circle.
    LebesgueAtoms { w0: S, atoms: Vec<Atom<S>> },
}

impl<S: Scalar> MeasureSpec<S> {
    pub fn lebesgue() -> Self {
        MeasureSpec::LebesgueAtoms {
            w0: S::one(),
            atoms: Vec::new(),
        }
    }

    pub fn bernstein_szego(a: S) -> Self {
        MeasureSpec::BernsteinSzego { a }
    }

    /// Coefficients with `k < 0` may be omitted and are filled by conjugate
    /// symmetry; a missing `c_0` is taken to be 1. Given pairs must be
    /// conjugate-symmetric.
    pub fn trig_density(given: impl IntoIterator<Item = (i64, S)>, policy: &TolerancePolicy) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, c) in given {
            if coeffs.insert(k, c).is_some() {
                return Err(MopucError::Schema(format!("duplicate trig coefficient k = {k}")));
            }
        }
        coeffs.entry(0).or_insert_with(S::one);
        let keys: Vec<i64> = coeffs.keys().copied().collect();
        for k in keys {
            let c = coeffs[&k].clone();
            match coeffs.get(&-k) {
                Some(mirror) => {
                    if !(mirror.clone() - c.conj()).is_zero_under(policy) {
                        return Err(MopucError::Schema("non-Hermitian coefficients".into()));
                    }
                }
                None => {
                    coeffs.insert(-k, c.conj());
                }
            }
        }
        Ok(MeasureSpec::TrigDensity { coeffs })
    }

    /// Checks the invariants of a single spec; returns warnings.
    pub fn validate(&self, measure: usize, policy: &TolerancePolicy) -> Result<Vec<String>> {
        let invalid = |reason: String| MopucError::InvalidMeasure { measure, reason };
        let one = S::one();
        let zero = S::zero();
        match self {
            MeasureSpec::TrigDensity { coeffs } => {
                let c0 = coeffs.get(&0).cloned().unwrap_or_else(S::zero);
                if !(c0 - one).is_zero_under(policy) {
                    return Err(invalid("c_0 must equal 1 (probability normalization)".into()));
                }
                for (k, c) in coeffs {
                    let mirror = coeffs.get(&-k).cloned().unwrap_or_else(S::zero);
                    if !(mirror - c.conj()).is_zero_under(policy) {
                        return Err(invalid("non-Hermitian coefficients".into()));
                    }
                }
                let min = density_minimum(coeffs);
                if min < -policy.zero_eps {
                    return Ok(vec![format!(
                        "measure {}: density is negative on a {DENSITY_GRID}-point grid (min {min:.3e})",
                        measure + 1
                    )]);
                }
                Ok(Vec::new())
            }
            MeasureSpec::BernsteinSzego { a } => {
                if a.norm_sqr().real_cmp(&one) != std::cmp::Ordering::Less {
                    return Err(invalid("Bernstein-Szego parameter needs |a| < 1".into()));
                }
                Ok(Vec::new())
            }
            MeasureSpec::LebesgueAtoms { w0, atoms } => {
                let check_weight = |w: &S, what: &str| -> Result<()> {
                    if !w.imag_is_zero(policy)
                        || (w.real_cmp(&zero) == std::cmp::Ordering::Less && !w.is_zero_under(policy))
                    {
                        return Err(invalid(format!("{what} must be real and nonnegative")));
                    }
                    Ok(())
                };
                check_weight(w0, "w0")?;
                let mut total = w0.clone();
                for (i, atom) in atoms.iter().enumerate() {
                    check_weight(&atom.w, &format!("weight of atom {}", i + 1))?;
                    if !(atom.z.norm_sqr() - one.clone()).is_zero_under(policy) {
                        return Err(invalid(format!("atom {} is not on the unit circle", i + 1)));
                    }
                    total = total + atom.w.clone();
                }
                if !(total - one).is_zero_under(policy) {
                    return Err(invalid("weights must sum to 1".into()));
                }
                Ok(Vec::new())
            }
        }
    }

    /// Closed-form moment `nu^p`.
    pub fn moment(&self, p: i64) -> S {
        match self {
            MeasureSpec::TrigDensity { coeffs } => coeffs.get(&-p).cloned().unwrap_or_else(S::zero),
            MeasureSpec::BernsteinSzego { a } => {
                if p >= 0 {
                    a.conj().powi(p as u32)
                } else {
                    a.powi((-p) as u32)
                }
            }
            MeasureSpec::LebesgueAtoms { w0, atoms } => {
                let base = if p == 0 { w0.clone() } else { S::zero() };
                atoms.iter().fold(base, |acc, atom| {
                    let zp = if p >= 0 {
                        atom.z.powi(p as u32)
                    } else {
                        atom.z.conj().powi((-p) as u32)
                    };
                    acc + atom.w.clone() * zp
                })
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            MeasureSpec::TrigDensity { coeffs } => serde_json::json!({
                "type": "trig-density",
                "coeffs": coeffs.iter().map(|(k, c)| serde_json::json!({"k": k, "c": c.to_json()})).collect::<Vec<_>>(),
            }),
            MeasureSpec::BernsteinSzego { a } => serde_json::json!({
                "type": "bernstein-szego",
                "a": a.to_json(),
            }),
            MeasureSpec::LebesgueAtoms { w0, atoms } => serde_json::json!({
                "type": "lebesgue-atoms",
                "w0": w0.to_json(),
                "atoms": atoms.iter().map(|a| serde_json::json!({"z": a.z.to_json(), "w": a.w.to_json()})).collect::<Vec<_>>(),
            }),
        }
    }
}

fn density_minimum<S: Scalar>(coeffs: &BTreeMap<i64, S>) -> f64 {
    let cs: Vec<(f64, num_complex::Complex64)> = coeffs.iter().map(|(k, c)| (*k as f64, c.to_c64())).collect();
    (0..DENSITY_GRID)
        .map(|i| {
            let theta = std::f64::consts::TAU * i as f64 / DENSITY_GRID as f64;
            cs.iter()
                .map(|(k, c)| (c * num_complex::Complex64::from_polar(1.0, k * theta)).re)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// An ordered, validated list of `r >= 1` measures with memoized moments.
#[derive(Debug)]
pub struct MeasureSystem<S> {
    specs: Vec<MeasureSpec<S>>,
    warnings: Vec<String>,
    memo: RwLock<HashMap<(usize, i64), S>>,
}

impl<S: Scalar> Clone for MeasureSystem<S> {
    fn clone(&self) -> Self {
        MeasureSystem {
            specs: self.specs.clone(),
            warnings: self.warnings.clone(),
            memo: RwLock::new(HashMap::new()),
        }
    }
}

impl<S: Scalar> MeasureSystem<S> {
    pub fn new(specs: Vec<MeasureSpec<S>>, policy: &TolerancePolicy) -> Result<Self> {
        if specs.is_empty() {
            return Err(MopucError::EmptySystem);
        }
        let mut warnings = Vec::new();
        for (j, spec) in specs.iter().enumerate() {
            warnings.extend(spec.validate(j, policy)?);
        }
        Ok(MeasureSystem {
            specs,
            warnings,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn r(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[MeasureSpec<S>] {
        &self.specs
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `nu_j^p` for the 0-based measure `j`.
    pub fn moment(&self, j: usize, p: i64) -> Result<S> {
        if j >= self.r() {
            return Err(MopucError::MeasureOutOfRange { index: j, r: self.r() });
        }
        Ok(self.moment_unchecked(j, p))
    }

    pub(crate) fn moment_unchecked(&self, j: usize, p: i64) -> S {
        if let Some(v) = self.memo.read().expect("moment memo poisoned").get(&(j, p)) {
            return v.clone();
        }
        let v = self.specs[j].moment(p);
        self.memo
            .write()
            .expect("moment memo poisoned")
            .entry((j, p))
            .or_insert(v)
            .clone()
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "measures": self.specs.iter().map(MeasureSpec::to_json).collect::<Vec<_>>() })
    }
}

fn schema(measure: usize, msg: impl Into<String>) -> MopucError {
    MopucError::InvalidMeasure {
        measure,
        reason: msg.into(),
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, measure: usize) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(measure, format!("missing field {key:?}")))
}

fn parse_spec<S: Scalar>(v: &Value, measure: usize, policy: &TolerancePolicy) -> Result<MeasureSpec<S>> {
    let obj = v.as_object().ok_or_else(|| schema(measure, "measure must be an object"))?;
    let kind = field(obj, "type", measure)?
        .as_str()
        .ok_or_else(|| schema(measure, "\"type\" must be a string"))?;
    let scalar = |v: &Value| scalar_from_json::<S>(v).map_err(|e| schema(measure, e.to_string()));
    match kind {
        "trig-density" => {
            let list = field(obj, "coeffs", measure)?
                .as_array()
                .ok_or_else(|| schema(measure, "\"coeffs\" must be an array"))?;
            let mut given = Vec::with_capacity(list.len());
            for entry in list {
                let e = entry.as_object().ok_or_else(|| schema(measure, "coefficient must be an object"))?;
                let k = field(e, "k", measure)?
                    .as_i64()
                    .ok_or_else(|| schema(measure, "\"k\" must be an integer"))?;
                given.push((k, scalar(field(e, "c", measure)?)?));
            }
            MeasureSpec::trig_density(given, policy).map_err(|e| match e {
                MopucError::Schema(msg) => schema(measure, msg),
                other => other,
            })
        }
        "bernstein-szego" => Ok(MeasureSpec::BernsteinSzego {
            a: scalar(field(obj, "a", measure)?)?,
        }),
        "lebesgue-atoms" => {
            let w0 = scalar(field(obj, "w0", measure)?)?;
            let atoms = match obj.get("atoms") {
                None => Vec::new(),
                Some(list) => list
                    .as_array()
                    .ok_or_else(|| schema(measure, "\"atoms\" must be an array"))?
                    .iter()
                    .map(|a| {
                        let a = a.as_object().ok_or_else(|| schema(measure, "atom must be an object"))?;
                        Ok(Atom {
                            z: scalar(field(a, "z", measure)?)?,
                            w: scalar(field(a, "w", measure)?)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            Ok(MeasureSpec::LebesgueAtoms { w0, atoms })
        }
        other => Err(schema(measure, format!("unknown measure type {other:?}"))),
    }
}

/// Parses and validates a measure-system document:
///
/// ```json
/// {"measures": [{"type": "bernstein-szego", "a": {"re": "1/2", "im": "0"}}]}
/// ```
pub fn parse_system<S: Scalar>(text: &str, policy: &TolerancePolicy) -> Result<MeasureSystem<S>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| MopucError::Schema(e.to_string()))?;
    let list = doc
        .get("measures")
        .and_then(Value::as_array)
        .ok_or_else(|| MopucError::Schema("expected an object with a \"measures\" array".into()))?;
    if list.is_empty() {
        return Err(MopucError::EmptySystem);
    }
    let specs = list
        .iter()
        .enumerate()
        .map(|(j, v)| parse_spec(v, j, policy))
        .collect::<Result<Vec<_>>>()?;
    MeasureSystem::new(specs, policy)
}
