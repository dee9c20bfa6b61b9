#![allow(dead_code)]

use mopuc::{parse_system, MopucSystem, Scalar, TolerancePolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const REFERENCE: &str = r#"{"measures":[
  {"type":"bernstein-szego","a":{"re":"1/2","im":"0"}},
  {"type":"bernstein-szego","a":{"re":"-1/3","im":"0"}}]}"#;

pub const DUPLICATED: &str = r#"{"measures":[
  {"type":"bernstein-szego","a":{"re":"1/2"}},
  {"type":"bernstein-szego","a":{"re":"1/2"}}]}"#;

pub fn load<S: Scalar>(text: &str) -> MopucSystem<S> {
    let policy = TolerancePolicy::default();
    MopucSystem::new(parse_system(text, &policy).unwrap(), policy)
}

fn literal(num: i64, den: i64) -> String {
    format!("\"{num}/{den}\"")
}

/// Random Bernstein-Szego parameter `(x + iy)/8` with `|a| <= 3/4`.
fn random_bs(rng: &mut ChaCha8Rng) -> String {
    loop {
        let (x, y): (i64, i64) = (rng.gen_range(-6..=6), rng.gen_range(-6..=6));
        if x * x + y * y <= 36 {
            return format!(
                r#"{{"type":"bernstein-szego","a":{{"re":{},"im":{}}}}}"#,
                literal(x, 8),
                literal(y, 8)
            );
        }
    }
}

/// Trigonometric density of degree 1..=3 with coefficients `(x + iy)/16`,
/// `|x|, |y| <= 2`, so the density stays positive.
fn random_trig(rng: &mut ChaCha8Rng) -> String {
    let degree = rng.gen_range(1..=3);
    let coeffs: Vec<String> = (1..=degree)
        .map(|k| {
            let (x, y): (i64, i64) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            format!(r#"{{"k":{k},"c":{{"re":{},"im":{}}}}}"#, literal(x, 16), literal(y, 16))
        })
        .collect();
    format!(r#"{{"type":"trig-density","coeffs":[{}]}}"#, coeffs.join(","))
}

/// The seeded corpus of random systems: `r` in {2, 3}, each measure either a
/// Bernstein-Szego measure or a small trigonometric density.
pub fn corpus(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(2..=3);
            let measures: Vec<String> = (0..r)
                .map(|_| if rng.gen_bool(0.5) { random_bs(&mut rng) } else { random_trig(&mut rng) })
                .collect();
            format!(r#"{{"measures":[{}]}}"#, measures.join(","))
        })
        .collect()
}

/// `|f - e| / |e|`, or `|f|` when `e` is exactly zero.
pub fn relative_error<S: Scalar, T: Scalar>(exact: &S, float: &T) -> f64 {
    let e = exact.to_c64();
    let f = float.to_c64();
    if exact.is_exact_zero() {
        f.norm()
    } else {
        (f - e).norm() / e.norm()
    }
}
