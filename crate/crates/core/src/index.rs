use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MopucError;

/// A point `(n_1, ..., n_r)` of the nonnegative integer lattice.
///
/// Directions are 0-based throughout the library.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(r: usize) -> Self {
        MultiIndex(vec![0; r])
    }

    /// `j * e_k` in dimension `r`.
    pub fn marginal(r: usize, k: usize, j: usize) -> Self {
        let mut v = vec![0; r];
        v[k] = j;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n|`.
    pub fn norm(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, k: usize) -> usize {
        self.0[k]
    }

    /// Directions with a positive entry.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &x)| x > 0).map(|(k, _)| k)
    }

    pub fn plus(&self, k: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[k] += 1;
        MultiIndex(v)
    }

    /// `n - e_k`, or `None` when it leaves the lattice.
    pub fn minus(&self, k: usize) -> Option<MultiIndex> {
        let mut v = self.0.clone();
        v[k] = v[k].checked_sub(1)?;
        Some(MultiIndex(v))
    }

    /// `n + e_plus - e_minus` (in that order, so `n + e_k - e_k = n`).
    pub fn shift(&self, plus: Option<usize>, minus: &[usize]) -> Option<MultiIndex> {
        let mut v: Vec<isize> = self.0.iter().map(|&x| x as isize).collect();
        if let Some(k) = plus {
            v[k] += 1;
        }
        for &k in minus {
            v[k] -= 1;
        }
        if v.iter().any(|&x| x < 0) {
            return None;
        }
        Some(MultiIndex(v.into_iter().map(|x| x as usize).collect()))
    }

    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All indices in the box `0 <= n <= max`, in graded lexicographic order.
    pub fn graded_box(max: &MultiIndex) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; max.dim()];
        loop {
            out.push(MultiIndex(cur.clone()));
            let mut k = max.dim();
            loop {
                if k == 0 {
                    sort_graded(&mut out);
                    return out;
                }
                k -= 1;
                if cur[k] < max.0[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = 0;
            }
        }
    }

    /// All indices of dimension `r` with `|n| <= total`, graded lexicographic.
    pub fn simplex(r: usize, total: usize) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = MultiIndex::graded_box(&MultiIndex(vec![total; r]))
            .into_iter()
            .filter(|n| n.norm() <= total)
            .collect();
        sort_graded(&mut out);
        out
    }
}

fn sort_graded(v: &mut [MultiIndex]) {
    v.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| b.0.cmp(&a.0)));
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for MultiIndex {
    type Err = MopucError;

    /// Accepts `1,2,0` or `(1,2,0)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        if t.is_empty() {
            return Err(MopucError::Schema(format!("empty multi-index {s:?}")));
        }
        t.split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| MopucError::Schema(format!("bad multi-index {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(MultiIndex)
    }
}
