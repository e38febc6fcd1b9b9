//! Finite (pseudo)metrics on `[n]` and the named constructors used
//! throughout: split pseudometrics, path metrics and one-point gluing.
//!
//! A metric is stored as its upper triangle in lexicographic pair order
//! `(1,2), (1,3), .., (1,n), (2,3), .., (n-1,n)`. That order is also the
//! coordinate order of `R^{C(n,2)}` used by the arrangement module. Points
//! are 0-based in the API and 1-based in anything printed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::Rat;
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("expected {expected} distances for n = {n}, got {got}")]
    WrongLength { n: usize, expected: usize, got: usize },
    #[error("negative distance {value} at pair ({i},{j})")]
    Negative { i: usize, j: usize, value: String },
    #[error("distance matrix is not symmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },
    #[error("distance matrix has a nonzero diagonal entry at {0}")]
    NonzeroDiagonal(usize),
    #[error("cannot infer the number of points from {0} values")]
    BadCount(usize),
    #[error("gluing needs metrics with positive distances")]
    ZeroGlueDistance,
    #[error("metric has a zero distance; a metric with positive distances is required")]
    ZeroDistance,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Validity class, from weakest to strongest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MetricClass {
    NotPseudometric,
    Pseudometric,
    Metric,
    Strict,
}

impl fmt::Display for MetricClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MetricClass::NotPseudometric => "NOT_PSEUDOMETRIC",
            MetricClass::Pseudometric => "PSEUDOMETRIC",
            MetricClass::Metric => "METRIC",
            MetricClass::Strict => "STRICT",
        };
        f.write_str(s)
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the unordered pair `{i, j}` (0-based, `i != j`) in
/// lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)`, `i < j`, in coordinate order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MetricRepr", into = "MetricRepr")]
pub struct Metric {
    n: usize,
    d: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct MetricRepr {
    n: usize,
    d: Vec<Rat>,
}

impl TryFrom<MetricRepr> for Metric {
    type Error = MetricError;
    fn try_from(r: MetricRepr) -> Result<Self, Self::Error> {
        Metric::new(r.n, r.d)
    }
}

impl From<Metric> for MetricRepr {
    fn from(m: Metric) -> Self {
        MetricRepr { n: m.n, d: m.d }
    }
}

impl Metric {
    /// Upper-triangular values in pair order. Negative values are rejected;
    /// zeros are allowed (pseudometrics).
    pub fn new(n: usize, d: Vec<Rat>) -> Result<Self, MetricError> {
        let expected = pair_count(n);
        if d.len() != expected {
            return Err(MetricError::WrongLength {
                n,
                expected,
                got: d.len(),
            });
        }
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            if d[k].is_negative() {
                return Err(MetricError::Negative {
                    i: i + 1,
                    j: j + 1,
                    value: d[k].to_string(),
                });
            }
        }
        Ok(Metric { n, d })
    }

    pub fn from_ints(n: usize, d: &[i64]) -> Result<Self, MetricError> {
        Metric::new(n, d.iter().map(|&v| Rat::from(v)).collect())
    }

    /// Infers `n` from the number of upper-triangular values.
    pub fn from_upper(d: Vec<Rat>) -> Result<Self, MetricError> {
        let n = (1..64)
            .find(|&n| pair_count(n) == d.len())
            .ok_or(MetricError::BadCount(d.len()))?;
        Metric::new(n, d)
    }

    pub fn from_matrix(rows: &[Vec<Rat>]) -> Result<Self, MetricError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MetricError::Parse("distance matrix is not square".into()));
        }
        for i in 0..n {
            if !rows[i][i].is_zero() {
                return Err(MetricError::NonzeroDiagonal(i + 1));
            }
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(MetricError::Asymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        Metric::new(n, pairs(n).into_iter().map(|(i, j)| rows[i][j].clone()).collect())
    }

    pub fn from_int_matrix(rows: &[&[i64]]) -> Result<Self, MetricError> {
        let rows: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Rat::from(v)).collect())
            .collect();
        Metric::from_matrix(&rows)
    }

    /// The metric with every off-diagonal value equal to `value`.
    pub fn uniform(n: usize, value: impl Into<Rat>) -> Self {
        let v = value.into();
        Metric::new(n, vec![v; pair_count(n)]).expect("uniform metric")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Values in pair order.
    pub fn values(&self) -> &[Rat] {
        &self.d
    }

    /// `d(i, j)` for 0-based points; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Rat {
        if i == j {
            Rat::zero()
        } else {
            self.d[pair_index(self.n, i, j)].clone()
        }
    }

    pub fn matrix(&self) -> Vec<Vec<Rat>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn has_zero_distance(&self) -> bool {
        self.d.iter().any(Rat::is_zero)
    }

    pub fn validate(&self) -> MetricClass {
        let n = self.n;
        let mut strict = true;
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in i + 1..n {
                    if k == j {
                        continue;
                    }
                    let lhs = self.get(i, j) + self.get(j, k);
                    let rhs = self.get(i, k);
                    if lhs < rhs {
                        return MetricClass::NotPseudometric;
                    }
                    if lhs == rhs {
                        strict = false;
                    }
                }
            }
        }
        if self.has_zero_distance() {
            MetricClass::Pseudometric
        } else if strict {
            MetricClass::Strict
        } else {
            MetricClass::Metric
        }
    }

    pub fn is_strict(&self) -> bool {
        self.validate() == MetricClass::Strict
    }

    /// `d'(i, j) = d(σ⁻¹(i), σ⁻¹(j))`.
    pub fn permute(&self, sigma: &Perm) -> Metric {
        assert_eq!(sigma.degree(), self.n);
        let inv = sigma.inverse();
        let d = pairs(self.n)
            .into_iter()
            .map(|(i, j)| self.get(inv.apply(i), inv.apply(j)))
            .collect();
        Metric { n: self.n, d }
    }

    pub fn scale(&self, factor: &Rat) -> Metric {
        assert!(!factor.is_negative(), "negative scale factor");
        Metric {
            n: self.n,
            d: self.d.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Metric) -> Metric {
        assert_eq!(self.n, other.n);
        Metric {
            n: self.n,
            d: self.d.iter().zip(&other.d).map(|(a, b)| a + b).collect(),
        }
    }

    /// `self + weight · δ_split`; the weight may be negative as long as the
    /// result stays nonnegative.
    pub fn add_split(&self, split: &Split, weight: &Rat) -> Result<Metric, MetricError> {
        let d = pairs(self.n)
            .into_iter()
            .zip(&self.d)
            .map(|((i, j), v)| {
                if split.separates(i, j) {
                    v + weight
                } else {
                    v.clone()
                }
            })
            .collect();
        Metric::new(self.n, d)
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric(n={}, [", self.n)?;
        for (k, v) in self.d.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("])")
    }
}

/// A bipartition `A ⊎ B` of `[n]`, stored by the part containing point 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Split {
    n: usize,
    part_a: u64,
}

impl Split {
    /// Canonicalizes so that point 0 lies in `A`. Returns `None` for the
    /// trivial bipartitions.
    pub fn new(n: usize, part: &[usize]) -> Option<Split> {
        assert!(n <= 64);
        let mut mask = 0u64;
        for &p in part {
            assert!(p < n);
            mask |= 1 << p;
        }
        Split::from_mask(n, mask)
    }

    pub fn from_mask(n: usize, mask: u64) -> Option<Split> {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mask = mask & full;
        if mask == 0 || mask == full {
            return None;
        }
        let part_a = if mask & 1 == 1 { mask } else { full ^ mask };
        Some(Split { n, part_a })
    }

    /// Elementary split `{i} | [n] \ {i}`.
    pub fn elementary(n: usize, i: usize) -> Split {
        Split::new(n, &[i]).expect("n >= 2")
    }

    /// All `2^{n-1} - 1` nontrivial splits of `[n]`.
    pub fn all(n: usize) -> impl Iterator<Item = Split> {
        assert!((2..=32).contains(&n));
        (0..(1u64 << (n - 1)))
            .filter_map(move |rest| Split::from_mask(n, 1 | (rest << 1)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask_a(&self) -> u64 {
        self.part_a
    }

    pub fn part_a(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.part_a >> i & 1 == 1).collect()
    }

    pub fn part_b(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.part_a >> i & 1 == 0).collect()
    }

    pub fn separates(&self, i: usize, j: usize) -> bool {
        (self.part_a >> i & 1) != (self.part_a >> j & 1)
    }

    pub fn is_elementary(&self) -> bool {
        let a = self.part_a.count_ones() as usize;
        a == 1 || a == self.n - 1
    }
}

/// 1-based `{1,2}|{3,4}` notation.
impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Vec<usize>| {
            v.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{{{}}}|{{{}}}", show(self.part_a()), show(self.part_b()))
    }
}

/// The pseudometric `δ_{A,B}`: 1 across the split, 0 within a part.
pub fn split_metric(split: &Split) -> Metric {
    let n = split.n();
    let d = pairs(n)
        .into_iter()
        .map(|(i, j)| Rat::from(i64::from(split.separates(i, j))))
        .collect();
    Metric::new(n, d).expect("split values are 0/1")
}

/// Path metric `t^(k)` on `k + 1` points: `d(i, j) = |i - j|`.
pub fn path_metric(k: usize) -> Metric {
    assert!(k >= 1, "path metric needs at least one edge");
    let n = k + 1;
    let d = pairs(n)
        .into_iter()
        .map(|(i, j)| Rat::from((j - i) as i64))
        .collect();
    Metric::new(n, d).expect("path metric")
}

/// One-point gluing: the last point of `m1` is identified with the first
/// point of `m2`, and distances across the glue point add up.
pub fn free_sum(m1: &Metric, m2: &Metric) -> Result<Metric, MetricError> {
    if m1.has_zero_distance() || m2.has_zero_distance() {
        return Err(MetricError::ZeroGlueDistance);
    }
    let n1 = m1.n();
    let n = n1 + m2.n() - 1;
    let glue = n1 - 1;
    let dist = |i: usize, j: usize| -> Rat {
        match (i <= glue, j <= glue) {
            (true, true) => m1.get(i, j),
            (false, false) => m2.get(i - glue, j - glue),
            (true, false) => m1.get(i, glue) + m2.get(0, j - glue),
            (false, true) => m1.get(j, glue) + m2.get(0, i - glue),
        }
    };
    let d = pairs(n).into_iter().map(|(i, j)| dist(i, j)).collect();
    Metric::new(n, d)
}

/// Parses a metric from text. Accepted forms: the JSON object
/// `{"n": .., "d": [..]}`, a square matrix (rows separated by newlines or
/// `;`, entries by commas or whitespace), or a flat list of the `C(n,2)`
/// upper-triangular values.
pub fn parse_metric(text: &str) -> Result<Metric, MetricError> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| MetricError::Parse(e.to_string()));
    }
    let rows: Vec<Vec<Rat>> = trimmed
        .split(['\n', ';'])
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<Rat>().map_err(|e| MetricError::Parse(e.to_string())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    if rows.len() > 1 && rows.iter().all(|r| r.len() == rows.len()) {
        return Metric::from_matrix(&rows);
    }
    Metric::from_upper(rows.into_iter().flatten().collect())
}
