//! Metric classes: tree-like, Kalmanson, split decomposition and the
//! six-point condition.

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::Rat;
use crate::metrics::{pairs, Metric, Split};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassError {
    #[error("n = {n} exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },
    #[error("split decomposition and the five-point criterion disagree")]
    InternalDisagreement,
}

/// `ρ(u, v)` with `ρ(u, u) = 0`.
fn d(m: &Metric, u: usize, v: usize) -> Rat {
    m.get(u, v)
}

/// Isolation index `α_{A,B}`: half the minimum over `a, a' ∈ A`, `b, b' ∈ B`
/// of `max{a'b + b'a, a'b' + ab, aa' + bb'} − (aa' + bb')`.
pub fn isolation_index(m: &Metric, a: &[usize], b: &[usize]) -> Rat {
    isolation_index_of(|u, v| d(m, u, v), a, b)
}

/// Isolation index of any symmetric function with zero diagonal.
pub fn isolation_index_of(rho: impl Fn(usize, usize) -> Rat, a: &[usize], b: &[usize]) -> Rat {
    if a.iter().any(|x| b.contains(x)) {
        return Rat::zero();
    }
    let mut best: Option<Rat> = None;
    for (&x, &x2) in a.iter().cartesian_product(a) {
        for (&y, &y2) in b.iter().cartesian_product(b) {
            let base = rho(x, x2) + rho(y, y2);
            let t1 = rho(x2, y) + rho(y2, x);
            let t2 = rho(x2, y2) + rho(x, y);
            let mx = [t1, t2, base.clone()].into_iter().max().expect("three terms");
            let v = mx - base;
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    best.expect("nonempty parts") / Rat::from(2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedSplit {
    pub split: String,
    #[serde(skip)]
    pub raw: Split,
    pub weight: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitDecomposition {
    pub n: usize,
    pub summands: Vec<WeightedSplit>,
    /// Split-prime part in pair order; may be negative.
    pub residual: Vec<Rat>,
}

impl SplitDecomposition {
    pub fn residual_is_zero(&self) -> bool {
        self.residual.iter().all(Rat::is_zero)
    }

    /// `residual + Σ weight · δ_split` in pair order.
    pub fn reconstruct(&self) -> Vec<Rat> {
        pairs(self.n)
            .into_iter()
            .zip(&self.residual)
            .map(|((i, j), r)| {
                self.summands
                    .iter()
                    .filter(|s| s.raw.separates(i, j))
                    .map(|s| s.weight.clone())
                    .sum::<Rat>()
                    + r
            })
            .collect()
    }
}

pub fn split_decompose(m: &Metric) -> SplitDecomposition {
    let n = m.n();
    let mut summands = Vec::new();
    let mut residual: Vec<Rat> = m.values().to_vec();
    for split in Split::all(n) {
        let w = isolation_index(m, &split.part_a(), &split.part_b());
        if !w.is_positive() {
            continue;
        }
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            if split.separates(i, j) {
                residual[k] -= &w;
            }
        }
        summands.push(WeightedSplit {
            split: split.to_string(),
            raw: split,
            weight: w,
        });
    }
    SplitDecomposition {
        n,
        summands,
        residual,
    }
}

/// `α_{tu,vw} <= α_{tx,vw} + α_{tu,vx}` for pairwise distinct `t,u,v,w,x`.
pub fn five_point_criterion(m: &Metric) -> bool {
    let n = m.n();
    (0..n).permutations(5.min(n)).filter(|p| p.len() == 5).all(|p| {
        let (t, u, v, w, x) = (p[0], p[1], p[2], p[3], p[4]);
        isolation_index(m, &[t, u], &[v, w])
            <= isolation_index(m, &[t, x], &[v, w]) + isolation_index(m, &[t, u], &[v, x])
    })
}

/// Zero residual, cross-checked against the five-point criterion.
pub fn is_totally_split_decomposable(m: &Metric) -> Result<bool, ClassError> {
    let by_residual = split_decompose(m).residual_is_zero();
    if by_residual != five_point_criterion(m) {
        return Err(ClassError::InternalDisagreement);
    }
    Ok(by_residual)
}

/// Four-point condition on every quadruple: the largest of the three pair
/// sums is attained at least twice.
pub fn is_tree_like(m: &Metric) -> bool {
    (0..m.n()).combinations(4).all(|q| {
        let (i, j, k, l) = (q[0], q[1], q[2], q[3]);
        let mut s = [
            d(m, i, j) + d(m, k, l),
            d(m, i, k) + d(m, j, l),
            d(m, i, l) + d(m, j, k),
        ];
        s.sort();
        s[1] == s[2]
    })
}

pub const MAX_KALMANSON_N: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Kalmanson {
    pub holds: bool,
    /// 1-based witness cyclic order.
    pub order: Option<Vec<usize>>,
}

/// Searches cyclic orders (point 1 first, one of each mirror pair) for one
/// under which `ρ_ik + ρ_jl >= max(ρ_ij + ρ_kl, ρ_il + ρ_jk)` for all
/// `i ≺ j ≺ k ≺ l`.
pub fn is_kalmanson(m: &Metric) -> Result<Kalmanson, ClassError> {
    let n = m.n();
    if n > MAX_KALMANSON_N {
        return Err(ClassError::TooLarge {
            n,
            max: MAX_KALMANSON_N,
        });
    }
    if n < 4 {
        return Ok(Kalmanson {
            holds: true,
            order: Some((1..=n).collect()),
        });
    }
    for rest in (1..n).permutations(n - 1) {
        if rest[0] > rest[n - 2] {
            continue;
        }
        let mut order = vec![0];
        order.extend(rest);
        if kalmanson_order_holds(m, &order) {
            return Ok(Kalmanson {
                holds: true,
                order: Some(order.iter().map(|v| v + 1).collect()),
            });
        }
    }
    Ok(Kalmanson {
        holds: false,
        order: None,
    })
}

pub fn kalmanson_order_holds(m: &Metric, order: &[usize]) -> bool {
    order.iter().copied().combinations(4).all(|q| {
        let (i, j, k, l) = (q[0], q[1], q[2], q[3]);
        let diag = d(m, i, k) + d(m, j, l);
        diag >= d(m, i, j) + d(m, k, l) && diag >= d(m, i, l) + d(m, j, k)
    })
}

/// Every 6-subset has distinct `i, j` with
/// `ρ_ij + ρ_kl <= max{ρ_ik + ρ_jl, ρ_jk + ρ_il}` for all distinct `k, l` in
/// the remaining four points.
pub fn six_point_condition(m: &Metric) -> bool {
    let n = m.n();
    if n < 6 {
        return true;
    }
    (0..n).combinations(6).all(|subset| {
        subset.iter().copied().tuple_combinations().any(|(i, j)| {
            let rest: Vec<usize> = subset.iter().copied().filter(|&v| v != i && v != j).collect();
            rest.iter().copied().tuple_combinations().all(|(k, l)| {
                let lhs = d(m, i, j) + d(m, k, l);
                let a = d(m, i, k) + d(m, j, l);
                let b = d(m, j, k) + d(m, i, l);
                lhs <= a.max(b)
            })
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub tree_like: bool,
    pub kalmanson: Option<Kalmanson>,
    pub totally_split_decomposable: bool,
    pub six_point: bool,
    pub splits: Vec<WeightedSplit>,
    pub residual_norm_zero: bool,
}

pub fn class_report(m: &Metric) -> Result<ClassReport, ClassError> {
    let dec = split_decompose(m);
    let tsd = is_totally_split_decomposable(m)?;
    let kalmanson = match is_kalmanson(m) {
        Ok(k) => Some(k),
        Err(ClassError::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ClassReport {
        tree_like: is_tree_like(m),
        kalmanson,
        totally_split_decomposable: tsd,
        six_point: six_point_condition(m),
        residual_norm_zero: dec.residual_is_zero(),
        splits: dec.summands,
    })
}
