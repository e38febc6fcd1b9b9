//! The Wasserstein arrangement `W_n` in `R^{C(n,2)}`.
//!
//! Each hyperplane comes from an even cycle `v_0 v_1 .. v_{2k-1}` of `K_n`.
//! The canonical cycle is the lexicographically least vertex sequence over
//! rotations and reflections, so `v_0` is the smallest vertex and `v_1` its
//! smaller neighbour. Reading the cycle as `a_1, b_1, a_k, b_k, .., a_2, b_2`
//! gives the tuples `a, b`; the edges `{a_i, b_i}` (even positions) form
//! `C+`, the edges `{a_i, b_{i+1}}` form `C-`. The normal is `+1` on `C+`
//! and `-1` on `C-`, and the sign of a metric is
//! `sign(Σ_{C-} x − Σ_{C+} x)`, positive on the open positive side.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::int_rank;
use crate::metrics::{pair_count, pair_index, Metric, Split};
use crate::par::{self, Execution};
use crate::perm::{Perm, Subgroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("n = {n} is out of range; this operation supports {min} <= n <= {max}")]
    TooLarge { n: usize, min: usize, max: usize },
    #[error("sign vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CycleHyperplane {
    pub n: usize,
    pub k: usize,
    /// 0-based, `a[0] = a_1`.
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Canonical cycle vertex sequence.
    #[serde(skip)]
    pub cycle: Vec<usize>,
    pub normal: Vec<i64>,
}

impl CycleHyperplane {
    /// Builds the hyperplane of a cycle given in canonical form.
    fn from_canonical_cycle(n: usize, cycle: Vec<usize>) -> Self {
        let k = cycle.len() / 2;
        let mut a = vec![0; k];
        let mut b = vec![0; k];
        // position 2m holds a_{idx(m)} with idx(0) = 1, idx(m) = k + 1 - m
        for m in 0..k {
            let i = if m == 0 { 0 } else { k - m };
            a[i] = cycle[2 * m];
            b[i] = cycle[2 * m + 1];
        }
        let mut normal = vec![0i64; pair_count(n)];
        for i in 0..k {
            normal[pair_index(n, a[i], b[i])] += 1;
            normal[pair_index(n, a[i], b[(i + 1) % k])] -= 1;
        }
        CycleHyperplane {
            n,
            k,
            a,
            b,
            cycle,
            normal,
        }
    }

    /// Edges `{a_i, b_i}` as sorted pairs.
    pub fn positive_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = (0..self.k)
            .map(|i| sorted(self.a[i], self.b[i]))
            .collect();
        v.sort();
        v
    }

    pub fn negative_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = (0..self.k)
            .map(|i| sorted(self.a[i], self.b[(i + 1) % self.k]))
            .collect();
        v.sort();
        v
    }

    /// `Σ_{C-} x − Σ_{C+} x` as a sign.
    pub fn side(&self, m: &Metric) -> i8 {
        let v: crate::exactnum::Rat = self
            .normal
            .iter()
            .zip(m.values())
            .filter(|(c, _)| **c != 0)
            .map(|(&c, x)| if c > 0 { -x } else { x.clone() })
            .sum();
        v.signum()
    }
}

fn sorted(x: usize, y: usize) -> (usize, usize) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Paper-style label `H_{(a_1,..,a_k),(b_1,..,b_k)}`, 1-based.
impl fmt::Display for CycleHyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = |v: &[usize]| v.iter().map(|x| x + 1).join(",");
        write!(f, "H_({}),({})", one(&self.a), one(&self.b))
    }
}

impl fmt::Debug for CycleHyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Lexicographically least rotation/reflection of a cycle.
fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    let len = cycle.len();
    let start = (0..len).min_by_key(|&i| cycle[i]).expect("nonempty cycle");
    let fwd: Vec<usize> = (0..len).map(|t| cycle[(start + t) % len]).collect();
    let bwd: Vec<usize> = (0..len).map(|t| cycle[(start + len - t) % len]).collect();
    fwd.min(bwd)
}

/// `(1/2) Σ_{k>=2} C(n,2k) (2k-1)!`.
pub fn hyperplane_count_formula(n: usize) -> u128 {
    let binom = |n: u128, k: u128| -> u128 { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) };
    let fact = |m: u128| -> u128 { (1..=m).product() };
    (2..=n / 2)
        .map(|k| binom(n as u128, 2 * k as u128) * fact(2 * k as u128 - 1))
        .sum::<u128>()
        / 2
}

/// The arrangement in canonical order: by `k`, then by canonical cycle.
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub n: usize,
    pub hyperplanes: Vec<CycleHyperplane>,
    index: HashMap<Vec<usize>, usize>,
}

pub fn generate(n: usize) -> Vec<CycleHyperplane> {
    let mut out = Vec::new();
    for k in 2..=n / 2 {
        for subset in (0..n).combinations(2 * k) {
            let first = subset[0];
            for rest in subset[1..].iter().copied().permutations(2 * k - 1) {
                // one orientation per reflection class
                if rest[0] > rest[2 * k - 2] {
                    continue;
                }
                let mut cycle = vec![first];
                cycle.extend(rest);
                out.push(CycleHyperplane::from_canonical_cycle(n, cycle));
            }
        }
    }
    out.sort_by(|x, y| x.k.cmp(&y.k).then_with(|| x.cycle.cmp(&y.cycle)));
    out
}

impl Arrangement {
    pub fn new(n: usize) -> Self {
        let hyperplanes = generate(n);
        let index = hyperplanes
            .iter()
            .enumerate()
            .map(|(i, h)| (h.cycle.clone(), i))
            .collect();
        Arrangement {
            n,
            hyperplanes,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn normals(&self) -> Vec<Vec<i64>> {
        self.hyperplanes.iter().map(|h| h.normal.clone()).collect()
    }

    pub fn sign_vector(&self, m: &Metric) -> SignVector {
        assert_eq!(m.n(), self.n);
        SignVector(self.hyperplanes.iter().map(|h| h.side(m)).collect())
    }

    /// Image of hyperplane `h` under `σ` and the orientation sign `ε`, so
    /// that `sv(σ·m)[σH] = ε · sv(m)[H]`.
    pub fn act(&self, sigma: &Perm, h: usize) -> (usize, i8) {
        let hyp = &self.hyperplanes[h];
        let image: Vec<usize> = hyp.cycle.iter().map(|&v| sigma.apply(v)).collect();
        let canon = canonical_cycle(&image);
        let target = self.index[&canon];
        let mapped_pos: Vec<(usize, usize)> = {
            let mut v: Vec<(usize, usize)> = hyp
                .positive_edges()
                .into_iter()
                .map(|(x, y)| sorted(sigma.apply(x), sigma.apply(y)))
                .collect();
            v.sort();
            v
        };
        let eps = if mapped_pos == self.hyperplanes[target].positive_edges() {
            1
        } else {
            -1
        };
        (target, eps)
    }

    /// The sign vector of `σ·m` computed from that of `m`.
    pub fn permute_sign_vector(&self, sv: &SignVector, sigma: &Perm) -> SignVector {
        let mut out = vec![0i8; self.len()];
        for h in 0..self.len() {
            let (t, eps) = self.act(sigma, h);
            out[t] = eps * sv.0[h];
        }
        SignVector(out)
    }

    /// Permutations fixing `sv` under the action on hyperplanes.
    pub fn stabilizer(&self, sv: &SignVector, exec: Execution) -> Result<Subgroup, ArrangementError> {
        if sv.0.len() != self.len() {
            return Err(ArrangementError::LengthMismatch {
                expected: self.len(),
                got: sv.0.len(),
            });
        }
        let all: Vec<Perm> = Perm::all(self.n).collect();
        let keep = par::map(&all, exec, |p| self.permute_sign_vector(sv, p) == *sv);
        let elements = all
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        Ok(Subgroup::from_elements(self.n, elements))
    }

    /// Hyperplanes of half-length `k` containing the flat `X_ρ`, the
    /// intersection of all hyperplanes through `m`.
    pub fn r_k(&self, m: &Metric, k: usize) -> usize {
        let sv = self.sign_vector(m);
        let through: Vec<Vec<i64>> = self
            .hyperplanes
            .iter()
            .zip(&sv.0)
            .filter(|(_, s)| **s == 0)
            .map(|(h, _)| h.normal.clone())
            .collect();
        let base = int_rank(&through);
        self.hyperplanes
            .iter()
            .filter(|h| h.k == k)
            .filter(|h| {
                let mut rows = through.clone();
                rows.push(h.normal.clone());
                int_rank(&rows) == base
            })
            .count()
    }
}

/// Signs in `{-1, 0, +1}` in canonical hyperplane order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(pub Vec<i8>);

impl SignVector {
    pub fn is_full_support(&self) -> bool {
        self.0.iter().all(|&s| s != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&s| s == 0)
    }

    /// FNV-1a hash of the printed form, for compact identifiers.
    pub fn hash_hex(&self) -> String {
        use std::hash::Hasher;
        let mut h = fnv::FnvHasher::default();
        h.write(self.to_string().as_bytes());
        format!("{:016x}", h.finish())
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(match s {
                1 => "+",
                -1 => "-",
                _ => "0",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({self})")
    }
}

impl Serialize for SignVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn sign_vector(m: &Metric) -> SignVector {
    Arrangement::new(m.n()).sign_vector(m)
}

pub fn same_open_cone(m1: &Metric, m2: &Metric) -> bool {
    assert_eq!(m1.n(), m2.n(), "metrics on different point counts");
    let arr = Arrangement::new(m1.n());
    arr.sign_vector(m1) == arr.sign_vector(m2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lineality {
    pub dimension: usize,
    /// The elementary splits lie in, and span, the common intersection.
    pub spanned_by_elementary_splits: bool,
}

pub fn lineality(n: usize) -> Lineality {
    let arr = Arrangement::new(n);
    let normals = arr.normals();
    let dimension = pair_count(n) - int_rank(&normals);
    let splits: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let s = Split::elementary(n, i);
            crate::metrics::pairs(n)
                .into_iter()
                .map(|(x, y)| i64::from(s.separates(x, y)))
                .collect()
        })
        .collect();
    let inside = splits
        .iter()
        .all(|v| normals.iter().all(|h| h.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() == 0));
    Lineality {
        dimension,
        spanned_by_elementary_splits: inside && int_rank(&splits) == dimension,
    }
}

/// A flat of the arrangement: the set of hyperplanes containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flat {
    /// Bit `i` set iff hyperplane `i` contains the flat.
    pub hyperplanes: u64,
    /// Codimension.
    pub rank: usize,
    pub mobius: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionPoset {
    pub ambient_dim: usize,
    /// Sorted by rank, then by hyperplane mask.
    pub flats: Vec<Flat>,
}

impl IntersectionPoset {
    /// Coefficients of `χ(t)` from `t^ambient_dim` down to `t^0`.
    pub fn characteristic_polynomial(&self) -> Vec<i64> {
        let mut c = vec![0i64; self.ambient_dim + 1];
        for f in &self.flats {
            c[f.rank] += f.mobius;
        }
        c
    }

    /// Chambers by Zaslavsky: `(-1)^d χ(-1)`.
    pub fn chamber_count(&self) -> u64 {
        let chi: i64 = self
            .characteristic_polynomial()
            .iter()
            .enumerate()
            .map(|(r, &c)| {
                let deg = self.ambient_dim - r;
                if deg % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum();
        let signed = if self.ambient_dim % 2 == 0 { chi } else { -chi };
        u64::try_from(signed).expect("chamber count is positive")
    }

    /// Chambers of the restriction to the flat `base` (a mask present in
    /// the poset): `Σ_{X ≥ base} |μ(base, X)|`.
    pub fn restricted_chamber_count(&self, base: u64) -> u64 {
        // Sorted by rank, so everything below X in the interval precedes it.
        let above: Vec<u64> = self
            .flats
            .iter()
            .map(|f| f.hyperplanes)
            .filter(|x| base & !x == 0)
            .collect();
        let mut mu: Vec<i64> = Vec::with_capacity(above.len());
        for (k, &x) in above.iter().enumerate() {
            let v = if x == base {
                1
            } else {
                -(0..k)
                    .filter(|&j| above[j] & !x == 0 && above[j] != x)
                    .map(|j| mu[j])
                    .sum::<i64>()
            };
            mu.push(v);
        }
        mu.iter().map(|v| v.unsigned_abs()).sum()
    }

    /// Unordered pairs of chambers sharing a facet. Each hyperplane
    /// contributes one pair per chamber of its restriction.
    pub fn adjacent_chamber_pairs(&self) -> u64 {
        self.flats
            .iter()
            .filter(|f| f.rank == 1)
            .map(|f| self.restricted_chamber_count(f.hyperplanes))
            .sum()
    }
}

pub const MAX_POSET_N: usize = 5;

/// Intersection poset and characteristic polynomial of `W_n`, `n <= 5`.
pub fn poset_and_charpoly(
    n: usize,
    exec: Execution,
) -> Result<(IntersectionPoset, Vec<i64>), ArrangementError> {
    if !(4..=MAX_POSET_N).contains(&n) {
        return Err(ArrangementError::TooLarge {
            n,
            min: 4,
            max: MAX_POSET_N,
        });
    }
    let normals = Arrangement::new(n).normals();
    let poset = intersection_poset(&normals, pair_count(n), exec);
    let chi = poset.characteristic_polynomial();
    Ok((poset, chi))
}

/// Flats of a central arrangement given by integer normals (at most 64).
pub fn intersection_poset(normals: &[Vec<i64>], ambient_dim: usize, exec: Execution) -> IntersectionPoset {
    assert!(normals.len() <= 64, "at most 64 hyperplanes");
    let rows_of = |mask: u64| -> Vec<Vec<i64>> {
        (0..normals.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| normals[i].clone())
            .collect()
    };
    let closure = |mask: u64, rank: usize| -> u64 {
        let rows = rows_of(mask);
        let mut out = mask;
        for (i, h) in normals.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            let mut r = rows.clone();
            r.push(h.clone());
            if int_rank(&r) == rank {
                out |= 1 << i;
            }
        }
        out
    };

    let mut levels: Vec<Vec<u64>> = vec![vec![0]];
    loop {
        let current = levels.last().expect("nonempty");
        let rank = levels.len() - 1;
        let candidates: Vec<(u64, usize)> = current
            .iter()
            .flat_map(|&m| (0..normals.len()).filter(move |i| m >> i & 1 == 0).map(move |i| (m, i)))
            .collect();
        let mut next: Vec<u64> = par::map(&candidates, exec, |&(m, i)| closure(m | 1 << i, rank + 1));
        next.sort_unstable();
        next.dedup();
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }

    let mut flats: Vec<Flat> = Vec::new();
    for (rank, level) in levels.iter().enumerate() {
        let below: Vec<(u64, i64)> = flats.iter().map(|f| (f.hyperplanes, f.mobius)).collect();
        let mobius: Vec<i64> = par::map(level, exec, |&mask| {
            if mask == 0 {
                1
            } else {
                -below
                    .iter()
                    .filter(|(g, _)| g & !mask == 0)
                    .map(|(_, mu)| mu)
                    .sum::<i64>()
            }
        });
        for (&mask, mu) in level.iter().zip(mobius) {
            flats.push(Flat {
                hyperplanes: mask,
                rank,
                mobius: mu,
            });
        }
    }
    IntersectionPoset { ambient_dim, flats }
}

/// Summary used by the command line.
#[derive(Clone, Debug, Serialize)]
pub struct ArrangementStats {
    pub n: usize,
    pub hyperplanes: usize,
    pub formula: u128,
    pub lineality_dim: usize,
}

pub const MAX_STATS_N: usize = 8;

pub fn stats(n: usize) -> Result<ArrangementStats, ArrangementError> {
    if !(4..=MAX_STATS_N).contains(&n) {
        return Err(ArrangementError::TooLarge {
            n,
            min: 4,
            max: MAX_STATS_N,
        });
    }
    let arr = Arrangement::new(n);
    Ok(ArrangementStats {
        n,
        hyperplanes: arr.len(),
        formula: hyperplane_count_formula(n),
        lineality_dim: pair_count(n) - int_rank(&arr.normals()),
    })
}

/// Size of the `S_n` orbit of a sign vector, `n! / |Stab|`.
pub fn orbit_size(n: usize, stab: &Subgroup) -> usize {
    let fact: usize = (1..=n).product();
    fact / stab.order()
}
