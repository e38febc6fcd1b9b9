//! Exact rational scalars and small dense matrices.
//!
//! Everything downstream (distances, polytope coordinates, hyperplane
//! normals) is built on [`Rat`]. Linear algebra is plain Gaussian
//! elimination over the rationals; integer matrices with small entries get a
//! fraction-free path that stays in `i128` until it would overflow.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num.into(), den))
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        match self.0.numer().sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat::from_int(v)
    }
}

impl From<i32> for Rat {
    fn from(v: i32) -> Self {
        Rat::from_int(v)
    }
}

impl From<u64> for Rat {
    fn from(v: u64) -> Self {
        Rat::from_int(v)
    }
}

impl From<BigInt> for Rat {
    fn from(v: BigInt) -> Self {
        Rat::from_int(v)
    }
}

impl From<BigRational> for Rat {
    fn from(v: BigRational) -> Self {
        Rat(v)
    }
}

/// Integers print bare, everything else as `p/q`.
impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let bad = || ParseRatError::Invalid(s.to_string());
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(ParseRatError::ZeroDenominator(s.to_string()));
                }
                Ok(Rat::new(p, q))
            }
            None => {
                if let Ok(v) = s.parse::<BigInt>() {
                    return Ok(Rat::from_int(v));
                }
                parse_decimal(s).ok_or_else(bad)
            }
        }
    }
}

/// Finite decimal literals such as `12.5` are exact rationals.
fn parse_decimal(s: &str) -> Option<Rat> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32 + 1);
    let r = Rat::new(digits, den);
    Some(if neg { -r } else { r })
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(Rat::from(v)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RatMatrix {
            rows: rows.len(),
            cols,
            entries: rows.iter().flatten().cloned().collect(),
        }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let rows: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Rat::from(v)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let factor = self[(i, c)].clone();
                for j in c..self.cols {
                    let v = &self[(r, j)] * &factor;
                    self[(i, j)] -= &v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{x : A x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rat::zero(); self.cols];
                v[f] = Rat::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&m[(row, f)];
                }
                v
            })
            .collect()
    }

    /// Some solution of `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.entries[i * self.cols + j]
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn int_rank(rows: &[Vec<i64>]) -> usize {
    let Some(cols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c];
        for i in rank + 1..m.len() {
            let lead = m[i][c];
            for j in c..cols {
                let num = pivot
                    .checked_mul(m[i][j])
                    .and_then(|a| lead.checked_mul(m[rank][j]).and_then(|b| a.checked_sub(b)));
                match num {
                    Some(v) => m[i][j] = v / prev,
                    None => return int_rank_big(rows),
                }
            }
        }
        prev = pivot;
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn int_rank_big(rows: &[Vec<i64>]) -> usize {
    let rows: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| Rat::from(v)).collect())
        .collect();
    RatMatrix::from_rows(&rows).rank()
}

/// Scales a rational vector to the primitive integer vector on the same ray
/// (positive multiple, entries with gcd 1).
pub fn primitive_integer(v: &[Rat]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    primitive_big(ints)
}

/// Divides out the gcd of the entries; the zero vector is returned unchanged.
pub fn primitive_big(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in &mut v {
            *x /= &g;
        }
    }
    v
}

/// Hyperplane `normal · x = offset` through `points` in `R^d`.
///
/// Returns `None` unless the affine span of the points has dimension exactly
/// `d - 1`. The normal is a primitive integer vector whose first nonzero
/// entry is positive, so the output does not depend on the order of the
/// points.
pub fn affine_normal(points: &[Vec<Rat>], d: usize) -> Option<(Vec<BigInt>, BigInt)> {
    if points.is_empty() || points.iter().any(|p| p.len() != d) {
        return None;
    }
    // Solve [p 1] · (normal, -offset) = 0.
    let rows: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| {
            let mut r = p.clone();
            r.push(Rat::one());
            r
        })
        .collect();
    let m = RatMatrix::from_rows(&rows);
    if m.rank() != d {
        return None;
    }
    let null = m.nullspace();
    debug_assert_eq!(null.len(), 1);
    let mut v = primitive_integer(&null[0]);
    let first = v[..d].iter().find(|x| !x.is_zero())?;
    if first.is_negative() {
        for x in &mut v {
            *x = -&*x;
        }
    }
    let offset = -v.pop().expect("nonempty");
    Some((v, offset))
}

/// Value of an integer linear form on a rational vector.
pub fn int_dot(form: &[BigInt], x: &[Rat]) -> Rat {
    form.iter()
        .zip(x)
        .map(|(a, b)| Rat::from(a.clone()) * b)
        .sum()
}

pub fn big_sign(v: &BigInt) -> Ordering {
    v.sign().cmp(&num_bigint::Sign::NoSign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(v: i64) -> Rat {
        Rat::from(v)
    }

    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn lowest_terms_and_display() {
        let x = Rat::new(6, -4);
        assert_eq!(x.to_string(), "-3/2");
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(Rat::new(8, 4).to_string(), "2");
        assert_eq!("10/4".parse::<Rat>().unwrap(), Rat::new(5, 2));
        assert_eq!("2.25".parse::<Rat>().unwrap(), Rat::new(9, 4));
        assert_eq!("-0.5".parse::<Rat>().unwrap(), Rat::new(-1, 2));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
    }

    #[test]
    fn serde_accepts_ints_and_strings() {
        let v: Vec<Rat> = serde_json::from_str(r#"[3, "7/2", "-1"]"#).unwrap();
        assert_eq!(v, vec![r(3), Rat::new(7, 2), r(-1)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["3","7/2","-1"]"#);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(RatMatrix::identity(2).rank(), 2);
        assert_eq!(RatMatrix::zeros(3, 3).rank(), 0);
        // Elementary splits on 5 points in pair order (1,2),(1,3),...,(4,5).
        let pairs: Vec<(usize, usize)> = (0..5)
            .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
            .collect();
        let splits: Vec<Vec<i64>> = (0..5)
            .map(|s| {
                pairs
                    .iter()
                    .map(|&(i, j)| i64::from(i == s || j == s))
                    .collect()
            })
            .collect();
        assert_eq!(RatMatrix::from_int_rows(&splits).rank(), 5);
        assert_eq!(int_rank(&splits), 5);
    }

    #[test]
    fn affine_normal_examples() {
        let (n, o) = affine_normal(&[rv(&[0, 0]), rv(&[1, 0])], 2).unwrap();
        assert_eq!(n, vec![BigInt::from(0), BigInt::from(1)]);
        assert_eq!(o, BigInt::from(0));

        let (n, o) = affine_normal(&[rv(&[1, 0, 0]), rv(&[0, 1, 0]), rv(&[0, 0, 1])], 3).unwrap();
        assert_eq!(n, vec![BigInt::from(1); 3]);
        assert_eq!(o, BigInt::from(1));

        // Collinear points in R^3 do not span a plane.
        assert!(affine_normal(&[rv(&[0, 0, 0]), rv(&[1, 1, 1]), rv(&[2, 2, 2])], 3).is_none());
    }

    #[test]
    fn affine_normal_on_root_polytope_facet() {
        // A3 root polytope in the coordinates (x1, x2, x3) of the sum-zero
        // hyperplane; x4 is implied.
        let roots: Vec<Vec<Rat>> = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| {
                let mut v = vec![r(0); 4];
                v[i] = r(1);
                v[j] = r(-1);
                v.truncate(3);
                v
            })
            .collect();
        // Triangle {e1-e2, e1-e3, e1-e4}.
        let facet = vec![rv(&[1, -1, 0]), rv(&[1, 0, -1]), rv(&[1, 0, 0])];
        let (n, o) = affine_normal(&facet, 3).unwrap();
        assert_eq!(n, vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)]);
        assert_eq!(o, BigInt::from(1));
        // Brute force: it supports the whole point set.
        let on = roots.iter().filter(|p| int_dot(&n, p) == Rat::from_int(o.clone())).count();
        assert!(roots.iter().all(|p| int_dot(&n, p) <= Rat::from_int(o.clone())));
        assert_eq!(on, 3);
    }

    #[test]
    fn solve_and_nullspace() {
        let a = RatMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert!(a.solve(&[r(1), r(3)]).is_none());
        let x = a.solve(&[r(1), r(2)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![r(1), r(2)]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(Rat::is_zero));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..4, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(rows in small_matrix()) {
            let m = RatMatrix::from_int_rows(&rows);
            prop_assert_eq!(m.rank(), m.transpose().rank());
            prop_assert_eq!(m.rank(), int_rank(&rows));
        }

        #[test]
        fn solvable_iff_augmented_rank_matches(rows in small_matrix(), seed in proptest::collection::vec(-3i64..4, 5)) {
            let m = RatMatrix::from_int_rows(&rows);
            let b: Vec<Rat> = seed.iter().take(m.rows()).map(|&v| r(v)).chain(std::iter::repeat(Rat::zero())).take(m.rows()).collect();
            let mut aug_rows = rows.clone();
            for (row, v) in aug_rows.iter_mut().zip(&b) {
                row.push(v.numer().try_into().unwrap());
            }
            let consistent = int_rank(&aug_rows) == m.rank();
            let sol = m.solve(&b);
            prop_assert_eq!(sol.is_some(), consistent);
            if let Some(x) = sol {
                prop_assert_eq!(m.mul_vec(&x), b);
            }
        }

        #[test]
        fn affine_normal_is_order_independent(pts in proptest::collection::vec(proptest::collection::vec(-4i64..5, 3), 3), rot in 0usize..3) {
            let pts: Vec<Vec<Rat>> = pts.iter().map(|p| rv(p)).collect();
            let mut rotated = pts.clone();
            rotated.rotate_left(rot);
            rotated.reverse();
            prop_assert_eq!(affine_normal(&pts, 3), affine_normal(&rotated, 3));
        }
    }
}
