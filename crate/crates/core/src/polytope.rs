//! Exact convex hulls of small rational point sets, their face lattices and
//! f-vectors.
//!
//! Facets are found with the double description method on the cone over the
//! homogenized points `(1, x)`. Before that, the points are expressed in a
//! coordinate subset on which their affine hull projects injectively, so the
//! cone is full-dimensional and its dual is pointed. Faces are the nonempty
//! intersections of facet vertex sets; dimensions come from exact affine
//! rank.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{primitive_big, primitive_integer, Rat, RatMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("point set is degenerate: all points coincide")]
    Degenerate,
    #[error("point set is empty")]
    Empty,
    #[error("points have inconsistent dimensions")]
    DimensionMismatch,
    #[error("at most {max} points are supported, got {got}")]
    TooManyPoints { max: usize, got: usize },
}

/// Bitset over at most 128 point indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PointSet(u128);

impl PointSet {
    pub const MAX: usize = 128;

    pub fn empty() -> Self {
        PointSet(0)
    }

    pub fn from_indices(idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = PointSet(0);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < Self::MAX);
        self.0 |= 1 << i;
    }

    pub fn contains(&self, i: usize) -> bool {
        i < Self::MAX && self.0 >> i & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn intersect(&self, other: &PointSet) -> PointSet {
        PointSet(self.0 & other.0)
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet(self.0 | other.0)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..Self::MAX).filter(move |&i| bits >> i & 1 == 1)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// A finite point configuration; duplicates are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VPolytope {
    ambient_dim: usize,
    points: Vec<Vec<Rat>>,
}

impl VPolytope {
    pub fn new(points: Vec<Vec<Rat>>) -> Result<Self, PolytopeError> {
        let ambient_dim = points.first().ok_or(PolytopeError::Empty)?.len();
        if points.iter().any(|p| p.len() != ambient_dim) {
            return Err(PolytopeError::DimensionMismatch);
        }
        if points.len() > PointSet::MAX {
            return Err(PolytopeError::TooManyPoints {
                max: PointSet::MAX,
                got: points.len(),
            });
        }
        Ok(VPolytope {
            ambient_dim,
            points,
        })
    }

    pub fn from_ints(points: &[Vec<i64>]) -> Result<Self, PolytopeError> {
        VPolytope::new(
            points
                .iter()
                .map(|p| p.iter().map(|&v| Rat::from(v)).collect())
                .collect(),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn points(&self) -> &[Vec<Rat>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A facet as the inequality `normal · x <= offset`, tight exactly on
/// `points`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
    /// Every input point on the facet, vertices or not.
    pub points: PointSet,
    /// The vertices of the hull on the facet.
    pub vertices: PointSet,
}

#[derive(Clone, Debug)]
pub struct Hull {
    pub dim: usize,
    pub facets: Vec<Facet>,
    /// Indices of the input points that are vertices (first copy of
    /// duplicated points only).
    pub vertices: PointSet,
    homogenized: Vec<Vec<BigInt>>,
}

impl Hull {
    /// Affine dimension of a subset of the input points (`-1` for empty).
    pub fn affine_dim(&self, set: &PointSet) -> isize {
        let rows: Vec<Vec<Rat>> = set
            .iter()
            .map(|i| self.homogenized[i].iter().cloned().map(Rat::from).collect())
            .collect();
        if rows.is_empty() {
            return -1;
        }
        RatMatrix::from_rows(&rows).rank() as isize - 1
    }

    /// The projected homogenized coordinates of point `i`, an integer vector
    /// with positive first entry; linear functionals on these are the affine
    /// functionals on the hull's affine span.
    pub fn homogenized(&self, i: usize) -> &[BigInt] {
        &self.homogenized[i]
    }

    /// Facets with their tight point sets, sorted for deterministic output.
    pub fn sorted_facet_sets(&self) -> Vec<PointSet> {
        let mut v: Vec<PointSet> = self.facets.iter().map(|f| f.points).collect();
        v.sort();
        v
    }
}

/// All facets of `conv(points)` together with the vertex set.
pub fn hull_facets(p: &VPolytope) -> Result<Hull, PolytopeError> {
    let homog: Vec<Vec<BigInt>> = p
        .points
        .iter()
        .map(|x| {
            let mut row = Vec::with_capacity(x.len() + 1);
            row.push(Rat::one());
            row.extend(x.iter().cloned());
            primitive_integer(&row)
        })
        .collect();
    let (pivots, rank) = pivot_columns(&homog);
    if rank <= 1 {
        return Err(PolytopeError::Degenerate);
    }
    let projected: Vec<Vec<BigInt>> = homog
        .iter()
        .map(|row| pivots.iter().map(|&c| row[c].clone()).collect())
        .collect();

    let rays = double_description(&projected, rank);

    let mut facets: Vec<Facet> = rays
        .into_iter()
        .map(|(y, tight)| {
            let mut full = vec![BigInt::zero(); p.ambient_dim + 1];
            for (&c, v) in pivots.iter().zip(&y) {
                full[c] = v.clone();
            }
            let offset = full[0].clone();
            let normal: Vec<BigInt> = full[1..].iter().map(|v| -v).collect();
            Facet {
                normal,
                offset,
                points: tight,
                vertices: PointSet::empty(),
            }
        })
        .collect();

    let vertices = find_vertices(&p.points, &facets);
    for f in &mut facets {
        f.vertices = f.points.intersect(&vertices);
    }
    facets.sort_by_key(|f| f.points);
    Ok(Hull {
        dim: rank - 1,
        facets,
        vertices,
        homogenized: projected,
    })
}

/// Greedy column basis of an integer matrix: returns pivot columns and rank.
fn pivot_columns(rows: &[Vec<BigInt>]) -> (Vec<usize>, usize) {
    let m = RatMatrix::from_rows(
        &rows
            .iter()
            .map(|r| r.iter().cloned().map(Rat::from).collect())
            .collect::<Vec<_>>(),
    );
    let pivots = m.clone().rref();
    let rank = pivots.len();
    (pivots, rank)
}

fn dot_big(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extreme rays of `{y : w_i · y >= 0}` for a full-rank row set, each with
/// the set of rows it is tight on.
fn double_description(rows: &[Vec<BigInt>], dim: usize) -> Vec<(Vec<BigInt>, PointSet)> {
    // Initial basis: greedily pick independent rows.
    let mut basis: Vec<usize> = Vec::with_capacity(dim);
    let mut basis_rows: Vec<Vec<Rat>> = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        let cand: Vec<Rat> = row.iter().cloned().map(Rat::from).collect();
        basis_rows.push(cand);
        if RatMatrix::from_rows(&basis_rows).rank() == basis_rows.len() {
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        } else {
            basis_rows.pop();
        }
    }
    assert_eq!(basis.len(), dim, "row set is not full rank");

    // Rays of the simplicial cone {y : W_B y >= 0} are the columns of W_B^{-1}.
    let mut aug = RatMatrix::zeros(dim, 2 * dim);
    for (r, row) in basis_rows.iter().enumerate() {
        for c in 0..dim {
            aug[(r, c)] = row[c].clone();
        }
        aug[(r, dim + r)] = Rat::one();
    }
    aug.rref();
    let mut rays: Vec<(Vec<BigInt>, PointSet)> = (0..dim)
        .map(|j| {
            let col: Vec<Rat> = (0..dim).map(|r| aug[(r, dim + j)].clone()).collect();
            let y = primitive_integer(&col);
            let tight = PointSet::from_indices(
                basis.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &b)| b),
            );
            (y, tight)
        })
        .collect();

    let in_basis: HashSet<usize> = basis.iter().copied().collect();
    for (i, row) in rows.iter().enumerate() {
        if in_basis.contains(&i) {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|(y, _)| dot_big(row, y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
        if neg.is_empty() {
            for (k, (_, tight)) in rays.iter_mut().enumerate() {
                if values[k].is_zero() {
                    tight.insert(i);
                }
            }
            continue;
        }
        let mut next: Vec<(Vec<BigInt>, PointSet)> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].1.intersect(&rays[q].1);
                if common.len() + 2 < dim {
                    continue;
                }
                let blocked = rays.iter().enumerate().any(|(t, (_, z))| {
                    t != p && t != q && common.is_subset(z)
                });
                if blocked {
                    continue;
                }
                let a = &values[p];
                let b = -&values[q];
                let y: Vec<BigInt> = rays[q]
                    .0
                    .iter()
                    .zip(&rays[p].0)
                    .map(|(yq, yp)| a * yq + &b * yp)
                    .collect();
                let mut tight = common;
                tight.insert(i);
                next.push((primitive_big(y), tight));
            }
        }
        for (k, (y, mut tight)) in rays.into_iter().enumerate() {
            if values[k].is_negative() {
                continue;
            }
            if values[k].is_zero() {
                tight.insert(i);
            }
            next.push((y, tight));
        }
        rays = next;
    }
    rays
}

fn find_vertices(points: &[Vec<Rat>], facets: &[Facet]) -> PointSet {
    let all = PointSet::from_indices(0..points.len());
    let mut first_copy: HashMap<&[Rat], usize> = HashMap::new();
    let mut vertices = PointSet::empty();
    for (i, x) in points.iter().enumerate() {
        let rep = *first_copy.entry(x.as_slice()).or_insert(i);
        if rep != i {
            continue;
        }
        let face = facets
            .iter()
            .filter(|f| f.points.contains(i))
            .fold(all, |acc, f| acc.intersect(&f.points));
        if face.iter().all(|j| points[j] == *x) {
            vertices.insert(i);
        }
    }
    vertices
}

/// All proper nonempty faces of a polytope, grouped by dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceLattice {
    pub dim: usize,
    pub vertex_count: usize,
    /// Vertex sets of the facets, indexed by input point.
    pub facets: Vec<PointSet>,
    /// `faces_by_dim[k]` lists the k-dimensional faces, `k < dim`.
    pub faces_by_dim: Vec<Vec<PointSet>>,
}

/// Closes the facet vertex sets under intersection.
pub fn face_lattice(hull: &Hull) -> FaceLattice {
    let facets: Vec<PointSet> = {
        let mut f: Vec<PointSet> = hull.facets.iter().map(|f| f.vertices).collect();
        f.sort();
        f.dedup();
        f
    };
    let mut seen: HashSet<PointSet> = facets.iter().copied().collect();
    let mut queue: Vec<PointSet> = facets.clone();
    while let Some(face) = queue.pop() {
        for f in &facets {
            let g = face.intersect(f);
            if !g.is_empty() && seen.insert(g) {
                queue.push(g);
            }
        }
    }
    let mut faces_by_dim: Vec<Vec<PointSet>> = vec![Vec::new(); hull.dim];
    for face in seen {
        let d = hull.affine_dim(&face);
        assert!(d >= 0 && (d as usize) < hull.dim, "face dimension out of range");
        faces_by_dim[d as usize].push(face);
    }
    for v in &mut faces_by_dim {
        v.sort();
    }
    FaceLattice {
        dim: hull.dim,
        vertex_count: hull.vertices.len(),
        facets,
        faces_by_dim,
    }
}

impl FaceLattice {
    pub fn f_vector(&self) -> Vec<usize> {
        self.faces_by_dim.iter().map(Vec::len).collect()
    }

    /// Every facet has exactly `dim` vertices.
    pub fn is_simplicial(&self) -> bool {
        self.facets.iter().all(|f| f.len() == self.dim)
    }

    /// `Σ (-1)^i f_i == 1 - (-1)^dim`.
    pub fn satisfies_euler(&self) -> bool {
        let alt: i64 = self
            .f_vector()
            .iter()
            .enumerate()
            .map(|(i, &f)| if i % 2 == 0 { f as i64 } else { -(f as i64) })
            .sum();
        let expected = if self.dim % 2 == 0 { 0 } else { 2 };
        alt == expected
    }
}

pub fn f_vector(l: &FaceLattice) -> Vec<usize> {
    l.f_vector()
}

pub fn is_simplicial(l: &FaceLattice) -> bool {
    l.is_simplicial()
}

/// f-vector of a free sum from the f-vectors of its summands: proper faces
/// of `P ⊕ Q` are joins of a proper face of `P` and one of `Q`, either of
/// which may be empty.
pub fn free_sum_f_vector(f1: &[usize], f2: &[usize]) -> Vec<usize> {
    let with_empty = |f: &[usize]| {
        let mut v = vec![1usize];
        v.extend_from_slice(f);
        v
    };
    let (a, b) = (with_empty(f1), with_empty(f2));
    let dim = f1.len() + f2.len();
    (0..dim)
        .map(|k| {
            // join of an i-face and a j-face has dimension i + j + 1
            (0..a.len())
                .filter_map(|ia| {
                    let jb = (k + 1).checked_sub(ia)?;
                    b.get(jb).map(|&fb| a[ia] * fb)
                })
                .sum()
        })
        .collect()
}

pub fn free_sum_f_check(l1: &FaceLattice, l2: &FaceLattice, l12: &FaceLattice) -> bool {
    l12.dim == l1.dim + l2.dim
        && l12.f_vector() == free_sum_f_vector(&l1.f_vector(), &l2.f_vector())
}

/// JSON view of a hull.
#[derive(Clone, Debug, Serialize)]
pub struct PolytopeReport {
    pub dim: usize,
    pub f_vector: Vec<usize>,
    pub facets: Vec<Vec<usize>>,
    pub vertices: Vec<Vec<Rat>>,
}

impl PolytopeReport {
    pub fn new(p: &VPolytope, hull: &Hull, lattice: &FaceLattice) -> Self {
        PolytopeReport {
            dim: hull.dim,
            f_vector: lattice.f_vector(),
            facets: lattice.facets.iter().map(PointSet::to_vec).collect(),
            vertices: hull.vertices.iter().map(|i| p.points()[i].clone()).collect(),
        }
    }
}
