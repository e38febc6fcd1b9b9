//! Regular subdivisions of point configurations and tight-span types.
//!
//! A metric's tight span is dual to the regular subdivision of the second
//! hypersimplex `Δ(2,n) = conv{e_i + e_j}` cut out by the upper hull of the
//! lift `(e_i + e_j, ρ_ij)`. Equivalently, the lower hull with heights
//! `-ρ_ij`, which is what [`hypersimplex_type`] computes. Two metrics have the
//! same tight-span type here iff their labeled subdivisions coincide.

use num_traits::Signed;
use serde::Serialize;

use crate::exactnum::Rat;
use crate::metrics::{pairs, Metric};
use crate::polytope::{hull_facets, PointSet, PolytopeError, VPolytope};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularSubdivision {
    pub config: Vec<Vec<Rat>>,
    pub heights: Vec<Rat>,
    /// Sorted; each cell lists every configuration point on it.
    pub maximal_cells: Vec<PointSet>,
}

impl RegularSubdivision {
    pub fn cell_count(&self) -> usize {
        self.maximal_cells.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.maximal_cells.len() == 1
    }
}

/// Maximal cells of the lower hull of `{(p_i, h_i)}`.
pub fn regular_subdivision(
    config: &[Vec<Rat>],
    heights: &[Rat],
) -> Result<RegularSubdivision, PolytopeError> {
    assert_eq!(config.len(), heights.len(), "one height per point");
    let base = VPolytope::new(config.to_vec())?;
    let base_dim = hull_facets(&base)?.dim;
    let lifted: Vec<Vec<Rat>> = config
        .iter()
        .zip(heights)
        .map(|(p, h)| {
            let mut q = p.clone();
            q.push(h.clone());
            q
        })
        .collect();
    let hull = hull_facets(&VPolytope::new(lifted)?)?;
    let d = base.ambient_dim();
    let mut maximal_cells: Vec<PointSet> = if hull.dim == base_dim {
        // Heights are affine on the configuration.
        vec![PointSet::from_indices(0..config.len())]
    } else {
        // The vertical direction lies in the lifted affine hull, so the sign
        // of the last normal coordinate is well defined.
        hull.facets
            .iter()
            .filter(|f| f.normal[d].is_negative())
            .map(|f| f.points)
            .collect()
    };
    maximal_cells.sort();
    Ok(RegularSubdivision {
        config: config.to_vec(),
        heights: heights.to_vec(),
        maximal_cells,
    })
}

/// The points `e_i + e_j` of `Δ(2,n)` in pair order.
pub fn hypersimplex_config(n: usize) -> Vec<Vec<Rat>> {
    pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let mut p = vec![Rat::zero(); n];
            p[i] = Rat::one();
            p[j] = Rat::one();
            p
        })
        .collect()
}

/// The subdivision of `Δ(2,n)` dual to the tight span of `m`.
pub fn hypersimplex_type(m: &Metric) -> RegularSubdivision {
    let heights: Vec<Rat> = m.values().iter().map(|v| -v).collect();
    regular_subdivision(&hypersimplex_config(m.n()), &heights)
        .expect("the second hypersimplex is at least a triangle for n >= 3")
}

pub fn same_tight_span_type(m1: &Metric, m2: &Metric) -> bool {
    assert_eq!(m1.n(), m2.n(), "metrics on different point counts");
    hypersimplex_type(m1).maximal_cells == hypersimplex_type(m2).maximal_cells
}
