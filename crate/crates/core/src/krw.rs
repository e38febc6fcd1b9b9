//! KRW polytopes `conv{(e_i − e_j)/ρ_ij}` and the admissible-graph oracle.
//!
//! Vertex labels are the ordered pairs `(i, j)`, `i ≠ j`, in lexicographic
//! order; label `k` is point `k` of the underlying configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::Arrangement;
use crate::exactnum::Rat;
use crate::metrics::{Metric, MetricClass};
use crate::par::{self, Execution};
use crate::polytope::{face_lattice, hull_facets, FaceLattice, Hull, PointSet, PolytopeError, VPolytope};
use crate::tightspan::regular_subdivision;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KrwError {
    #[error("metric has a zero distance")]
    ZeroDistance,
    #[error("metric is not strict")]
    NotStrict,
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// A directed graph on `[n]` without loops; edges are kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DirectedGraph {
    pub n: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl DirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        assert!(
            edges.iter().all(|&(i, j)| i != j && i < n && j < n),
            "edges must join distinct points of [n]"
        );
        DirectedGraph { n, edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Graphviz rendering with 1-based node names.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph {name} {{\n");
        for v in 1..=self.n {
            let _ = writeln!(s, "  {v};");
        }
        for &(i, j) in &self.edges {
            let _ = writeln!(s, "  {} -> {};", i + 1, j + 1);
        }
        s.push_str("}\n");
        s
    }
}

impl fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.edges.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).join(" ");
        write!(f, "{{{e}}}")
    }
}

/// Ordered pairs `(i, j)`, `i ≠ j`, in lexicographic order.
pub fn vertex_labels(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

pub fn label_index(n: usize, i: usize, j: usize) -> usize {
    assert!(i != j);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

#[derive(Clone, Debug)]
pub struct KrwPolytope {
    pub metric: Metric,
    pub vertex_labels: Vec<(usize, usize)>,
    pub polytope: VPolytope,
    pub hull: Hull,
    pub lattice: FaceLattice,
}

impl KrwPolytope {
    /// Facets as graphs on their vertex labels.
    pub fn facet_graphs(&self) -> BTreeSet<DirectedGraph> {
        self.lattice
            .facets
            .iter()
            .map(|f| self.graph_of(f))
            .collect()
    }

    pub fn graph_of(&self, set: &PointSet) -> DirectedGraph {
        DirectedGraph::new(self.metric.n(), set.iter().map(|k| self.vertex_labels[k]))
    }

    /// Facets with exactly four vertices; for `n = 4` these are the
    /// quadrilaterals.
    pub fn quadrilateral_facets(&self) -> usize {
        self.lattice.facets.iter().filter(|f| f.len() == 4).count()
    }

    /// `-P = P` on labeled points, and the antipodal map `(i,j) ↦ (j,i)`
    /// permutes the facets.
    pub fn is_centrally_symmetric(&self) -> bool {
        let n = self.metric.n();
        let flip = |s: &PointSet| {
            PointSet::from_indices(s.iter().map(|k| {
                let (i, j) = self.vertex_labels[k];
                label_index(n, j, i)
            }))
        };
        let points_ok = self.vertex_labels.iter().enumerate().all(|(k, &(i, j))| {
            let p = &self.polytope.points()[k];
            let q = &self.polytope.points()[label_index(n, j, i)];
            p.iter().zip(q).all(|(a, b)| *a == -b)
        });
        let facets: BTreeSet<PointSet> = self.lattice.facets.iter().copied().collect();
        points_ok && self.lattice.facets.iter().all(|f| facets.contains(&flip(f)))
    }
}

pub fn build_krw(m: &Metric) -> Result<KrwPolytope, KrwError> {
    if m.has_zero_distance() {
        return Err(KrwError::ZeroDistance);
    }
    let n = m.n();
    let labels = vertex_labels(n);
    let points: Vec<Vec<Rat>> = labels
        .iter()
        .map(|&(i, j)| {
            let inv = m.get(i, j).recip();
            let mut p = vec![Rat::zero(); n];
            p[i] = inv.clone();
            p[j] = -inv;
            p
        })
        .collect();
    let polytope = VPolytope::new(points)?;
    let hull = hull_facets(&polytope)?;
    let lattice = face_lattice(&hull);
    Ok(KrwPolytope {
        metric: m.clone(),
        vertex_labels: labels,
        polytope,
        hull,
        lattice,
    })
}

/// Gordon–Petrov test: for every sequence of edges with distinct sources and
/// distinct targets and every cyclic order, `Σ ρ(x_i,y_i) <= Σ ρ(x_i,y_{i+1})`.
pub fn is_admissible(m: &Metric, g: &DirectedGraph) -> bool {
    if m.is_strict() && has_two_path(g) {
        // Strict triangle inequalities rule out any directed 2-path.
        return false;
    }
    let edges: Vec<(usize, usize)> = g.edges.iter().copied().collect();
    (0..edges.len()).all(|first| cycles_hold(m, edges[first], &edges[first + 1..]))
}

/// Admissibility of `g ∪ {e}` given that `g` is admissible, for a strict
/// metric.
fn extension_is_admissible(m: &Metric, g: &[(usize, usize)], e: (usize, usize)) -> bool {
    if g.iter().any(|&(x, y)| y == e.0 || x == e.1) {
        return false;
    }
    cycles_hold(m, e, g)
}

fn has_two_path(g: &DirectedGraph) -> bool {
    let targets: BTreeSet<usize> = g.edges.iter().map(|e| e.1).collect();
    g.edges.iter().any(|e| targets.contains(&e.0))
}

/// Checks every cyclic edge sequence that starts with `first` and continues
/// with edges from `rest`.
fn cycles_hold(m: &Metric, first: (usize, usize), rest: &[(usize, usize)]) -> bool {
    let mut seq = vec![first];
    let mut used = vec![false; rest.len()];
    extend(m, &mut seq, rest, &mut used)
}

fn extend(m: &Metric, seq: &mut Vec<(usize, usize)>, rest: &[(usize, usize)], used: &mut [bool]) -> bool {
    if seq.len() >= 2 {
        let k = seq.len();
        let lhs: Rat = seq.iter().map(|&(x, y)| m.get(x, y)).sum();
        let rhs: Rat = (0..k).map(|i| m.get(seq[i].0, seq[(i + 1) % k].1)).sum();
        if lhs > rhs {
            return false;
        }
    }
    for t in 0..rest.len() {
        if used[t] {
            continue;
        }
        let (x, y) = rest[t];
        if seq.iter().any(|&(a, b)| a == x || b == y) {
            continue;
        }
        used[t] = true;
        seq.push((x, y));
        let ok = extend(m, seq, rest, used);
        seq.pop();
        used[t] = false;
        if !ok {
            return false;
        }
    }
    true
}

/// Maximal admissible graphs of a strict metric.
pub fn facet_graphs(m: &Metric) -> Result<BTreeSet<DirectedGraph>, KrwError> {
    facet_graphs_with(m, Execution::default())
}

pub fn facet_graphs_with(m: &Metric, exec: Execution) -> Result<BTreeSet<DirectedGraph>, KrwError> {
    if m.validate() != MetricClass::Strict {
        return Err(KrwError::NotStrict);
    }
    let labels = vertex_labels(m.n());
    // Every admissible graph is grown from its smallest edge; seeds run in
    // parallel and the merged set is order independent.
    let per_seed = par::map_range(labels.len(), exec, |seed| {
        let mut out = Vec::new();
        let mut current = vec![labels[seed]];
        grow(m, &labels, seed + 1, &mut current, &mut out);
        out
    });
    let all: Vec<Vec<(usize, usize)>> = per_seed.into_iter().flatten().collect();
    let mut maximal = BTreeSet::new();
    for g in all {
        let extendable = labels
            .iter()
            .any(|&e| !g.contains(&e) && extension_is_admissible(m, &g, e));
        if !extendable {
            maximal.insert(DirectedGraph::new(m.n(), g));
        }
    }
    Ok(maximal)
}

/// Depth-first enumeration of admissible supersets of `current` using
/// labels from index `from` on; admissibility is monotone, so pruning at the
/// first failure is exact.
fn grow(
    m: &Metric,
    labels: &[(usize, usize)],
    from: usize,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let mut extended = false;
    for t in from..labels.len() {
        let e = labels[t];
        if extension_is_admissible(m, current, e) {
            extended = true;
            current.push(e);
            grow(m, labels, t + 1, current, out);
            current.pop();
        }
    }
    if !extended {
        // Candidates for maximality; the caller filters against all labels.
        out.push(current.clone());
    }
}

/// Unique minimum of `Σ ρ(x_i, y_π(i))` over `π` for all disjoint `X, Y` of
/// equal size at least 2.
pub fn is_generic(m: &Metric) -> Result<bool, KrwError> {
    if m.validate() != MetricClass::Strict {
        return Err(KrwError::NotStrict);
    }
    let n = m.n();
    for k in 2..=n / 2 {
        for xs in (0..n).combinations(k) {
            let others: Vec<usize> = (0..n).filter(|v| !xs.contains(v)).collect();
            for ys in others.iter().copied().combinations(k) {
                let mut best: Option<Rat> = None;
                let mut count = 0;
                for pi in ys.iter().copied().permutations(k) {
                    let cost: Rat = xs.iter().zip(&pi).map(|(&x, &y)| m.get(x, y)).sum();
                    match &best {
                        Some(b) if cost > *b => {}
                        Some(b) if cost == *b => count += 1,
                        _ => {
                            best = Some(cost);
                            count = 1;
                        }
                    }
                }
                if count > 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `(n+m)! / (m! m! (n−m)!)` with `n = points − 1`.
pub fn generic_face_count(points: usize, m: usize) -> u128 {
    let n = points - 1;
    assert!(m <= n, "need 0 <= m <= n");
    let fact = |k: usize| -> u128 { (1..=k as u128).product() };
    fact(n + m) / (fact(m) * fact(m) * fact(n - m))
}

pub fn r_k(m: &Metric, k: usize) -> usize {
    Arrangement::new(m.n()).r_k(m, k)
}

/// `f_0 = l(l−1)` and `f_1 = C(l+1; 2,2,l−3) − 2 r_2` for a strict metric
/// on `l` points.
pub fn f01_strict(m: &Metric) -> Result<(u128, u128), KrwError> {
    if m.validate() != MetricClass::Strict {
        return Err(KrwError::NotStrict);
    }
    let l = m.n();
    let f0 = (l * (l - 1)) as u128;
    let f1 = generic_face_count(l, 2) - 2 * r_k(m, 2) as u128;
    Ok((f0, f1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootSubdivisionCheck {
    pub cells: usize,
    pub cells_match_facets: bool,
    pub centrally_symmetric: bool,
}

impl RootSubdivisionCheck {
    pub fn holds(&self) -> bool {
        self.cells_match_facets && self.centrally_symmetric
    }
}

/// Regular subdivision of `{e_i − e_j} ∪ {0}` with heights `ρ_ij` and `0`,
/// compared with the cones over the facets of the KRW polytope.
pub fn root_subdivision_check(m: &Metric) -> Result<RootSubdivisionCheck, KrwError> {
    let krw = build_krw(m)?;
    let n = m.n();
    let labels = &krw.vertex_labels;
    let origin = labels.len();
    let mut config: Vec<Vec<Rat>> = labels
        .iter()
        .map(|&(i, j)| {
            let mut p = vec![Rat::zero(); n];
            p[i] = Rat::one();
            p[j] = -Rat::one();
            p
        })
        .collect();
    config.push(vec![Rat::zero(); n]);
    let mut heights: Vec<Rat> = labels.iter().map(|&(i, j)| m.get(i, j)).collect();
    heights.push(Rat::zero());
    let sub = regular_subdivision(&config, &heights)?;

    let expected: BTreeSet<PointSet> = krw
        .hull
        .facets
        .iter()
        .map(|f| {
            let mut s = f.points;
            s.insert(origin);
            s
        })
        .collect();
    let cells: BTreeSet<PointSet> = sub.maximal_cells.iter().copied().collect();
    let flip = |s: &PointSet| {
        PointSet::from_indices(s.iter().map(|k| {
            if k == origin {
                origin
            } else {
                let (i, j) = labels[k];
                label_index(n, j, i)
            }
        }))
    };
    Ok(RootSubdivisionCheck {
        cells: cells.len(),
        cells_match_facets: cells == expected,
        centrally_symmetric: cells.iter().all(|c| cells.contains(&flip(c))),
    })
}
