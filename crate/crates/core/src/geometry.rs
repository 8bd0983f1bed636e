//! Exact polytope primitives on the probability simplex.
//!
//! A [`BeliefPolytope`] is kept in canonical vertex form: duplicates removed,
//! points inside the hull of the remaining vertices pruned, vertices sorted
//! lexicographically. Every decision below is an exact LP over those vertices;
//! nothing in this module touches floating point.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation, Sense};
use crate::rational::{dot, one, serde_rational, serde_rational_vec, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("hull of an empty list of polytopes")]
    EmptyList,
    #[error("point {point} is not a probability vector: {reason}")]
    NotProbability { point: Point, reason: String },
}

/// A vector in R^S: a belief when its coordinates are a distribution, a
/// contract or a linear functional otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(#[serde(with = "serde_rational_vec")] pub Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dot(&self, other: &[Rational]) -> Rational {
        dot(&self.0, other)
    }

    /// Unit vector e_s.
    pub fn vertex_of_simplex(dim: usize, s: usize) -> Self {
        let mut coords = vec![Rational::zero(); dim];
        coords[s] = one();
        Point(coords)
    }

    pub fn barycenter(dim: usize) -> Self {
        let w = Rational::new(1.into(), (dim as i64).into());
        Point(vec![w; dim])
    }

    /// Sup-norm distance.
    pub fn linf_distance(&self, other: &Point) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Checks nonnegativity and unit sum, reporting the first failure.
    pub fn check_probability(&self) -> Result<(), String> {
        if let Some((s, c)) = self.0.iter().enumerate().find(|(_, c)| c.is_negative()) {
            return Err(format!("negative coordinate {c} at state {s}"));
        }
        let sum: Rational = self.0.iter().sum();
        if sum != one() {
            return Err(format!("coordinates sum to {sum} ≠ 1"));
        }
        Ok(())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}

/// Convex hull of finitely many distributions over S.
#[derive(Debug, Clone, Serialize)]
pub struct BeliefPolytope {
    vertices: Vec<Point>,
    #[serde(skip)]
    affine_dim: OnceLock<usize>,
}

impl PartialEq for BeliefPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Eq for BeliefPolytope {}

impl<'de> Deserialize<'de> for BeliefPolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: Vec<Point>,
        }
        let raw = Raw::deserialize(d)?;
        BeliefPolytope::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

impl BeliefPolytope {
    /// Validates every point as a distribution and canonicalizes the hull.
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        let first = points.first().ok_or(GeometryError::EmptyPolytope)?;
        let dim = first.dim();
        for p in &points {
            check_dim(dim, p.dim())?;
            p.check_probability()
                .map_err(|reason| GeometryError::NotProbability {
                    point: p.clone(),
                    reason,
                })?;
        }
        Ok(Self::canonical(points))
    }

    pub fn singleton(point: Point) -> Result<Self, GeometryError> {
        Self::new(vec![point])
    }

    /// The whole simplex Δ(S).
    pub fn simplex(dim: usize) -> Self {
        BeliefPolytope {
            vertices: (0..dim)
                .rev()
                .map(|s| Point::vertex_of_simplex(dim, s))
                .collect(),
            affine_dim: OnceLock::from(dim.saturating_sub(1)),
        }
    }

    fn canonical(mut points: Vec<Point>) -> Self {
        points.sort();
        points.dedup();
        let extreme: Vec<Point> = if points.len() <= 2 {
            points
        } else {
            (0..points.len())
                .filter(|&i| {
                    let others: Vec<&Point> = points
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, p)| p)
                        .collect();
                    hull_weights(&others, &points[i]).is_none()
                })
                .map(|i| points[i].clone())
                .collect()
        };
        BeliefPolytope {
            vertices: extreme,
            affine_dim: OnceLock::new(),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Number of states |S|.
    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Dimension of the affine hull, computed once.
    pub fn affine_dim(&self) -> usize {
        *self.affine_dim.get_or_init(|| {
            let base = &self.vertices[0];
            let diffs: Vec<Vec<Rational>> = self.vertices[1..]
                .iter()
                .map(|v| v.0.iter().zip(&base.0).map(|(a, b)| a - b).collect())
                .collect();
            linalg::rank(&diffs, self.dim())
        })
    }

    /// Vertexwise containment `self ⊆ outer` (complete by convexity of `outer`).
    pub fn is_subset_of(&self, outer: &BeliefPolytope) -> Result<bool, GeometryError> {
        for v in &self.vertices {
            if !contains_point(outer, v)?.is_inside() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Weights λ on the vertices with Σλ = 1 reproducing a point exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexCombinationWitness {
    #[serde(with = "serde_rational_vec")]
    pub weights: Vec<Rational>,
}

impl ConvexCombinationWitness {
    /// Σ λ_i v_i.
    pub fn combine(&self, vertices: &[Point]) -> Point {
        let dim = vertices[0].dim();
        let mut acc = vec![Rational::zero(); dim];
        for (w, v) in self.weights.iter().zip(vertices) {
            if w.is_zero() {
                continue;
            }
            for (a, c) in acc.iter_mut().zip(&v.0) {
                *a += w * c;
            }
        }
        Point(acc)
    }

    pub fn is_valid_for(&self, vertices: &[Point], x: &Point) -> bool {
        self.weights.len() == vertices.len()
            && self.weights.iter().all(|w| !w.is_negative())
            && self.weights.iter().sum::<Rational>() == one()
            && self.combine(vertices) == *x
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Inside(ConvexCombinationWitness),
    Outside,
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

fn hull_weights(vertices: &[&Point], x: &Point) -> Option<Vec<Rational>> {
    if let Some(i) = vertices.iter().position(|v| *v == x) {
        let mut w = vec![Rational::zero(); vertices.len()];
        w[i] = one();
        return Some(w);
    }
    let k = vertices.len();
    let mut lp = LinearProgram::new(k);
    lp.constrain(vec![one(); k], Relation::Eq, one());
    for s in 0..x.dim() {
        let row = vertices.iter().map(|v| v.0[s].clone()).collect();
        lp.constrain(row, Relation::Eq, x.0[s].clone());
    }
    lp.solve().optimal().map(|sol| sol.x)
}

/// Membership of `x` in the hull of an arbitrary (non-canonical) point list.
pub fn hull_membership(points: &[Point], x: &Point) -> Result<Membership, GeometryError> {
    let Some(first) = points.first() else {
        return Ok(Membership::Outside);
    };
    check_dim(first.dim(), x.dim())?;
    let refs: Vec<&Point> = points.iter().collect();
    Ok(match hull_weights(&refs, x) {
        Some(weights) => Membership::Inside(ConvexCombinationWitness { weights }),
        None => Membership::Outside,
    })
}

/// Decides `x ∈ P`, returning the convex weights when inside.
pub fn contains_point(p: &BeliefPolytope, x: &Point) -> Result<Membership, GeometryError> {
    check_dim(p.dim(), x.dim())?;
    let refs: Vec<&Point> = p.vertices.iter().collect();
    Ok(match hull_weights(&refs, x) {
        Some(weights) => {
            let witness = ConvexCombinationWitness { weights };
            debug_assert!(witness.is_valid_for(&p.vertices, x));
            Membership::Inside(witness)
        }
        None => Membership::Outside,
    })
}

/// Exact minimum and maximum of a linear functional over a polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extremes {
    pub min: Rational,
    pub argmin: Point,
    pub max: Rational,
    pub argmax: Point,
}

/// Extremes of `π · z` over `P`, attained at vertices; ties go to the first
/// vertex in canonical order.
pub fn linear_extremes(p: &BeliefPolytope, z: &[Rational]) -> Result<Extremes, GeometryError> {
    check_dim(p.dim(), z.len())?;
    let mut values = p.vertices.iter().map(|v| (v.dot(z), v));
    let (first, v0) = values.next().expect("canonical polytope is nonempty");
    let mut ex = Extremes {
        min: first.clone(),
        argmin: v0.clone(),
        max: first,
        argmax: v0.clone(),
    };
    for (val, v) in values {
        if val < ex.min {
            ex.min = val.clone();
            ex.argmin = v.clone();
        }
        if val > ex.max {
            ex.max = val;
            ex.argmax = v.clone();
        }
    }
    Ok(ex)
}

/// Canonical vertex form of co(∪ Ps).
pub fn hull_of_union<'a, I>(polytopes: I) -> Result<BeliefPolytope, GeometryError>
where
    I: IntoIterator<Item = &'a BeliefPolytope>,
{
    let mut points = Vec::new();
    let mut dim = None;
    for p in polytopes {
        match dim {
            None => dim = Some(p.dim()),
            Some(d) => check_dim(d, p.dim())?,
        }
        points.extend(p.vertices.iter().cloned());
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyList);
    }
    Ok(BeliefPolytope::canonical(points))
}

/// Same hull as [`hull_of_union`] but the vertex list is only sorted and
/// deduplicated, not pruned to extreme points. Enough for LPs over the hull.
pub(crate) fn union_generators<'a, I>(polytopes: I) -> BeliefPolytope
where
    I: IntoIterator<Item = &'a BeliefPolytope>,
{
    let mut points: Vec<Point> = polytopes.into_iter().flat_map(|p| p.vertices.iter().cloned()).collect();
    points.sort();
    points.dedup();
    BeliefPolytope {
        vertices: points,
        affine_dim: OnceLock::new(),
    }
}

/// Hyperplane certificate that `P` and `Q` are disjoint.
///
/// `direction · π ≤ 0` on `P` with equality at `touching_vertex`, and
/// `direction · q ≥ margin > 0` on `Q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    #[serde(with = "serde_rational_vec")]
    pub direction: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub margin: Rational,
    pub touching_vertex: Point,
}

impl SeparationCertificate {
    /// Re-checks the vertex inequalities against both polytopes.
    pub fn verify(&self, p: &BeliefPolytope, q: &BeliefPolytope) -> bool {
        if !self.margin.is_positive() || self.direction.len() != p.dim() {
            return false;
        }
        let on_p: Vec<Rational> = p.vertices.iter().map(|v| v.dot(&self.direction)).collect();
        on_p.iter().all(|x| !x.is_positive())
            && on_p.iter().any(Zero::is_zero)
            && self.touching_vertex.dot(&self.direction).is_zero()
            && p.vertices.contains(&self.touching_vertex)
            && q.vertices
                .iter()
                .all(|w| w.dot(&self.direction) >= self.margin)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    Separated(SeparationCertificate),
    /// A point lying in both sets.
    NotSeparable { witness: Point },
}

/// Shifts `z` by a constant so its maximum over `P` is exactly zero. Since
/// beliefs sum to one, the shift moves every value by the same constant.
pub(crate) fn shift_max_to_zero(z: &[Rational], p: &BeliefPolytope) -> (Vec<Rational>, Point) {
    let ex = linear_extremes(p, z).expect("dimension checked by caller");
    let shifted = z.iter().map(|c| c - &ex.max).collect();
    (shifted, ex.argmax)
}

/// Separates `P` from `Q` by an LP, or returns a point common to both.
///
/// Among directions in `[-1, 1]^S` with the largest gap the one with least
/// ℓ1 norm is chosen, which makes the certificate deterministic.
pub fn separate_from_hull(p: &BeliefPolytope, q: &BeliefPolytope) -> Result<Separation, GeometryError> {
    let s = p.dim();
    check_dim(s, q.dim())?;

    if let Some(witness) = intersection_point(p, q, None) {
        return Ok(Separation::NotSeparable { witness });
    }

    // With y = z + 1 in [0, 2]^S and g = 1 + gap, every constraint has the
    // origin as a feasible point: v.y <= 1 on P, g <= w.y on Q.
    // Variables: y_0..y_{S-1}, g, then u_0..u_{S-1} >= |y_j - 1| for the tie-break.
    let gap = s;
    let build = |with_abs: bool| {
        let n = if with_abs { 2 * s + 1 } else { s + 1 };
        let mut lp = LinearProgram::new(n);
        for v in &p.vertices {
            let terms: Vec<_> = (0..s).map(|j| (j, v.0[j].clone())).collect();
            lp.constrain_sparse(&terms, Relation::Le, one());
        }
        for w in &q.vertices {
            let mut terms: Vec<_> = (0..s).map(|j| (j, -w.0[j].clone())).collect();
            terms.push((gap, one()));
            lp.constrain_sparse(&terms, Relation::Le, Rational::zero());
        }
        for j in 0..s {
            lp.constrain_sparse(&[(j, one())], Relation::Le, Rational::from_integer(2.into()));
        }
        lp
    };

    let mut lp = build(false);
    let mut obj = vec![Rational::zero(); s + 1];
    obj[gap] = one();
    lp.set_objective(Sense::Maximize, obj);
    let best = lp
        .solve()
        .optimal()
        .expect("separation LP is feasible and bounded")
        .value;
    debug_assert!(best > one(), "disjoint polytopes have a positive gap");

    let mut lp = build(true);
    lp.constrain_sparse(&[(gap, one())], Relation::Ge, best);
    for j in 0..s {
        let u = s + 1 + j;
        lp.constrain_sparse(&[(u, one()), (j, -one())], Relation::Ge, -one());
        lp.constrain_sparse(&[(u, one()), (j, one())], Relation::Ge, one());
    }
    let mut obj = vec![Rational::zero(); 2 * s + 1];
    for c in obj.iter_mut().skip(s + 1) {
        *c = one();
    }
    lp.set_objective(Sense::Minimize, obj);
    let sol = lp.solve().optimal().expect("tie-break LP is feasible");
    let z: Vec<Rational> = sol.x[..s].iter().map(|y| y - one()).collect();
    let (direction, touching_vertex) = shift_max_to_zero(&z, p);
    let margin = linear_extremes(q, &direction)?.min;
    let cert = SeparationCertificate {
        direction,
        margin,
        touching_vertex,
    };
    debug_assert!(cert.verify(p, q));
    Ok(Separation::Separated(cert))
}

/// Some point of `P ∩ Q`, or `None` when the polytopes are disjoint.
pub fn common_point(p: &BeliefPolytope, q: &BeliefPolytope) -> Result<Option<Point>, GeometryError> {
    check_dim(p.dim(), q.dim())?;
    Ok(intersection_point(p, q, None))
}

/// A point of `P ∩ Q`, maximizing `objective` over the intersection when given.
fn intersection_point(
    p: &BeliefPolytope,
    q: &BeliefPolytope,
    objective: Option<(&[Rational], Sense)>,
) -> Option<Point> {
    let (k, m, s) = (p.vertices.len(), q.vertices.len(), p.dim());
    let mut lp = LinearProgram::new(k + m);
    let sum_lambda: Vec<_> = (0..k).map(|i| (i, one())).collect();
    let sum_mu: Vec<_> = (0..m).map(|j| (k + j, one())).collect();
    lp.constrain_sparse(&sum_lambda, Relation::Eq, one());
    lp.constrain_sparse(&sum_mu, Relation::Eq, one());
    for c in 0..s {
        let mut terms: Vec<_> = p
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.0[c].clone()))
            .collect();
        terms.extend(
            q.vertices
                .iter()
                .enumerate()
                .map(|(j, w)| (k + j, -w.0[c].clone())),
        );
        lp.constrain_sparse(&terms, Relation::Eq, Rational::zero());
    }
    if let Some((f, sense)) = objective {
        let obj = p
            .vertices
            .iter()
            .map(|v| v.dot(f))
            .chain(std::iter::repeat(Rational::zero()).take(m))
            .collect();
        lp.set_objective(sense, obj);
    }
    let sol = lp.solve().optimal()?;
    let witness = ConvexCombinationWitness {
        weights: sol.x[..k].to_vec(),
    };
    Some(witness.combine(&p.vertices))
}

/// Affine dimension of `P ∩ Q` (−1 when empty) with affinely independent
/// points spanning it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionDimension {
    pub dim: i64,
    pub spanning_points: Vec<Point>,
}

impl IntersectionDimension {
    /// Full dimension in R^S: the intersection spans the simplex hyperplane.
    pub fn is_full(&self, states: usize) -> bool {
        self.dim == states as i64 - 1
    }
}

/// Grows an affinely independent set inside `P ∩ Q` until every functional
/// orthogonal to its span is constant on the intersection.
pub fn intersection_dimension(
    p: &BeliefPolytope,
    q: &BeliefPolytope,
) -> Result<IntersectionDimension, GeometryError> {
    let s = p.dim();
    check_dim(s, q.dim())?;
    let Some(base) = intersection_point(p, q, None) else {
        return Ok(IntersectionDimension {
            dim: -1,
            spanning_points: Vec::new(),
        });
    };
    let mut points = vec![base.clone()];
    let mut directions: Vec<Vec<Rational>> = Vec::new();
    'grow: loop {
        for f in linalg::null_space(&directions, s) {
            // Constant functionals never separate points of the simplex.
            if f.iter().all(|c| *c == f[0]) {
                continue;
            }
            let hi = intersection_point(p, q, Some((&f, Sense::Maximize)))
                .expect("intersection is nonempty");
            let lo = intersection_point(p, q, Some((&f, Sense::Minimize)))
                .expect("intersection is nonempty");
            let (hv, lv) = (hi.dot(&f), lo.dot(&f));
            if hv > lv {
                let base_val = base.dot(&f);
                let fresh = if hv != base_val { hi } else { lo };
                directions.push(fresh.0.iter().zip(&base.0).map(|(a, b)| a - b).collect());
                points.push(fresh);
                continue 'grow;
            }
        }
        break;
    }
    Ok(IntersectionDimension {
        dim: directions.len() as i64,
        spanning_points: points,
    })
}

/// ℓ∞ distance from `x` to the nearest point of `P`.
pub fn point_polytope_distance(x: &Point, p: &BeliefPolytope) -> Result<Rational, GeometryError> {
    let s = p.dim();
    check_dim(s, x.dim())?;
    if p.vertices.contains(x) {
        return Ok(Rational::zero());
    }
    let k = p.vertices.len();
    let r = k;
    let mut lp = LinearProgram::new(k + 1);
    let sum: Vec<_> = (0..k).map(|i| (i, one())).collect();
    lp.constrain_sparse(&sum, Relation::Eq, one());
    for c in 0..s {
        let mut terms: Vec<_> = p
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.0[c].clone()))
            .collect();
        terms.push((r, one()));
        lp.constrain_sparse(&terms, Relation::Ge, x.0[c].clone());
        terms.pop();
        terms.push((r, -one()));
        lp.constrain_sparse(&terms, Relation::Le, x.0[c].clone());
    }
    let mut obj = vec![Rational::zero(); k + 1];
    obj[r] = one();
    lp.set_objective(Sense::Minimize, obj);
    match lp.solve() {
        LpOutcome::Optimal(sol) => Ok(sol.value),
        other => unreachable!("distance LP is feasible and bounded: {other:?}"),
    }
}

/// ℓ∞ Hausdorff distance. The distance to a convex set is convex, so each
/// one-sided supremum is attained at a vertex.
pub fn hausdorff_distance(p: &BeliefPolytope, q: &BeliefPolytope) -> Result<Rational, GeometryError> {
    check_dim(p.dim(), q.dim())?;
    let mut best = Rational::zero();
    for (from, to) in [(p, q), (q, p)] {
        for v in &from.vertices {
            let d = point_polytope_distance(v, to)?;
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}
