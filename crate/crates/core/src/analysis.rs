//! Decides the belief conditions that govern extraction.
//!
//! - convex independence: each Π(t) misses the hull of the other sets;
//! - weak convex independence: some selection π(t) ∈ Π(t) is convex
//!   independent (searched, three-valued);
//! - convex dependence: some Π(t₀) contains the hull of all the others;
//! - full / chain overlap: pairwise intersections of full dimension.
//!
//! Every positive answer carries a certificate that can be re-checked
//! without trusting the search that produced it.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beliefs::Instance;
use crate::geometry::{
    common_point, hull_membership, hull_of_union, union_generators, intersection_dimension, linear_extremes, separate_from_hull,
    BeliefPolytope, Point, Separation, SeparationCertificate,
};
use crate::rational::{serde_rational, Rational};
use crate::sampling::{random_point_in_hull, rng_for};

/// Hamiltonian-path search is exhaustive, so the type count is capped.
pub const MAX_CHAIN_TYPES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("chain search supports at most {MAX_CHAIN_TYPES} types, instance has {0}")]
    TooManyTypes(usize),
    #[error("classification invariant violated: {0}")]
    InvariantViolated(String),
}

/// Outcome of separating Π(t) from co(∪_{s≠t} Π(s)).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TypeSeparation {
    Separated {
        #[serde(rename = "type")]
        type_name: String,
        certificate: SeparationCertificate,
    },
    /// A point of Π(t) inside the hull of the others.
    Overlapping {
        #[serde(rename = "type")]
        type_name: String,
        witness: Point,
    },
}

impl TypeSeparation {
    pub fn certificate(&self) -> Option<&SeparationCertificate> {
        match self {
            TypeSeparation::Separated { certificate, .. } => Some(certificate),
            TypeSeparation::Overlapping { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvexIndependence {
    pub holds: bool,
    pub per_type: Vec<TypeSeparation>,
}

/// co(∪_{s≠t} Π(s)).
pub fn hull_of_others(inst: &Instance, t: usize) -> BeliefPolytope {
    hull_of_union(
        inst.beliefs()
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != t)
            .map(|(_, p)| p),
    )
    .expect("validated instance has at least two types of one dimension")
}

pub fn check_convex_independence(inst: &Instance) -> ConvexIndependence {
    let per_type: Vec<TypeSeparation> = (0..inst.type_count())
        .into_par_iter()
        .map(|t| {
            let others = others_generators(inst, t);
            let type_name = inst.name(t).to_string();
            match separate_from_hull(inst.belief(t), &others).expect("validated dimensions") {
                Separation::Separated(certificate) => TypeSeparation::Separated {
                    type_name,
                    certificate,
                },
                Separation::NotSeparable { witness } => TypeSeparation::Overlapping { type_name, witness },
            }
        })
        .collect();
    ConvexIndependence {
        holds: per_type.iter().all(|s| s.certificate().is_some()),
        per_type,
    }
}

fn others_generators(inst: &Instance, t: usize) -> BeliefPolytope {
    union_generators(inst.beliefs().iter().enumerate().filter(|&(s, _)| s != t).map(|(_, p)| p))
}

/// Convex independence without certificates: one feasibility LP per type.
pub fn convex_independence_holds(inst: &Instance) -> bool {
    (0..inst.type_count()).all(|t| {
        common_point(inst.belief(t), &others_generators(inst, t))
            .expect("validated dimensions")
            .is_none()
    })
}

/// Classic point test: no π(t) lies in the hull of the other points.
pub fn selection_is_convex_independent(points: &[Point]) -> bool {
    (0..points.len()).all(|t| {
        let others: Vec<Point> = points
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != t)
            .map(|(_, p)| p.clone())
            .collect();
        !hull_membership(&others, &points[t])
            .expect("selection points share a dimension")
            .is_inside()
    })
}

/// Index of the first point that lies in the hull of the others.
fn first_dependent(points: &[Point]) -> Option<usize> {
    (0..points.len()).find(|&t| {
        let others: Vec<Point> = points
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != t)
            .map(|(_, p)| p.clone())
            .collect();
        hull_membership(&others, &points[t]).expect("same dimension").is_inside()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WciBudget {
    pub vertex_tuples: usize,
    pub random_selections: usize,
}

impl Default for WciBudget {
    fn default() -> Self {
        WciBudget {
            vertex_tuples: 10_000,
            random_selections: 1_000,
        }
    }
}

impl WciBudget {
    /// Splits a single sample count the way the defaults do.
    pub fn from_total(total: usize) -> Self {
        let random = total / 11;
        WciBudget {
            vertex_tuples: total - random,
            random_selections: random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionSource {
    ConvexIndependence,
    VertexTuple,
    RandomSearch,
}

/// Weak convex independence is searched, not decided: `Fails` only comes
/// from cases where the selection is forced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WeakConvexIndependence {
    Holds {
        selection: Vec<Point>,
        source: SelectionSource,
    },
    Fails {
        reason: String,
    },
    Unknown {
        vertex_tuples_tried: usize,
        random_selections_tried: usize,
    },
}

impl WeakConvexIndependence {
    pub fn holds(&self) -> bool {
        matches!(self, WeakConvexIndependence::Holds { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeakConvexIndependence::Holds { .. } => "holds",
            WeakConvexIndependence::Fails { .. } => "fails",
            WeakConvexIndependence::Unknown { .. } => "unknown",
        }
    }
}

pub fn search_weak_convex_independence(inst: &Instance, budget: WciBudget, seed: u64) -> WeakConvexIndependence {
    let ci = check_convex_independence(inst);
    search_with_ci(inst, &ci, budget, seed)
}

fn search_with_ci(
    inst: &Instance,
    ci: &ConvexIndependence,
    budget: WciBudget,
    seed: u64,
) -> WeakConvexIndependence {
    let n = inst.type_count();
    if ci.holds {
        let selection: Vec<Point> = ci
            .per_type
            .iter()
            .map(|s| s.certificate().expect("holds").touching_vertex.clone())
            .collect();
        debug_assert!(selection_is_convex_independent(&selection));
        return WeakConvexIndependence::Holds {
            selection,
            source: SelectionSource::ConvexIndependence,
        };
    }
    if inst.beliefs().iter().all(BeliefPolytope::is_singleton) {
        return WeakConvexIndependence::Fails {
            reason: "all beliefs are singletons, so the only selection is the beliefs themselves, which are not convex independent".into(),
        };
    }
    for a in 0..n {
        for b in a + 1..n {
            let (pa, pb) = (inst.belief(a), inst.belief(b));
            if pa.is_singleton() && pa == pb {
                return WeakConvexIndependence::Fails {
                    reason: format!(
                        "types {} and {} share the singleton belief {}, so every selection repeats a point",
                        inst.name(a),
                        inst.name(b),
                        pa.vertices()[0]
                    ),
                };
            }
        }
    }

    // Vertex tuples in odometer order.
    let sizes: Vec<usize> = inst.beliefs().iter().map(|p| p.vertices().len()).collect();
    let mut idx = vec![0usize; n];
    let mut tried = 0;
    while tried < budget.vertex_tuples {
        let selection: Vec<Point> = idx
            .iter()
            .enumerate()
            .map(|(t, &i)| inst.belief(t).vertices()[i].clone())
            .collect();
        tried += 1;
        if selection_is_convex_independent(&selection) {
            return WeakConvexIndependence::Holds {
                selection,
                source: SelectionSource::VertexTuple,
            };
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sizes[pos] {
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if pos == usize::MAX {
            break;
        }
    }

    let mut rng = rng_for(seed, 0);
    for _ in 0..budget.random_selections {
        let mut selection: Vec<Point> = inst
            .beliefs()
            .iter()
            .map(|p| random_point_in_hull(&mut rng, p.vertices()))
            .collect();
        // Local improvement: push the offending point to the vertex of its set
        // that lies farthest from the others' mean.
        for _ in 0..=n {
            let Some(t) = first_dependent(&selection) else {
                return WeakConvexIndependence::Holds {
                    selection,
                    source: SelectionSource::RandomSearch,
                };
            };
            let others: Vec<&Point> = selection
                .iter()
                .enumerate()
                .filter(|&(s, _)| s != t)
                .map(|(_, p)| p)
                .collect();
            let dim = inst.states();
            let mut direction: Vec<Rational> = selection[t].coords().to_vec();
            for j in 0..dim {
                let mean: Rational =
                    others.iter().map(|p| p.coords()[j].clone()).sum::<Rational>() / Rational::from_integer((others.len() as i64).into());
                direction[j] -= mean;
            }
            let next = linear_extremes(inst.belief(t), &direction)
                .expect("validated dimensions")
                .argmax;
            if next == selection[t] {
                // Nudge a random other type instead.
                let mut s = rng.gen_range(0..n - 1);
                if s >= t {
                    s += 1;
                }
                selection[s] = random_point_in_hull(&mut rng, inst.belief(s).vertices());
            } else {
                selection[t] = next;
            }
        }
    }
    WeakConvexIndependence::Unknown {
        vertex_tuples_tried: tried,
        random_selections_tried: budget.random_selections,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvexDependence {
    pub holds: bool,
    /// First t₀ whose set contains the hull of all the others.
    pub t0: Option<String>,
    /// Per type: does Π(t) contain co(∪_{s≠t} Π(s))?
    pub contains_others: Vec<bool>,
}

impl ConvexDependence {
    pub fn witness_index(&self, inst: &Instance) -> Option<usize> {
        self.t0.as_deref().and_then(|n| inst.index_of(n))
    }
}

/// Vertexwise containment of every other set in Π(t).
fn contains_all_others(inst: &Instance, t: usize) -> bool {
    (0..inst.type_count())
        .filter(|&s| s != t)
        .all(|s| inst.belief(s).is_subset_of(inst.belief(t)).expect("validated dimensions"))
}

pub fn check_convex_dependence(inst: &Instance) -> ConvexDependence {
    let contains_others: Vec<bool> = (0..inst.type_count())
        .into_par_iter()
        .map(|t| contains_all_others(inst, t))
        .collect();
    let t0 = contains_others
        .iter()
        .position(|&b| b)
        .map(|t| inst.name(t).to_string());
    ConvexDependence {
        holds: t0.is_some(),
        t0,
        contains_others,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueGap {
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational")]
    pub t0_value: Rational,
}

/// Proof that no menu achieves full extraction on this instance.
///
/// Any contract with π·c(t₀) ≤ v(t₀) on Π(t₀) costs at most v(t₀) < v(s) on
/// Π(s) ⊆ Π(t₀), so type s would never be deterred from reporting t₀.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpossibilityCertificate {
    pub t0: String,
    pub contained_types: Vec<String>,
    pub value_gaps: Vec<ValueGap>,
}

impl ImpossibilityCertificate {
    pub fn verify(&self, inst: &Instance) -> bool {
        let Some(t0) = inst.index_of(&self.t0) else {
            return false;
        };
        let contained = self.contained_types.iter().all(|n| {
            inst.index_of(n)
                .map(|s| s != t0 && inst.belief(s).is_subset_of(inst.belief(t0)).unwrap_or(false))
                .unwrap_or(false)
        });
        let gaps = !self.value_gaps.is_empty()
            && self.value_gaps.iter().all(|g| {
                self.contained_types.contains(&g.type_name)
                    && inst.index_of(&g.type_name).is_some_and(|s| inst.value(s) > inst.value(t0))
            });
        contained && gaps
    }
}

pub fn impossibility_certificate(inst: &Instance) -> Option<ImpossibilityCertificate> {
    let cd = check_convex_dependence(inst);
    impossibility_from(inst, &cd)
}

fn impossibility_from(inst: &Instance, cd: &ConvexDependence) -> Option<ImpossibilityCertificate> {
    cd.contains_others
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c)
        .find_map(|(t0, _)| {
            let others: Vec<usize> = (0..inst.type_count()).filter(|&s| s != t0).collect();
            let value_gaps: Vec<ValueGap> = others
                .iter()
                .filter(|&&s| inst.value(s) > inst.value(t0))
                .map(|&s| ValueGap {
                    type_name: inst.name(s).to_string(),
                    value: inst.value(s).clone(),
                    t0_value: inst.value(t0).clone(),
                })
                .collect();
            (!value_gaps.is_empty()).then(|| ImpossibilityCertificate {
                t0: inst.name(t0).to_string(),
                contained_types: others.iter().map(|&s| inst.name(s).to_string()).collect(),
                value_gaps,
            })
        })
}

/// Pairwise intersection dimensions; the diagonal holds dim Π(t).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullOverlap {
    pub holds: bool,
    pub dimensions: Vec<Vec<i64>>,
}

pub fn pairwise_dimensions(inst: &Instance) -> Vec<Vec<i64>> {
    inst.pairwise_dims().get_or_init(|| compute_pairwise(inst)).clone()
}

fn compute_pairwise(inst: &Instance) -> Vec<Vec<i64>> {
    let n = inst.type_count();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let dims: Vec<i64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            intersection_dimension(inst.belief(a), inst.belief(b))
                .expect("validated dimensions")
                .dim
        })
        .collect();
    let mut m = vec![vec![0i64; n]; n];
    for (t, row) in m.iter_mut().enumerate() {
        row[t] = inst.belief(t).affine_dim() as i64;
    }
    for (&(a, b), d) in pairs.iter().zip(dims) {
        m[a][b] = d;
        m[b][a] = d;
    }
    m
}

pub fn check_fully_overlapping(inst: &Instance) -> FullOverlap {
    overlap_from(inst, pairwise_dimensions(inst))
}

fn overlap_from(inst: &Instance, dimensions: Vec<Vec<i64>>) -> FullOverlap {
    let full = inst.states() as i64 - 1;
    let holds = dimensions
        .iter()
        .enumerate()
        .all(|(a, row)| row.iter().enumerate().all(|(b, &d)| a == b || d == full));
    FullOverlap { holds, dimensions }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainOverlap {
    pub holds: bool,
    pub ordering: Option<Vec<String>>,
}

pub fn check_chain_overlapping(inst: &Instance) -> Result<ChainOverlap, AnalysisError> {
    if inst.type_count() > MAX_CHAIN_TYPES {
        return Err(AnalysisError::TooManyTypes(inst.type_count()));
    }
    Ok(chain_from(inst, &pairwise_dimensions(inst)))
}

fn chain_from(inst: &Instance, dimensions: &[Vec<i64>]) -> ChainOverlap {
    let n = inst.type_count();
    let full = inst.states() as i64 - 1;
    let edge = |a: usize, b: usize| dimensions[a][b] == full;

    fn extend(path: &mut Vec<usize>, used: &mut [bool], n: usize, edge: &dyn Fn(usize, usize) -> bool) -> bool {
        if path.len() == n {
            return true;
        }
        let last = *path.last().expect("nonempty path");
        for next in 0..n {
            if !used[next] && edge(last, next) {
                used[next] = true;
                path.push(next);
                if extend(path, used, n, edge) {
                    return true;
                }
                path.pop();
                used[next] = false;
            }
        }
        false
    }

    for start in 0..n {
        let mut path = vec![start];
        let mut used = vec![false; n];
        used[start] = true;
        if extend(&mut path, &mut used, n, &edge) {
            return ChainOverlap {
                holds: true,
                ordering: Some(path.into_iter().map(|t| inst.name(t).to_string()).collect()),
            };
        }
    }
    ChainOverlap {
        holds: false,
        ordering: None,
    }
}

/// Everything the classifier knows about one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub types: Vec<String>,
    pub convex_independence: ConvexIndependence,
    pub weak_convex_independence: WeakConvexIndependence,
    pub convex_dependence: ConvexDependence,
    pub fully_overlapping: FullOverlap,
    pub chain_overlapping: ChainOverlap,
    pub impossibility: Option<ImpossibilityCertificate>,
}

impl ClassificationReport {
    /// CI ⇒ WCI, CD ⇒ ¬CI, FO ⇒ chain, plus certificate re-checks.
    pub fn check_invariants(&self, inst: &Instance) -> Result<(), AnalysisError> {
        let fail = |m: &str| Err(AnalysisError::InvariantViolated(m.to_string()));
        if self.convex_independence.holds && !self.weak_convex_independence.holds() {
            return fail("convex independence without weak convex independence");
        }
        if self.convex_dependence.holds && self.convex_independence.holds && inst.type_count() >= 2 {
            return fail("convex dependence together with convex independence");
        }
        if self.fully_overlapping.holds && !self.chain_overlapping.holds {
            return fail("fully overlapping without a chain ordering");
        }
        for (t, sep) in self.convex_independence.per_type.iter().enumerate() {
            if let Some(cert) = sep.certificate() {
                if !cert.verify(inst.belief(t), &others_generators(inst, t)) {
                    return fail("separation certificate does not re-verify");
                }
            }
        }
        if let WeakConvexIndependence::Holds { selection, .. } = &self.weak_convex_independence {
            let inside = selection.iter().enumerate().all(|(t, p)| {
                crate::geometry::contains_point(inst.belief(t), p)
                    .map(|m| m.is_inside())
                    .unwrap_or(false)
            });
            if !inside || !selection_is_convex_independent(selection) {
                return fail("weak convex independence selection does not re-verify");
            }
        }
        if let Some(t0) = self.convex_dependence.witness_index(inst) {
            if !contains_all_others(inst, t0) {
                return fail("convex dependence witness does not re-verify");
            }
        }
        if let Some(cert) = &self.impossibility {
            if !cert.verify(inst) {
                return fail("impossibility certificate does not re-verify");
            }
        }
        Ok(())
    }
}

pub fn classify(inst: &Instance, budget: WciBudget, seed: u64) -> Result<ClassificationReport, AnalysisError> {
    if inst.type_count() > MAX_CHAIN_TYPES {
        return Err(AnalysisError::TooManyTypes(inst.type_count()));
    }
    let convex_independence = check_convex_independence(inst);
    let weak_convex_independence = search_with_ci(inst, &convex_independence, budget, seed);
    let convex_dependence = check_convex_dependence(inst);
    let impossibility = impossibility_from(inst, &convex_dependence);
    let dimensions = pairwise_dimensions(inst);
    let chain_overlapping = chain_from(inst, &dimensions);
    let fully_overlapping = overlap_from(inst, dimensions);
    let report = ClassificationReport {
        types: inst.names().map(str::to_string).collect(),
        convex_independence,
        weak_convex_independence,
        convex_dependence,
        fully_overlapping,
        chain_overlapping,
        impossibility,
    };
    report.check_invariants(inst)?;
    Ok(report)
}
