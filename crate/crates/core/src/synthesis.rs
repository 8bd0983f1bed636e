//! Menu construction.
//!
//! Full extraction under convex independence uses c(t) = v(t)·𝟙 + α(t)·z(t)
//! with z(t) a separating direction normalized to vanish on Π(t) at its
//! maximum, and α(t) large enough to deter every other type. Weak extraction
//! applies the same construction to a selected point per type. Overlapping
//! beliefs get the pooled constant menu.

use indexmap::IndexMap;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_convex_independence, search_weak_convex_independence, selection_is_convex_independent, TypeSeparation,
    WciBudget, WeakConvexIndependence,
};
use crate::beliefs::Instance;
use crate::geometry::{contains_point, linear_extremes, shift_max_to_zero, BeliefPolytope, Point};
use crate::rational::{int, one, serde_rational, serde_rational_vec, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error("convex independence fails: type {type_name} shares the point {witness} with the hull of the others")]
    ConvexIndependenceFails { type_name: String, witness: Point },
    #[error("selection is not convex independent")]
    SelectionNotConvexIndependent,
    #[error("selected point {point} for type {type_name} is outside its belief set")]
    SelectionOutsideBelief { type_name: String, point: Point },
    #[error("selection has {got} points, instance has {expected} types")]
    SelectionLength { expected: usize, got: usize },
    #[error("weak convex independence undecided within the search budget")]
    WeakCIUnknown,
    #[error("direction does not separate type {type_name} from {other}: minimum {min} is not positive")]
    BrokenCertificate {
        type_name: String,
        other: String,
        min: String,
    },
    #[error("pooled set is empty")]
    EmptyPool,
    #[error("unknown type {0}")]
    UnknownType(String),
}

/// Payment to the designer in each state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Contract(#[serde(with = "serde_rational_vec")] pub Vec<Rational>);

impl Contract {
    pub fn constant(value: &Rational, states: usize) -> Self {
        Contract(vec![value.clone(); states])
    }

    pub fn payments(&self) -> &[Rational] {
        &self.0
    }

    /// Expected payment under belief `pi`.
    pub fn cost(&self, pi: &Point) -> Rational {
        pi.dot(&self.0)
    }
}

/// Per-type record of the construction c(t) = v(t)·𝟙 + α(t)·z(t).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCertificate {
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(with = "serde_rational_vec")]
    pub direction: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub margin: Rational,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub touching_vertex: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisCertificate {
    #[serde(with = "serde_rational")]
    pub alpha_margin: Rational,
    pub types: Vec<TypeCertificate>,
    /// Selected beliefs, present for weak extraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Vec<Point>>,
}

impl SynthesisCertificate {
    /// Checks c(t) − v(t)·𝟙 = α(t)·z(t) for every type.
    pub fn matches(&self, menu: &Menu, inst: &Instance) -> bool {
        self.types.len() == inst.type_count()
            && self.types.iter().enumerate().all(|(t, cert)| {
                cert.type_name == inst.name(t)
                    && menu.contract(inst.name(t)).is_some_and(|c| {
                        c.0.len() == cert.direction.len()
                            && c.0
                                .iter()
                                .zip(&cert.direction)
                                .all(|(ci, zi)| ci - inst.value(t) == &cert.alpha * zi)
                    })
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolingCertificate {
    pub lowest_type: String,
    pub pooled_types: Vec<String>,
    #[serde(with = "serde_rational")]
    pub revenue_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CertificateBundle {
    Full(SynthesisCertificate),
    Weak(SynthesisCertificate),
    Pooled(PoolingCertificate),
}

/// One contract per type, keyed by type name in instance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Menu {
    pub contracts: IndexMap<String, Contract>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateBundle>,
}

impl Menu {
    pub fn new(contracts: IndexMap<String, Contract>) -> Self {
        Menu {
            contracts,
            certificate: None,
        }
    }

    /// Menu assigning `contracts[t]` to the t-th type of `inst`.
    pub fn for_instance(inst: &Instance, contracts: Vec<Contract>) -> Self {
        Menu::new(inst.names().map(str::to_string).zip(contracts).collect())
    }

    pub fn contract(&self, type_name: &str) -> Option<&Contract> {
        self.contracts.get(type_name)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("menus serialize")
    }
}

/// Shifts `z` by a constant so that its maximum over `P` is zero.
pub fn normalize_direction(z: &[Rational], p: &BeliefPolytope) -> Vec<Rational> {
    shift_max_to_zero(z, p).0
}

/// α(t) = max(0, max_{s≠t} (v(s) − v(t)) / M(s)) + margin, where M(s) is the
/// minimum of π·z over Π(s).
pub fn compute_alpha(inst: &Instance, t: usize, z: &[Rational], margin: &Rational) -> Result<Rational, SynthesisError> {
    let mut sup = Rational::zero();
    for s in (0..inst.type_count()).filter(|&s| s != t) {
        let m = linear_extremes(inst.belief(s), z).expect("validated dimensions").min;
        if !m.is_positive() {
            return Err(SynthesisError::BrokenCertificate {
                type_name: inst.name(t).to_string(),
                other: inst.name(s).to_string(),
                min: crate::rational::format_rational(&m),
            });
        }
        let ratio = (inst.value(s) - inst.value(t)) / m;
        if ratio > sup {
            sup = ratio;
        }
    }
    Ok(sup + margin)
}

fn build_from_separations(
    inst: &Instance,
    separations: &[TypeSeparation],
    margin: &Rational,
) -> Result<(Menu, SynthesisCertificate), SynthesisError> {
    let n = inst.states();
    let built: Vec<Result<(Contract, TypeCertificate), SynthesisError>> = separations
        .par_iter()
        .enumerate()
        .map(|(t, sep)| {
            let cert = match sep {
                TypeSeparation::Separated { certificate, .. } => certificate,
                TypeSeparation::Overlapping { type_name, witness } => {
                    return Err(SynthesisError::ConvexIndependenceFails {
                        type_name: type_name.clone(),
                        witness: witness.clone(),
                    })
                }
            };
            let z = normalize_direction(&cert.direction, inst.belief(t));
            let alpha = compute_alpha(inst, t, &z, margin)?;
            let payments = (0..n).map(|j| inst.value(t) + &alpha * &z[j]).collect();
            Ok((
                Contract(payments),
                TypeCertificate {
                    type_name: inst.name(t).to_string(),
                    direction: z,
                    margin: cert.margin.clone(),
                    alpha,
                    touching_vertex: cert.touching_vertex.clone(),
                },
            ))
        })
        .collect();
    let mut contracts = Vec::new();
    let mut types = Vec::new();
    for r in built {
        let (c, cert) = r?;
        contracts.push(c);
        types.push(cert);
    }
    Ok((
        Menu::for_instance(inst, contracts),
        SynthesisCertificate {
            alpha_margin: margin.clone(),
            types,
            selection: None,
        },
    ))
}

pub fn synthesize_full_extraction(inst: &Instance, margin: &Rational) -> Result<Menu, SynthesisError> {
    let ci = check_convex_independence(inst);
    let (mut menu, cert) = build_from_separations(inst, &ci.per_type, margin)?;
    menu.certificate = Some(CertificateBundle::Full(cert));
    Ok(menu)
}

/// Builds the singleton construction on `selection`, or on a searched one.
pub fn synthesize_weak_extraction(
    inst: &Instance,
    selection: Option<Vec<Point>>,
    budget: WciBudget,
    seed: u64,
    margin: &Rational,
) -> Result<Menu, SynthesisError> {
    let selection = match selection {
        Some(sel) => {
            if sel.len() != inst.type_count() {
                return Err(SynthesisError::SelectionLength {
                    expected: inst.type_count(),
                    got: sel.len(),
                });
            }
            for (t, p) in sel.iter().enumerate() {
                let inside = p.dim() == inst.states()
                    && contains_point(inst.belief(t), p).map(|m| m.is_inside()).unwrap_or(false);
                if !inside {
                    return Err(SynthesisError::SelectionOutsideBelief {
                        type_name: inst.name(t).to_string(),
                        point: p.clone(),
                    });
                }
            }
            sel
        }
        None => match search_weak_convex_independence(inst, budget, seed) {
            WeakConvexIndependence::Holds { selection, .. } => selection,
            WeakConvexIndependence::Fails { .. } => return Err(SynthesisError::SelectionNotConvexIndependent),
            WeakConvexIndependence::Unknown { .. } => return Err(SynthesisError::WeakCIUnknown),
        },
    };
    if !selection_is_convex_independent(&selection) {
        return Err(SynthesisError::SelectionNotConvexIndependent);
    }
    let reduced = inst
        .with_singleton_beliefs(&selection)
        .map_err(|_| SynthesisError::SelectionNotConvexIndependent)?;
    let ci = check_convex_independence(&reduced);
    let (mut menu, mut cert) =
        build_from_separations(&reduced, &ci.per_type, margin).map_err(|e| match e {
            SynthesisError::ConvexIndependenceFails { .. } => SynthesisError::SelectionNotConvexIndependent,
            other => other,
        })?;
    cert.selection = Some(selection);
    menu.certificate = Some(CertificateBundle::Weak(cert));
    Ok(menu)
}

/// Constant contract v(t₁)·𝟙 for every type, t₁ the first lowest-value type
/// of `pool`; revenue bound |pool|·v(t₁).
pub fn pooled_menu(inst: &Instance, pool: &[String]) -> Result<Menu, SynthesisError> {
    let mut indices = Vec::new();
    for name in pool {
        indices.push(inst.index_of(name).ok_or_else(|| SynthesisError::UnknownType(name.clone()))?);
    }
    let lowest = indices
        .iter()
        .copied()
        .reduce(|a, b| if inst.value(b) < inst.value(a) { b } else { a })
        .ok_or(SynthesisError::EmptyPool)?;
    let v1 = inst.value(lowest);
    let contract = Contract::constant(v1, inst.states());
    let mut menu = Menu::for_instance(inst, vec![contract; inst.type_count()]);
    menu.certificate = Some(CertificateBundle::Pooled(PoolingCertificate {
        lowest_type: inst.name(lowest).to_string(),
        pooled_types: pool.to_vec(),
        revenue_bound: int(pool.len() as i64) * v1,
    }));
    Ok(menu)
}

/// Default additive slack on α.
pub fn default_margin() -> Rational {
    one()
}
