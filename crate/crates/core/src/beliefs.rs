//! Belief-set specifications and extraction instances.
//!
//! Specs are what instance files carry; [`realize`] turns one into a
//! canonical [`BeliefPolytope`]. [`validate_instance`] checks a whole
//! instance, collecting every problem instead of stopping at the first.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::{BeliefPolytope, GeometryError, Point};
use crate::rational::{one, serde_rational, Rational};

/// Exact ball vertex enumeration visits `|S| * 2^(|S|-1)` candidates.
pub const MAX_BALL_STATES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BeliefError {
    #[error("center {0} is not in the simplex: {1}")]
    CenterNotInSimplex(Point, String),
    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(Rational),
    #[error("negative radius {0}")]
    NegativeRadius(Rational),
    #[error("ball beliefs support at most {MAX_BALL_STATES} states, instance has {0}")]
    BallTooManyStates(usize),
    #[error("belief has {found} coordinates but the instance has {expected} states")]
    WrongStateCount { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How a belief set is written down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BeliefSpec {
    Singleton {
        point: Point,
    },
    Vertices {
        vertices: Vec<Point>,
    },
    /// `{(1-ε)c + επ' : π' ∈ Δ(S)}`.
    Contamination {
        center: Point,
        #[serde(with = "serde_rational")]
        epsilon: Rational,
    },
    /// `{π ∈ Δ(S) : ‖π - c‖∞ ≤ r}`.
    Ball {
        center: Point,
        #[serde(with = "serde_rational")]
        radius: Rational,
    },
}

impl BeliefSpec {
    pub fn contamination(center: Point, epsilon: Rational) -> Self {
        BeliefSpec::Contamination { center, epsilon }
    }

    /// The distinguished point of the spec, if it has one.
    pub fn center(&self) -> Option<&Point> {
        match self {
            BeliefSpec::Singleton { point } => Some(point),
            BeliefSpec::Contamination { center, .. } | BeliefSpec::Ball { center, .. } => Some(center),
            BeliefSpec::Vertices { .. } => None,
        }
    }
}

fn check_center(center: &Point, states: usize) -> Result<(), BeliefError> {
    if center.dim() != states {
        return Err(BeliefError::WrongStateCount {
            expected: states,
            found: center.dim(),
        });
    }
    center
        .check_probability()
        .map_err(|reason| BeliefError::CenterNotInSimplex(center.clone(), reason))
}

/// Vertices of the ε-contamination of `center`.
pub fn contamination_vertices(center: &Point, epsilon: &Rational) -> Vec<Point> {
    let keep = one() - epsilon;
    (0..center.dim())
        .map(|s| {
            let mut coords: Vec<Rational> = center.coords().iter().map(|c| &keep * c).collect();
            coords[s] += epsilon;
            Point::new(coords)
        })
        .collect()
}

/// Vertices of `{x : lo ≤ x ≤ hi, Σx = 1}`: all but one coordinate sit at a
/// bound, and the last is fixed by the sum.
fn box_simplex_vertices(lo: &[Rational], hi: &[Rational]) -> Vec<Point> {
    let n = lo.len();
    let mut out = Vec::new();
    for free in 0..n {
        for mask in 0u32..(1 << (n - 1)) {
            let mut coords = vec![Rational::zero(); n];
            let mut bit = 0;
            let mut sum = Rational::zero();
            for (s, c) in coords.iter_mut().enumerate() {
                if s == free {
                    continue;
                }
                *c = if mask >> bit & 1 == 1 { hi[s].clone() } else { lo[s].clone() };
                sum += &*c;
                bit += 1;
            }
            let rest = one() - sum;
            if rest >= lo[free] && rest <= hi[free] {
                coords[free] = rest;
                out.push(Point::new(coords));
            }
        }
    }
    out
}

/// Realizes a spec over `states` states as a canonical polytope.
pub fn realize(spec: &BeliefSpec, states: usize) -> Result<BeliefPolytope, BeliefError> {
    match spec {
        BeliefSpec::Singleton { point } => {
            check_center(point, states)?;
            Ok(BeliefPolytope::singleton(point.clone())?)
        }
        BeliefSpec::Vertices { vertices } => {
            for v in vertices {
                check_center(v, states)?;
            }
            Ok(BeliefPolytope::new(vertices.clone())?)
        }
        BeliefSpec::Contamination { center, epsilon } => {
            check_center(center, states)?;
            if epsilon.is_negative() || *epsilon > one() {
                return Err(BeliefError::EpsilonOutOfRange(epsilon.clone()));
            }
            Ok(BeliefPolytope::new(contamination_vertices(center, epsilon))?)
        }
        BeliefSpec::Ball { center, radius } => {
            check_center(center, states)?;
            if radius.is_negative() {
                return Err(BeliefError::NegativeRadius(radius.clone()));
            }
            if states > MAX_BALL_STATES {
                return Err(BeliefError::BallTooManyStates(states));
            }
            let lo: Vec<Rational> = center
                .coords()
                .iter()
                .map(|c| std::cmp::max(c - radius, Rational::zero()))
                .collect();
            let hi: Vec<Rational> = center
                .coords()
                .iter()
                .map(|c| std::cmp::min(c + radius, one()))
                .collect();
            Ok(BeliefPolytope::new(box_simplex_vertices(&lo, &hi))?)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Expected,
    Maxmin,
}

/// The designer's belief (a point or a set) and how revenue is scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignerSpec {
    pub belief: BeliefSpec,
    pub criterion: Criterion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSpec {
    pub name: String,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub belief: BeliefSpec,
}

/// An instance file as written: states, typed values and beliefs, and an
/// optional designer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionInstance {
    pub states: Vec<String>,
    pub types: Vec<TypeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designer: Option<DesignerSpec>,
}

impl ExtractionInstance {
    /// States `s1..sn` and types `t1..tk` with the given beliefs and values.
    pub fn from_beliefs(beliefs: Vec<BeliefSpec>, values: Vec<Rational>) -> Self {
        assert_eq!(beliefs.len(), values.len());
        let states = beliefs
            .iter()
            .find_map(|b| match b {
                BeliefSpec::Vertices { vertices } => vertices.first().map(Point::dim),
                other => other.center().map(Point::dim),
            })
            .unwrap_or(0);
        ExtractionInstance {
            states: (1..=states).map(|s| format!("s{s}")).collect(),
            types: beliefs
                .into_iter()
                .zip(values)
                .enumerate()
                .map(|(i, (belief, value))| TypeSpec {
                    name: format!("t{}", i + 1),
                    value,
                    belief,
                })
                .collect(),
            designer: None,
        }
    }

    pub fn singletons(points: Vec<Point>, values: Vec<Rational>) -> Self {
        Self::from_beliefs(
            points
                .into_iter()
                .map(|point| BeliefSpec::Singleton { point })
                .collect(),
            values,
        )
    }

    pub fn contaminations(centers: Vec<Point>, epsilon: &Rational, values: Vec<Rational>) -> Self {
        Self::from_beliefs(
            centers
                .into_iter()
                .map(|c| BeliefSpec::contamination(c, epsilon.clone()))
                .collect(),
            values,
        )
    }

    pub fn with_designer(mut self, designer: DesignerSpec) -> Self {
        self.designer = Some(designer);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One failed instance check, located by a JSON-style path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// A validated instance with every belief realized.
#[derive(Debug, Clone)]
pub struct Instance {
    spec: ExtractionInstance,
    beliefs: Vec<BeliefPolytope>,
    designer: Option<BeliefPolytope>,
    pairwise_dims: OnceLock<Vec<Vec<i64>>>,
}

impl Instance {
    pub fn spec(&self) -> &ExtractionInstance {
        &self.spec
    }

    pub fn states(&self) -> usize {
        self.spec.states.len()
    }

    pub fn type_count(&self) -> usize {
        self.spec.types.len()
    }

    pub fn name(&self, t: usize) -> &str {
        &self.spec.types[t].name
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.spec.types.iter().map(|t| t.name.as_str())
    }

    pub fn value(&self, t: usize) -> &Rational {
        &self.spec.types[t].value
    }

    pub fn belief(&self, t: usize) -> &BeliefPolytope {
        &self.beliefs[t]
    }

    pub fn beliefs(&self) -> &[BeliefPolytope] {
        &self.beliefs
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.spec.types.iter().position(|t| t.name == name)
    }

    pub fn designer(&self) -> Option<(&BeliefPolytope, Criterion)> {
        let criterion = self.spec.designer.as_ref()?.criterion;
        self.designer.as_ref().map(|b| (b, criterion))
    }

    /// Memo for the pairwise intersection dimensions computed by analysis.
    pub(crate) fn pairwise_dims(&self) -> &OnceLock<Vec<Vec<i64>>> {
        &self.pairwise_dims
    }

    /// Same states and values with the beliefs replaced by singletons.
    pub fn with_singleton_beliefs(&self, points: &[Point]) -> Result<Instance, Vec<Violation>> {
        let mut spec = self.spec.clone();
        for (t, p) in spec.types.iter_mut().zip(points) {
            t.belief = BeliefSpec::Singleton { point: p.clone() };
        }
        validate_instance(&spec)
    }
}

/// Checks every instance invariant and realizes all belief specs.
pub fn validate_instance(inst: &ExtractionInstance) -> Result<Instance, Vec<Violation>> {
    let mut violations = Vec::new();
    let mut push = |path: String, message: String| violations.push(Violation { path, message });

    let states = inst.states.len();
    if states == 0 {
        push("states".into(), "at least one state is required".into());
    }
    let mut seen = HashSet::new();
    for (i, s) in inst.states.iter().enumerate() {
        if !seen.insert(s) {
            push(format!("states[{i}]"), format!("duplicate state name {s:?}"));
        }
    }
    if inst.types.len() < 2 {
        push(
            "types".into(),
            format!("at least two types are required, found {}", inst.types.len()),
        );
    }
    let mut seen = HashSet::new();
    let mut beliefs = Vec::with_capacity(inst.types.len());
    for (i, t) in inst.types.iter().enumerate() {
        if !seen.insert(&t.name) {
            push(format!("types[{i}].name"), format!("duplicate type name {:?}", t.name));
        }
        if states > 0 {
            match realize(&t.belief, states) {
                Ok(p) => beliefs.push(p),
                Err(e) => push(format!("types[{i}].belief"), e.to_string()),
            }
        }
    }
    let designer = match &inst.designer {
        Some(d) if states > 0 => match realize(&d.belief, states) {
            Ok(p) => Some(p),
            Err(e) => {
                push("designer.belief".into(), e.to_string());
                None
            }
        },
        _ => None,
    };
    if violations.is_empty() {
        Ok(Instance {
            spec: inst.clone(),
            beliefs,
            designer,
            pairwise_dims: OnceLock::new(),
        })
    } else {
        Err(violations)
    }
}
