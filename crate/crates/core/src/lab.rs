//! ε-threshold scans, Monte Carlo frequencies and robust witnesses for the
//! belief conditions.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{classify, convex_independence_holds, AnalysisError, ClassificationReport, WciBudget};
use crate::beliefs::{realize, validate_instance, BeliefSpec, ExtractionInstance, Instance, MAX_BALL_STATES};
use crate::geometry::{hausdorff_distance, BeliefPolytope, Point};
use crate::rational::{int, one, ratio, serde_rational, serde_rational_opt, Rational};
use crate::sampling::{dyadic_simplex_point, dyadic_unit, random_point_in_hull, rng_for};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabError {
    #[error("centers are not convex independent as singletons")]
    CentersNotConvexIndependent,
    #[error("at least two centers of one dimension are required")]
    TooFewCenters,
    #[error("invalid centers: {0}")]
    InvalidCenters(String),
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("grid must be strictly increasing within [0, 1]")]
    InvalidGrid,
    #[error("epsilon must lie in [0, 1]")]
    InvalidEpsilon,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("infeasible witness: {0}")]
    Infeasible(String),
    #[error("convex independence is not downward closed between epsilon {lower} and {upper}")]
    MonotonicityViolated { lower: String, upper: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Instance whose types have ε-contaminations of `centers` and values 1, 2, ….
pub fn contaminated_instance(centers: &[Point], epsilon: &Rational) -> Result<Instance, LabError> {
    let values = (1..=centers.len() as i64).map(int).collect();
    validate_instance(&ExtractionInstance::contaminations(centers.to_vec(), epsilon, values))
        .map_err(|v| LabError::InvalidCenters(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))
}

fn ci_at(centers: &[Point], epsilon: &Rational) -> Result<bool, LabError> {
    Ok(convex_independence_holds(&contaminated_instance(centers, epsilon)?))
}

/// Bracket `[lo, hi]` with convex independence at `lo` and not at `hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bracket {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl Bracket {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Bisection on ε for contaminations of `centers`. Contaminations grow with
/// ε, so convex independence is downward closed.
pub fn ci_epsilon_threshold(centers: &[Point], tolerance: &Rational) -> Result<Bracket, LabError> {
    if centers.len() < 2 {
        return Err(LabError::TooFewCenters);
    }
    if !tolerance.is_positive() {
        return Err(LabError::NonPositiveTolerance);
    }
    if !ci_at(centers, &Rational::zero())? {
        return Err(LabError::CentersNotConvexIndependent);
    }
    debug_assert!(!ci_at(centers, &one())?);
    let two = int(2);
    let (mut lo, mut hi) = (Rational::zero(), one());
    while &hi - &lo > *tolerance {
        let mid = (&lo + &hi) / &two;
        if ci_at(centers, &mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    pub ci: bool,
    pub wci: String,
    pub cd: bool,
    pub fo: bool,
    pub chain: bool,
}

impl ScanRow {
    fn from_report(epsilon: Rational, r: &ClassificationReport) -> Self {
        ScanRow {
            epsilon,
            ci: r.convex_independence.holds,
            wci: r.weak_convex_independence.label().to_string(),
            cd: r.convex_dependence.holds,
            fo: r.fully_overlapping.holds,
            chain: r.chain_overlapping.holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpsilonScan {
    pub centers: Vec<Point>,
    pub rows: Vec<ScanRow>,
}

impl EpsilonScan {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epsilon", "ci", "wci", "cd", "fo"]).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                crate::rational::format_rational(&r.epsilon),
                r.ci.to_string(),
                r.wci.clone(),
                r.cd.to_string(),
                r.fo.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Grid `start, start + step, …` up to and including `end`.
pub fn grid(start: &Rational, end: &Rational, step: &Rational) -> Result<Vec<Rational>, LabError> {
    if !step.is_positive() || start.is_negative() || end > &one() || start > end {
        return Err(LabError::InvalidGrid);
    }
    let mut out = Vec::new();
    let mut x = start.clone();
    while &x <= end {
        out.push(x.clone());
        x += step;
    }
    Ok(out)
}

/// Classifies the contaminated instance at each ε of `grid`.
pub fn scan_epsilon(centers: &[Point], grid: &[Rational], budget: WciBudget, seed: u64) -> Result<EpsilonScan, LabError> {
    if centers.len() < 2 {
        return Err(LabError::TooFewCenters);
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let in_range = grid.iter().all(|e| !e.is_negative() && e <= &one());
    if grid.is_empty() || !increasing || !in_range {
        return Err(LabError::InvalidGrid);
    }
    let rows: Vec<Result<ScanRow, LabError>> = grid
        .par_iter()
        .map(|eps| {
            let inst = contaminated_instance(centers, eps)?;
            Ok(ScanRow::from_report(eps.clone(), &classify(&inst, budget, seed)?))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    for (i, upper) in rows.iter().enumerate() {
        if let Some(lower) = rows[..i].iter().find(|r| upper.ci && !r.ci) {
            return Err(LabError::MonotonicityViolated {
                lower: crate::rational::format_rational(&lower.epsilon),
                upper: crate::rational::format_rational(&upper.epsilon),
            });
        }
    }
    Ok(EpsilonScan {
        centers: centers.to_vec(),
        rows,
    })
}

/// How sampled belief collections are built from random centers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Singleton,
    /// Every type contaminated by the same ε.
    Contamination {
        #[serde(with = "serde_rational")]
        epsilon: Rational,
    },
    /// Each type contaminated by its own ε drawn from (0, ε].
    ContaminationUpto {
        #[serde(with = "serde_rational")]
        epsilon: Rational,
    },
}

impl Family {
    /// Parses `singleton`, `contamination` or `contamination-upto` with an
    /// optional ε.
    pub fn parse(name: &str, epsilon: Option<Rational>) -> Result<Self, String> {
        let need = |e: Option<Rational>| e.ok_or_else(|| format!("family {name} needs --eps"));
        match name {
            "singleton" => Ok(Family::Singleton),
            "contamination" => Ok(Family::Contamination { epsilon: need(epsilon)? }),
            "contamination-upto" => Ok(Family::ContaminationUpto { epsilon: need(epsilon)? }),
            other => Err(format!("unknown family {other:?}")),
        }
    }

    fn epsilon(&self) -> Option<&Rational> {
        match self {
            Family::Singleton => None,
            Family::Contamination { epsilon } | Family::ContaminationUpto { epsilon } => Some(epsilon),
        }
    }

    /// Belief specs for sample `index`.
    pub fn draw(&self, states: usize, types: usize, seed: u64, index: u64) -> Vec<BeliefSpec> {
        let mut rng = rng_for(seed, index);
        let centers: Vec<Point> = (0..types).map(|_| dyadic_simplex_point(&mut rng, states)).collect();
        centers
            .into_iter()
            .map(|center| match self {
                Family::Singleton => BeliefSpec::Singleton { point: center },
                Family::Contamination { epsilon } => BeliefSpec::contamination(center, epsilon.clone()),
                Family::ContaminationUpto { epsilon } => {
                    BeliefSpec::contamination(center, epsilon * dyadic_unit(&mut rng))
                }
            })
            .collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Singleton => write!(f, "singleton"),
            Family::Contamination { epsilon } => write!(f, "contamination({epsilon})"),
            Family::ContaminationUpto { epsilon } => write!(f, "contamination-upto({epsilon})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleRow {
    pub sample: u64,
    pub ci: bool,
    pub wci: String,
    pub cd: bool,
    pub fo: bool,
}

/// 95% Wilson score interval, rounded outward to multiples of 10⁻⁶.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frequency {
    pub count: usize,
    #[serde(with = "serde_rational")]
    pub frequency: Rational,
    #[serde(with = "serde_rational")]
    pub lower: Rational,
    #[serde(with = "serde_rational")]
    pub upper: Rational,
}

impl Frequency {
    pub fn new(count: usize, n: usize) -> Self {
        const Z: f64 = 1.959_963_984_540_054;
        const GRID: f64 = 1e6;
        let (k, nf) = (count as f64, n as f64);
        let p = k / nf;
        let denom = 1.0 + Z * Z / nf;
        let centre = (p + Z * Z / (2.0 * nf)) / denom;
        let half = Z * ((p * (1.0 - p) + Z * Z / (4.0 * nf)) / nf).sqrt() / denom;
        let lo = ((centre - half) * GRID).floor().max(0.0) as i64;
        let hi = ((centre + half) * GRID).ceil().min(GRID) as i64;
        Frequency {
            count,
            frequency: ratio(count as i64, n as i64),
            lower: ratio(lo, GRID as i64),
            upper: ratio(hi, GRID as i64),
        }
    }

    /// Strictly between zero and one.
    pub fn is_mixed(&self) -> bool {
        self.frequency.is_positive() && self.frequency < one()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyReport {
    pub states: usize,
    pub types: usize,
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub ci: Frequency,
    pub wci: Frequency,
    pub cd: Frequency,
    pub fo: Frequency,
    /// Samples where the weak search ran out of budget.
    pub wci_unknown: usize,
    #[serde(skip)]
    pub samples: Vec<SampleRow>,
}

impl FrequencyReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sample", "ci", "wci", "cd", "fo"]).expect("in-memory write");
        for r in &self.samples {
            w.write_record([
                r.sample.to_string(),
                r.ci.to_string(),
                r.wci.clone(),
                r.cd.to_string(),
                r.fo.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Classifies `n` seeded random collections; sample i depends only on
/// `(seed, i)`.
pub fn monte_carlo_frequencies(
    states: usize,
    types: usize,
    family: &Family,
    n: usize,
    seed: u64,
    budget: WciBudget,
) -> Result<FrequencyReport, LabError> {
    if n == 0 {
        return Err(LabError::NoSamples);
    }
    if types < 2 || states == 0 {
        return Err(LabError::TooFewCenters);
    }
    if let Some(e) = family.epsilon() {
        if e.is_negative() || e > &one() {
            return Err(LabError::InvalidEpsilon);
        }
    }
    let samples: Vec<Result<SampleRow, LabError>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let specs = family.draw(states, types, seed, i);
            let values = (1..=types as i64).map(int).collect();
            let inst = validate_instance(&ExtractionInstance::from_beliefs(specs, values))
                .map_err(|v| LabError::InvalidCenters(v[0].to_string()))?;
            let r = classify(&inst, budget, seed ^ i)?;
            Ok(SampleRow {
                sample: i,
                ci: r.convex_independence.holds,
                wci: r.weak_convex_independence.label().to_string(),
                cd: r.convex_dependence.holds,
                fo: r.fully_overlapping.holds,
            })
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>, _>>()?;
    let count = |f: fn(&SampleRow) -> bool| samples.iter().filter(|r| f(r)).count();
    Ok(FrequencyReport {
        states,
        types,
        family: family.clone(),
        n,
        seed,
        ci: Frequency::new(count(|r| r.ci), n),
        wci: Frequency::new(count(|r| r.wci == "holds"), n),
        cd: Frequency::new(count(|r| r.cd), n),
        fo: Frequency::new(count(|r| r.fo), n),
        wci_unknown: count(|r| r.wci == "unknown"),
        samples,
    })
}

/// Grid point where the share of pilot center sets that stay convex
/// independent is closest to one half, found by scanning each pilot set.
pub fn locate_split_epsilon(
    states: usize,
    types: usize,
    grid: &[Rational],
    pilots: usize,
    seed: u64,
) -> Result<Rational, LabError> {
    if pilots == 0 {
        return Err(LabError::NoSamples);
    }
    let budget = WciBudget {
        vertex_tuples: 0,
        random_selections: 0,
    };
    let mut holds = vec![0usize; grid.len()];
    for i in 0..pilots as u64 {
        let centers: Vec<Point> = Family::Singleton
            .draw(states, types, seed, i)
            .into_iter()
            .map(|s| s.center().expect("singleton").clone())
            .collect();
        let scan = scan_epsilon(&centers, grid, budget, seed)?;
        for (h, row) in holds.iter_mut().zip(&scan.rows) {
            *h += usize::from(row.ci);
        }
    }
    let best = holds
        .iter()
        .enumerate()
        .min_by_key(|&(_, &h)| (2 * h).abs_diff(pilots))
        .map(|(j, _)| j)
        .ok_or(LabError::InvalidGrid)?;
    Ok(grid[best].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Ci,
    Cd,
}

impl FromStr for WitnessKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ci" => Ok(WitnessKind::Ci),
            "cd" => Ok(WitnessKind::Cd),
            other => Err(format!("unknown witness kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerturbationCheck {
    pub index: u64,
    /// Largest Hausdorff distance between an original and a perturbed set.
    #[serde(with = "serde_rational")]
    pub distance: Rational,
    pub property_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenericityWitness {
    pub kind: WitnessKind,
    pub states: usize,
    pub collection: Vec<BeliefSpec>,
    #[serde(with = "serde_rational")]
    pub robustness_radius: Rational,
    /// ε of the construction: ball radius bracket end or inner ball radius.
    #[serde(with = "serde_rational_opt")]
    pub construction_epsilon: Option<Rational>,
    pub property_holds: bool,
    pub perturbations: Vec<PerturbationCheck>,
}

impl GenericityWitness {
    pub fn instance(&self) -> Instance {
        witness_instance(&self.collection).expect("witness collections are valid")
    }

    pub fn all_checks_pass(&self) -> bool {
        self.property_holds
            && self
                .perturbations
                .iter()
                .all(|p| p.property_holds && p.distance <= self.robustness_radius)
    }
}

fn witness_instance(collection: &[BeliefSpec]) -> Result<Instance, LabError> {
    let values = (1..=collection.len() as i64).map(int).collect();
    validate_instance(&ExtractionInstance::from_beliefs(collection.to_vec(), values))
        .map_err(|v| LabError::Infeasible(v[0].to_string()))
}

fn has_property(kind: WitnessKind, inst: &Instance) -> bool {
    match kind {
        WitnessKind::Ci => convex_independence_holds(inst),
        WitnessKind::Cd => crate::analysis::check_convex_dependence(inst).holds,
    }
}

/// Moves every vertex of `p` to a random point of the ℓ∞ ball of radius `r`
/// around it; the hull stays within Hausdorff distance `r`.
fn jitter<R: Rng>(rng: &mut R, p: &BeliefPolytope, r: &Rational) -> Vec<Point> {
    p.vertices()
        .iter()
        .map(|v| {
            let ball = realize(
                &BeliefSpec::Ball {
                    center: v.clone(),
                    radius: r.clone(),
                },
                v.dim(),
            )
            .expect("ball around a simplex point");
            random_point_in_hull(rng, ball.vertices())
        })
        .collect()
}

fn perturbation_checks(
    kind: WitnessKind,
    inst: &Instance,
    radius: &Rational,
    k: usize,
    seed: u64,
) -> Result<Vec<PerturbationCheck>, LabError> {
    (0..k as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng_for(seed, index);
            let perturbed: Vec<BeliefSpec> = inst
                .beliefs()
                .iter()
                .map(|p| BeliefSpec::Vertices {
                    vertices: jitter(&mut rng, p, radius),
                })
                .collect();
            let pinst = witness_instance(&perturbed)?;
            let distance = inst
                .beliefs()
                .iter()
                .zip(pinst.beliefs())
                .map(|(a, b)| hausdorff_distance(a, b).expect("same dimension"))
                .max()
                .expect("nonempty collection");
            Ok(PerturbationCheck {
                index,
                property_holds: &distance <= radius && has_property(kind, &pinst),
                distance,
            })
        })
        .collect()
}

/// Witness collection in the interior of the convex-independent or the
/// convex-dependent collections, with `k` seeded perturbation spot checks.
pub fn construct_generic_witnesses(
    kind: WitnessKind,
    states: usize,
    types: usize,
    k: usize,
    seed: u64,
) -> Result<GenericityWitness, LabError> {
    if types < 2 {
        return Err(LabError::Infeasible(format!("{kind:?} needs at least two types, got {types}")));
    }
    if states > MAX_BALL_STATES {
        return Err(LabError::Infeasible(format!(
            "perturbations use ball beliefs, limited to {MAX_BALL_STATES} states"
        )));
    }
    let (collection, epsilon, radius) = match kind {
        WitnessKind::Ci => {
            if states < types {
                return Err(LabError::Infeasible(format!(
                    "convex independent singletons need at least as many states as types ({states} < {types})"
                )));
            }
            let centers: Vec<Point> = (0..types).map(|s| Point::vertex_of_simplex(states, s)).collect();
            let bracket = ball_ci_threshold(&centers, &ratio(1, 64))?;
            let radius = &bracket.hi / int(2);
            if radius > bracket.lo {
                return Err(LabError::Infeasible("ball threshold bracket too wide".into()));
            }
            let collection = centers.into_iter().map(|point| BeliefSpec::Singleton { point }).collect();
            (collection, bracket.hi, radius)
        }
        WitnessKind::Cd => {
            // Largest ℓ∞ ball around the barycenter inside the simplex.
            let eps = ratio(1, states as i64);
            let inner = &eps / int(4);
            let mut collection = vec![BeliefSpec::Vertices {
                vertices: BeliefPolytope::simplex(states).vertices().to_vec(),
            }];
            collection.extend((1..types).map(|_| BeliefSpec::Ball {
                center: Point::barycenter(states),
                radius: inner.clone(),
            }));
            let radius = &eps / int(8);
            (collection, eps, radius)
        }
    };
    let inst = witness_instance(&collection)?;
    let property_holds = has_property(kind, &inst);
    let perturbations = perturbation_checks(kind, &inst, &radius, k, seed)?;
    Ok(GenericityWitness {
        kind,
        states,
        collection,
        robustness_radius: radius,
        construction_epsilon: Some(epsilon),
        property_holds,
        perturbations,
    })
}

/// Bisection on the radius of ℓ∞ balls around `centers`.
fn ball_ci_threshold(centers: &[Point], tolerance: &Rational) -> Result<Bracket, LabError> {
    let ci = |r: &Rational| -> Result<bool, LabError> {
        let specs = centers
            .iter()
            .map(|c| BeliefSpec::Ball {
                center: c.clone(),
                radius: r.clone(),
            })
            .collect::<Vec<_>>();
        Ok(convex_independence_holds(&witness_instance(&specs)?))
    };
    if !ci(&Rational::zero())? {
        return Err(LabError::CentersNotConvexIndependent);
    }
    let two = int(2);
    let (mut lo, mut hi) = (Rational::zero(), one());
    while &hi - &lo > *tolerance {
        let mid = (&lo + &hi) / &two;
        if ci(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

/// Exact dyadic `k / 2^bits`, used by tests and the CLI.
pub fn dyadic(k: u64, bits: u32) -> Rational {
    Rational::new(BigInt::from(k), BigInt::from(1u64) << bits)
}
