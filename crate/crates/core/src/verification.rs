//! Checks menus against the extraction, incentive and choice definitions.
//!
//! Every universally quantified belief condition is linear in π, so it is
//! checked at the vertices of the belief polytope; existential conditions
//! become LPs over vertex weights.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::analysis::pairwise_dimensions;
use crate::beliefs::{Criterion, Instance};
use crate::geometry::{common_point, contains_point, linear_extremes, BeliefPolytope, Point};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::rational::{int, one, serde_rational, serde_rational_opt, Rational};
use crate::synthesis::{Contract, Menu};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerificationError {
    #[error("menu has no contract for type {0}")]
    MissingContract(String),
    #[error("menu names type {0}, which the instance does not have")]
    UnknownType(String),
    #[error("contract for type {type_name} has {got} payments, expected {expected}")]
    ContractLength {
        type_name: String,
        expected: usize,
        got: usize,
    },
    #[error("contract index {index} out of range for a menu of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("instance has no designer")]
    MissingDesigner,
    #[error("the expected-revenue criterion needs a single designer belief")]
    ExpectedNeedsPoint,
    #[error("pooled set is empty")]
    EmptyPool,
}

/// Contracts of `menu` in instance type order.
pub fn contracts_for<'m>(menu: &'m Menu, inst: &Instance) -> Result<Vec<&'m Contract>, VerificationError> {
    if let Some(extra) = menu.contracts.keys().find(|k| inst.index_of(k).is_none()) {
        return Err(VerificationError::UnknownType(extra.clone()));
    }
    inst.names()
        .map(|name| {
            let c = menu
                .contract(name)
                .ok_or_else(|| VerificationError::MissingContract(name.to_string()))?;
            if c.0.len() != inst.states() {
                return Err(VerificationError::ContractLength {
                    type_name: name.to_string(),
                    expected: inst.states(),
                    got: c.0.len(),
                });
            }
            Ok(c)
        })
        .collect()
}

fn resolve_pool(inst: &Instance, pool: &[String]) -> Result<Vec<usize>, VerificationError> {
    if pool.is_empty() {
        return Err(VerificationError::EmptyPool);
    }
    pool.iter()
        .map(|n| inst.index_of(n).ok_or_else(|| VerificationError::UnknownType(n.clone())))
        .collect()
}

pub fn all_types(inst: &Instance) -> Vec<String> {
    inst.names().map(str::to_string).collect()
}

fn extremes(p: &BeliefPolytope, c: &Contract) -> crate::geometry::Extremes {
    linear_extremes(p, &c.0).expect("contract lengths checked")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IcViolation {
    #[serde(rename = "type")]
    pub type_name: String,
    pub deviation: String,
    pub belief: Point,
    /// Saving π·(c(t) − c(s)) > 0 from the deviation.
    #[serde(with = "serde_rational")]
    pub gain: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrViolation {
    #[serde(rename = "type")]
    pub type_name: String,
    pub belief: Point,
    #[serde(with = "serde_rational")]
    pub cost: Rational,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IcIrReport {
    pub ic: bool,
    pub ic_violation: Option<IcViolation>,
    pub ir: bool,
    pub ir_violation: Option<IrViolation>,
}

/// Robust IC and IR restricted to the types in `pool`.
pub fn verify_ic_ir(menu: &Menu, inst: &Instance, pool: &[String]) -> Result<IcIrReport, VerificationError> {
    let idx = resolve_pool(inst, pool)?;
    let contracts = contracts_for(menu, inst)?;
    let mut ic_violation = None;
    'ic: for &t in &idx {
        for &s in &idx {
            if s == t || contracts[s] == contracts[t] {
                continue;
            }
            let diff = Contract(contracts[t].0.iter().zip(&contracts[s].0).map(|(a, b)| a - b).collect());
            let ex = extremes(inst.belief(t), &diff);
            if ex.max.is_positive() {
                ic_violation = Some(IcViolation {
                    type_name: inst.name(t).to_string(),
                    deviation: inst.name(s).to_string(),
                    belief: ex.argmax,
                    gain: ex.max,
                });
                break 'ic;
            }
        }
    }
    let ir_violation = idx.iter().find_map(|&t| {
        let ex = extremes(inst.belief(t), contracts[t]);
        (ex.max > *inst.value(t)).then(|| IrViolation {
            type_name: inst.name(t).to_string(),
            belief: ex.argmax,
            cost: ex.max,
            value: inst.value(t).clone(),
        })
    });
    Ok(IcIrReport {
        ic: ic_violation.is_none(),
        ic_violation,
        ir: ir_violation.is_none(),
        ir_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionKind {
    Full,
    Weak,
    Optimal,
    Maximal,
}

impl std::str::FromStr for ExtractionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(ExtractionKind::Full),
            "weak" => Ok(ExtractionKind::Weak),
            "optimal" => Ok(ExtractionKind::Optimal),
            "maximal" => Ok(ExtractionKind::Maximal),
            other => Err(format!("unknown extraction kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum ExtractionFailure {
    /// Some belief charges more than the value.
    NotIndividuallyRational {
        #[serde(rename = "type")]
        type_name: String,
        belief: Point,
        #[serde(with = "serde_rational")]
        cost: Rational,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// No belief pays exactly the value.
    NotTight {
        #[serde(rename = "type")]
        type_name: String,
        #[serde(with = "serde_rational")]
        min_cost: Rational,
        #[serde(with = "serde_rational")]
        max_cost: Rational,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// Some belief makes another type's contract cost less than the value.
    ReverseIcViolated {
        #[serde(rename = "type")]
        type_name: String,
        other: String,
        belief: Point,
        #[serde(with = "serde_rational")]
        cost: Rational,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// No single belief satisfies the equality and all inequalities.
    NoJointBelief {
        #[serde(rename = "type")]
        type_name: String,
    },
    NotOptimal {
        #[serde(rename = "type")]
        type_name: String,
        better: String,
        belief: Point,
    },
    NotMaximal {
        #[serde(rename = "type")]
        type_name: String,
        dominating: MixedStrategy,
        #[serde(with = "serde_rational")]
        delta: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractionReport {
    pub kind: ExtractionKind,
    pub holds: bool,
    pub failures: Vec<ExtractionFailure>,
    /// For weak extraction: the belief per type solving the joint system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Point>>,
}

/// Belief in Π(t) with π·c(t) = v(t) and π·c(s) ≥ v(t) for every s ≠ t.
fn joint_belief(inst: &Instance, t: usize, contracts: &[&Contract]) -> Option<Point> {
    let verts = inst.belief(t).vertices();
    let k = verts.len();
    let mut lp = LinearProgram::new(k);
    lp.constrain(vec![one(); k], Relation::Eq, one());
    for (s, c) in contracts.iter().enumerate() {
        let row = verts.iter().map(|v| c.cost(v)).collect();
        let rel = if s == t { Relation::Eq } else { Relation::Ge };
        lp.constrain(row, rel, inst.value(t).clone());
    }
    let sol = lp.solve().optimal()?;
    Some(crate::geometry::ConvexCombinationWitness { weights: sol.x }.combine(verts))
}

fn tightness(inst: &Instance, t: usize, c: &Contract, robust_ir: bool, failures: &mut Vec<ExtractionFailure>) {
    let ex = extremes(inst.belief(t), c);
    let v = inst.value(t);
    if robust_ir && ex.max > *v {
        failures.push(ExtractionFailure::NotIndividuallyRational {
            type_name: inst.name(t).to_string(),
            belief: ex.argmax.clone(),
            cost: ex.max.clone(),
            value: v.clone(),
        });
    } else if ex.min > *v || ex.max < *v {
        failures.push(ExtractionFailure::NotTight {
            type_name: inst.name(t).to_string(),
            min_cost: ex.min,
            max_cost: ex.max,
            value: v.clone(),
        });
    }
}

pub fn verify_extraction(menu: &Menu, inst: &Instance, kind: ExtractionKind) -> Result<ExtractionReport, VerificationError> {
    let contracts = contracts_for(menu, inst)?;
    let mut failures = Vec::new();
    let mut witnesses = Vec::new();
    for t in 0..inst.type_count() {
        let name = inst.name(t).to_string();
        match kind {
            ExtractionKind::Full => {
                tightness(inst, t, contracts[t], true, &mut failures);
                for s in (0..inst.type_count()).filter(|&s| s != t) {
                    let ex = extremes(inst.belief(t), contracts[s]);
                    if ex.min < *inst.value(t) {
                        failures.push(ExtractionFailure::ReverseIcViolated {
                            type_name: name.clone(),
                            other: inst.name(s).to_string(),
                            belief: ex.argmin,
                            cost: ex.min,
                            value: inst.value(t).clone(),
                        });
                    }
                }
            }
            ExtractionKind::Weak => match joint_belief(inst, t, &contracts) {
                Some(p) => witnesses.push(p),
                None => failures.push(ExtractionFailure::NoJointBelief { type_name: name }),
            },
            ExtractionKind::Optimal => {
                if let Some((better, belief)) = first_cheaper(inst.belief(t), &contracts, contracts[t]) {
                    failures.push(ExtractionFailure::NotOptimal {
                        type_name: name,
                        better: inst.name(better).to_string(),
                        belief,
                    });
                }
                tightness(inst, t, contracts[t], true, &mut failures);
            }
            ExtractionKind::Maximal => {
                let dom = mixed_domination(inst.belief(t), &contracts, contracts[t]);
                if dom.delta.is_positive() {
                    failures.push(ExtractionFailure::NotMaximal {
                        type_name: name,
                        dominating: dom.sigma,
                        delta: dom.delta,
                    });
                }
                tightness(inst, t, contracts[t], false, &mut failures);
            }
        }
    }
    Ok(ExtractionReport {
        kind,
        holds: failures.is_empty(),
        failures,
        witnesses: (kind == ExtractionKind::Weak && witnesses.len() == inst.type_count()).then_some(witnesses),
    })
}

/// First menu contract strictly cheaper than `chosen` at some vertex.
fn first_cheaper(belief: &BeliefPolytope, menu: &[&Contract], chosen: &Contract) -> Option<(usize, Point)> {
    for v in belief.vertices() {
        let own = chosen.cost(v);
        if let Some(i) = menu.iter().position(|c| c.cost(v) < own) {
            return Some((i, v.clone()));
        }
    }
    None
}

/// Weights over menu contracts, indexed by position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixedStrategy {
    #[serde(with = "crate::rational::serde_rational_vec")]
    pub weights: Vec<Rational>,
}

struct Domination {
    delta: Rational,
    sigma: MixedStrategy,
}

/// Largest δ such that some mixture costs at least δ less than `chosen` at
/// every vertex.
fn mixed_domination(belief: &BeliefPolytope, menu: &[&Contract], chosen: &Contract) -> Domination {
    let k = menu.len();
    let delta = k;
    let mut lp = LinearProgram::new(k + 1);
    lp.set_free(delta);
    let mut sum = vec![one(); k];
    sum.push(Rational::zero());
    lp.constrain(sum, Relation::Eq, one());
    for v in belief.vertices() {
        let mut row: Vec<Rational> = menu.iter().map(|c| c.cost(v)).collect();
        row.push(one());
        lp.constrain(row, Relation::Le, chosen.cost(v));
    }
    let mut obj = vec![Rational::zero(); k];
    obj.push(one());
    lp.set_objective(Sense::Maximize, obj);
    let sol = lp
        .solve()
        .optimal()
        .expect("mixture LP is feasible and bounded by the menu's cost spread");
    let mut weights = sol.x;
    weights.truncate(k);
    Domination {
        delta: sol.value,
        sigma: MixedStrategy { weights },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChoiceStatus {
    pub optimal: bool,
    pub maximal: bool,
    pub mixed_optimal: bool,
    pub mixed_maximal: bool,
    /// Best uniform saving a mixture achieves against the contract.
    #[serde(with = "serde_rational")]
    pub domination_margin: Rational,
}

/// `menu[index]` is weakly cheaper than every menu contract at every belief.
pub fn optimal_choice(index: usize, menu: &[Contract], belief: &BeliefPolytope) -> Result<bool, VerificationError> {
    let chosen = menu.get(index).ok_or(VerificationError::IndexOutOfRange {
        index,
        len: menu.len(),
    })?;
    let refs: Vec<&Contract> = menu.iter().collect();
    Ok(first_cheaper(belief, &refs, chosen).is_none())
}

/// `menu[index]` is optimal against every mixture over the menu. A linear
/// cost is minimized over mixtures at a pure contract, so this compares each
/// vertex against the cheapest contract there.
pub fn mixed_optimal(index: usize, menu: &[Contract], belief: &BeliefPolytope) -> Result<bool, VerificationError> {
    let chosen = menu.get(index).ok_or(VerificationError::IndexOutOfRange {
        index,
        len: menu.len(),
    })?;
    Ok(belief.vertices().iter().all(|v| {
        let own = chosen.cost(v);
        menu.iter().map(|c| c.cost(v)).all(|c| own <= c)
    }))
}

/// Choice properties of `menu[index]` for a type holding `belief`.
pub fn choice_status(index: usize, menu: &[Contract], belief: &BeliefPolytope) -> Result<ChoiceStatus, VerificationError> {
    let chosen = menu.get(index).ok_or(VerificationError::IndexOutOfRange {
        index,
        len: menu.len(),
    })?;
    let refs: Vec<&Contract> = menu.iter().collect();
    let optimal = first_cheaper(belief, &refs, chosen).is_none();
    let maximal = !menu
        .iter()
        .any(|c| belief.vertices().iter().all(|v| c.cost(v) < chosen.cost(v)));
    let mixed_optimal = mixed_optimal(index, menu, belief)?;
    // An optimal contract is undominated with margin exactly zero.
    let delta = if optimal {
        Rational::zero()
    } else {
        mixed_domination(belief, &refs, chosen).delta
    };
    Ok(ChoiceStatus {
        optimal,
        maximal,
        mixed_optimal,
        mixed_maximal: !delta.is_positive(),
        domination_margin: delta,
    })
}

/// Choice status of each type's own contract within the menu.
pub fn menu_choice_status(menu: &Menu, inst: &Instance) -> Result<Vec<ChoiceStatus>, VerificationError> {
    let contracts: Vec<Contract> = contracts_for(menu, inst)?.into_iter().cloned().collect();
    (0..inst.type_count())
        .map(|t| choice_status(t, &contracts, inst.belief(t)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolingReport {
    pub consistent: bool,
    pub ic: bool,
    /// Pairs whose beliefs overlap in full dimension.
    pub overlapping_pairs: Vec<(String, String)>,
    /// An IC menu separating an overlapping pair; never expected.
    pub violation: Option<(String, String)>,
}

pub fn pooling_check(menu: &Menu, inst: &Instance) -> Result<PoolingReport, VerificationError> {
    let contracts = contracts_for(menu, inst)?;
    let ic = verify_ic_ir(menu, inst, &all_types(inst))?.ic;
    let full = inst.states() as i64 - 1;
    let dims = pairwise_dimensions(inst);
    let mut overlapping_pairs = Vec::new();
    let mut violation = None;
    for a in 0..inst.type_count() {
        for b in a + 1..inst.type_count() {
            if dims[a][b] == full {
                let pair = (inst.name(a).to_string(), inst.name(b).to_string());
                if ic && contracts[a] != contracts[b] && violation.is_none() {
                    violation = Some(pair.clone());
                }
                overlapping_pairs.push(pair);
            }
        }
    }
    Ok(PoolingReport {
        consistent: violation.is_none(),
        ic,
        overlapping_pairs,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesignerReport {
    pub criterion: Criterion,
    pub lowest_type: String,
    pub concurrence: bool,
    /// Expected revenue, or guaranteed revenue under maxmin.
    #[serde(with = "serde_rational")]
    pub revenue: Rational,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub ic: bool,
    pub ir: bool,
    pub fully_overlapping: bool,
    /// The bound is claimed only with concurrence, IC, IR and full overlap on the pool.
    pub bound_applies: bool,
    #[serde(with = "serde_rational_opt")]
    pub slack: Option<Rational>,
    pub within_bound: bool,
}

pub fn designer_report(menu: &Menu, inst: &Instance, pool: &[String]) -> Result<DesignerReport, VerificationError> {
    let (designer, criterion) = inst.designer().ok_or(VerificationError::MissingDesigner)?;
    let idx = resolve_pool(inst, pool)?;
    let contracts = contracts_for(menu, inst)?;
    let lowest = idx
        .iter()
        .copied()
        .reduce(|a, b| if inst.value(b) < inst.value(a) { b } else { a })
        .expect("pool is nonempty");
    let total = Contract(
        (0..inst.states())
            .map(|j| idx.iter().map(|&t| contracts[t].0[j].clone()).sum())
            .collect(),
    );
    let (revenue, concurrence) = match criterion {
        Criterion::Expected => {
            if !designer.is_singleton() {
                return Err(VerificationError::ExpectedNeedsPoint);
            }
            let pd = &designer.vertices()[0];
            let inside = contains_point(inst.belief(lowest), pd).expect("validated").is_inside();
            (total.cost(pd), inside)
        }
        Criterion::Maxmin => {
            let meet = common_point(designer, inst.belief(lowest)).expect("validated").is_some();
            (extremes(designer, &total).min, meet)
        }
    };
    let bound = int(idx.len() as i64) * inst.value(lowest);
    let icir = verify_ic_ir(menu, inst, pool)?;
    let full = inst.states() as i64 - 1;
    let dims = pairwise_dimensions(inst);
    let fully_overlapping = idx.iter().all(|&a| idx.iter().all(|&b| a == b || dims[a][b] == full));
    let bound_applies = concurrence && icir.ic && icir.ir && fully_overlapping;
    let within_bound = revenue <= bound;
    Ok(DesignerReport {
        criterion,
        lowest_type: inst.name(lowest).to_string(),
        concurrence,
        slack: bound_applies.then(|| &bound - &revenue),
        revenue,
        bound,
        ic: icir.ic,
        ir: icir.ir,
        fully_overlapping,
        bound_applies,
        within_bound,
    })
}

impl DesignerReport {
    /// False only when the bound applies and is exceeded.
    pub fn consistent(&self) -> bool {
        !self.bound_applies || self.within_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::{validate_instance, BeliefSpec, DesignerSpec, ExtractionInstance};
    use crate::rational::ratio;
    use crate::synthesis::{default_margin, pooled_menu, synthesize_full_extraction};

    fn e(dim: usize, s: usize) -> Point {
        Point::vertex_of_simplex(dim, s)
    }

    fn c(xs: &[i64]) -> Contract {
        Contract(xs.iter().map(|&x| int(x)).collect())
    }

    fn i1() -> Instance {
        validate_instance(&ExtractionInstance::singletons(vec![e(2, 0), e(2, 1)], vec![int(1), int(2)])).unwrap()
    }

    fn contaminated(eps: Rational) -> ExtractionInstance {
        ExtractionInstance::contaminations(vec![e(2, 0), e(2, 1)], &eps, vec![int(1), int(2)])
    }

    fn menu(inst: &Instance, cs: &[&[i64]]) -> Menu {
        Menu::for_instance(inst, cs.iter().map(|x| c(x)).collect())
    }

    #[test]
    fn ic_ir_examples() {
        let inst = i1();
        let all = all_types(&inst);
        let r = verify_ic_ir(&menu(&inst, &[&[1, 3], &[3, 2]]), &inst, &all).unwrap();
        assert!(r.ic && r.ir);
        let r = verify_ic_ir(&menu(&inst, &[&[1, 1], &[1, 1]]), &inst, &all).unwrap();
        assert!(r.ic && r.ir);
        let r = verify_ic_ir(&menu(&inst, &[&[0, 0], &[-1, -1]]), &inst, &all).unwrap();
        assert!(!r.ic);
        let v = r.ic_violation.unwrap();
        assert_eq!((v.type_name.as_str(), v.deviation.as_str()), ("t1", "t2"));
        assert_eq!(v.gain, int(1));
    }

    #[test]
    fn missing_contract_is_an_error() {
        let inst = i1();
        let mut m = menu(&inst, &[&[1, 3], &[3, 2]]);
        m.contracts.shift_remove("t2");
        assert_eq!(
            verify_extraction(&m, &inst, ExtractionKind::Full),
            Err(VerificationError::MissingContract("t2".into()))
        );
    }

    #[test]
    fn extraction_examples() {
        let inst = i1();
        let m = menu(&inst, &[&[1, 3], &[3, 2]]);
        for kind in [ExtractionKind::Full, ExtractionKind::Weak, ExtractionKind::Optimal, ExtractionKind::Maximal] {
            assert!(verify_extraction(&m, &inst, kind).unwrap().holds, "{kind:?}");
        }

        let overlap = validate_instance(&contaminated(ratio(3, 4))).unwrap();
        let m = menu(&overlap, &[&[1, 3], &[3, 2]]);
        let weak = verify_extraction(&m, &overlap, ExtractionKind::Weak).unwrap();
        assert!(weak.holds);
        assert_eq!(weak.witnesses.unwrap(), vec![e(2, 0), e(2, 1)]);
        let full = verify_extraction(&m, &overlap, ExtractionKind::Full).unwrap();
        assert!(!full.holds);
        assert!(full
            .failures
            .iter()
            .any(|f| matches!(f, ExtractionFailure::ReverseIcViolated { .. })));

        let pooled = menu(&inst, &[&[1, 1], &[1, 1]]);
        let r = verify_extraction(&pooled, &inst, ExtractionKind::Full).unwrap();
        assert!(r
            .failures
            .iter()
            .any(|f| matches!(f, ExtractionFailure::NotTight { type_name, .. } if type_name == "t2")));
    }

    #[test]
    fn choice_examples() {
        let single = BeliefPolytope::singleton(e(2, 0)).unwrap();
        let s = choice_status(0, &[c(&[1, 3]), c(&[3, 2])], &single).unwrap();
        assert!(s.optimal && s.maximal && s.mixed_optimal && s.mixed_maximal);

        let delta = BeliefPolytope::simplex(2);
        let s = choice_status(0, &[c(&[0, 2]), c(&[2, 0])], &delta).unwrap();
        assert!(s.maximal && s.mixed_maximal);
        assert!(!s.optimal && !s.mixed_optimal);

        let s = choice_status(0, &[c(&[5, -1])], &delta).unwrap();
        assert!(s.optimal && s.maximal && s.mixed_optimal && s.mixed_maximal);
        assert!(choice_status(1, &[c(&[5, -1])], &delta).is_err());
    }

    #[test]
    fn mixtures_can_dominate_where_pure_contracts_do_not() {
        // At (1,0) and (0,1) the 50/50 mixture of (0,4),(4,0) costs 2 < 3.
        let delta = BeliefPolytope::simplex(2);
        let s = choice_status(2, &[c(&[0, 4]), c(&[4, 0]), c(&[3, 3])], &delta).unwrap();
        assert!(s.maximal);
        assert!(!s.mixed_maximal);
        assert_eq!(s.domination_margin, int(1));
    }

    #[test]
    fn pooling_examples() {
        let fo = validate_instance(&contaminated(ratio(3, 4))).unwrap();
        let r = pooling_check(&menu(&fo, &[&[1, 1], &[1, 1]]), &fo).unwrap();
        assert!(r.consistent && r.ic);
        assert_eq!(r.overlapping_pairs.len(), 1);

        let r = pooling_check(&menu(&fo, &[&[1, 3], &[3, 2]]), &fo).unwrap();
        assert!(!r.ic && r.consistent);

        let inst = i1();
        let r = pooling_check(&menu(&inst, &[&[1, 3], &[3, 2]]), &inst).unwrap();
        assert!(r.consistent && r.overlapping_pairs.is_empty());
    }

    #[test]
    fn designer_examples() {
        let with = |inst: ExtractionInstance, belief: BeliefSpec, criterion: Criterion| {
            validate_instance(&inst.with_designer(DesignerSpec { belief, criterion })).unwrap()
        };
        let fo = with(
            contaminated(ratio(3, 4)),
            BeliefSpec::Singleton {
                point: Point::barycenter(2),
            },
            Criterion::Expected,
        );
        let all = all_types(&fo);
        let pooled = pooled_menu(&fo, &all).unwrap();
        let r = designer_report(&pooled, &fo, &all).unwrap();
        assert!(r.concurrence && r.bound_applies && r.within_bound);
        assert_eq!((r.revenue.clone(), r.bound.clone()), (int(2), int(2)));

        let i1d = with(
            ExtractionInstance::singletons(vec![e(2, 0), e(2, 1)], vec![int(1), int(2)]),
            BeliefSpec::Singleton { point: e(2, 0) },
            Criterion::Expected,
        );
        let m = synthesize_full_extraction(&i1d, &default_margin()).unwrap();
        let r = designer_report(&m, &i1d, &all).unwrap();
        assert_eq!(r.revenue, int(4));
        assert!(r.concurrence && !r.bound_applies && r.consistent());

        let mm = with(
            ExtractionInstance::singletons(vec![e(2, 0), e(2, 1)], vec![int(1), int(2)]),
            BeliefSpec::Vertices {
                vertices: vec![e(2, 0), e(2, 1)],
            },
            Criterion::Maxmin,
        );
        let r = designer_report(&pooled_menu(&mm, &all).unwrap(), &mm, &all).unwrap();
        assert_eq!(r.revenue, int(2));

        let bad = with(
            contaminated(ratio(3, 4)),
            BeliefSpec::Vertices {
                vertices: vec![e(2, 0), e(2, 1)],
            },
            Criterion::Expected,
        );
        assert_eq!(
            designer_report(&pooled, &bad, &all),
            Err(VerificationError::ExpectedNeedsPoint)
        );
        assert_eq!(designer_report(&pooled, &i1(), &all), Err(VerificationError::MissingDesigner));
    }
}
