//! Acceptance suite. Each test checks one criterion and prints a single
//! `criterion N [PASS|FAIL]` line to stderr (uncaptured).
//!
//! Suites 1 to 5 are computed once and shared with criteria 8 and 9.

use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use robust_extraction::analysis::{
    classify, convex_independence_holds, check_convex_independence, check_fully_overlapping,
    impossibility_certificate, selection_is_convex_independent, WciBudget, WeakConvexIndependence,
};
use robust_extraction::beliefs::{
    validate_instance, BeliefSpec, Criterion, DesignerSpec, ExtractionInstance, Instance,
};
use robust_extraction::geometry::{contains_point, linear_extremes, Point};
use robust_extraction::lab::{
    ci_epsilon_threshold, construct_generic_witnesses, grid, locate_split_epsilon, monte_carlo_frequencies, Family,
    WitnessKind,
};
use robust_extraction::rational::{int, one, ratio, Rational};
use robust_extraction::sampling::{dyadic_simplex_point, dyadic_unit, random_point_in_hull, rng_for};
use robust_extraction::synthesis::{
    default_margin, pooled_menu, synthesize_full_extraction, synthesize_weak_extraction, CertificateBundle, Contract,
    Menu, SynthesisError,
};
use robust_extraction::verification::{
    all_types, designer_report, mixed_optimal, optimal_choice, verify_extraction, verify_ic_ir, ExtractionKind,
};

const SEED: u64 = 0x5eed_2024;
const MENUS_PER_INSTANCE: usize = 1_000;

/// Criteria run one at a time, and suite 1 is always built first, so the
/// timed phase of criterion 1 neither shares the CPU nor runs in a heap
/// already holding the other suites.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    let guard = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    suite1();
    guard
}

fn line(n: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {n} [{verdict}] {title}: {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn note(n: u32, text: &str) {
    let _ = writeln!(std::io::stderr().lock(), "criterion {n} note: {text}");
}

struct Case {
    inst: Instance,
    menus: Vec<Menu>,
}

struct Suite {
    pass: bool,
    detail: String,
    cases: Vec<Case>,
}

// ---------- independent oracles (vertex evaluation written out here) ----------

fn cost(c: &Contract, p: &Point) -> Rational {
    c.0.iter().zip(p.coords()).map(|(a, b)| a * b).sum()
}

fn contract<'a>(menu: &'a Menu, inst: &Instance, t: usize) -> &'a Contract {
    menu.contract(inst.name(t)).expect("menu covers the instance")
}

/// Robust IR with tightness and robust reverse IC, at every vertex.
fn oracle_full(menu: &Menu, inst: &Instance) -> bool {
    (0..inst.type_count()).all(|t| {
        let verts = inst.belief(t).vertices();
        let v = inst.value(t);
        let own: Vec<Rational> = verts.iter().map(|p| cost(contract(menu, inst, t), p)).collect();
        own.iter().all(|x| x <= v)
            && own.iter().any(|x| x == v)
            && (0..inst.type_count())
                .filter(|&s| s != t)
                .all(|s| verts.iter().all(|p| &cost(contract(menu, inst, s), p) >= v))
    })
}

/// Robust IC over all types: no vertex of Π(t) prefers another contract.
fn oracle_ic(menu: &Menu, inst: &Instance) -> bool {
    (0..inst.type_count()).all(|t| {
        inst.belief(t).vertices().iter().all(|p| {
            let own = cost(contract(menu, inst, t), p);
            (0..inst.type_count()).all(|s| own <= cost(contract(menu, inst, s), p))
        })
    })
}

fn oracle_ir(menu: &Menu, inst: &Instance) -> bool {
    (0..inst.type_count()).all(|t| {
        inst.belief(t)
            .vertices()
            .iter()
            .all(|p| &cost(contract(menu, inst, t), p) <= inst.value(t))
    })
}

/// Mixed optimality: the cheapest mixture at a belief is a pure contract, so
/// compare against the menu minimum at each vertex.
fn oracle_mixed_optimal(menu: &Menu, inst: &Instance, t: usize) -> bool {
    inst.belief(t).vertices().iter().all(|p| {
        let own = cost(contract(menu, inst, t), p);
        menu.contracts.values().all(|c| own <= cost(c, p))
    })
}

// ---------- generators ----------

fn random_value(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(0..40), rng.gen_range(1..5))
}

fn random_centers(rng: &mut ChaCha8Rng, states: usize, types: usize) -> Vec<Point> {
    (0..types).map(|_| dyadic_simplex_point(rng, states)).collect()
}

fn instance(specs: Vec<BeliefSpec>, values: Vec<Rational>) -> Instance {
    validate_instance(&ExtractionInstance::from_beliefs(specs, values)).expect("generated instance is valid")
}

fn random_contract(rng: &mut ChaCha8Rng, states: usize, lo: i64, hi: i64) -> Contract {
    Contract((0..states).map(|_| ratio(rng.gen_range(lo..=hi), rng.gen_range(1..4))).collect())
}

/// c(t) = v(t)·𝟙 + z − max_{Π(t)} π·z, so robust IR is tight by construction.
fn tight_contract(rng: &mut ChaCha8Rng, inst: &Instance, t: usize) -> Contract {
    let z = random_contract(rng, inst.states(), -4, 4);
    let max = linear_extremes(inst.belief(t), &z.0).unwrap().max;
    Contract(z.0.iter().map(|x| x - &max + inst.value(t)).collect())
}

fn random_menus(rng: &mut ChaCha8Rng, inst: &Instance, count: usize) -> Vec<Menu> {
    (0..count)
        .map(|i| {
            let contracts = (0..inst.type_count())
                .map(|t| {
                    if i % 2 == 0 {
                        tight_contract(rng, inst, t)
                    } else {
                        random_contract(rng, inst.states(), -3, 8)
                    }
                })
                .collect();
            Menu::for_instance(inst, contracts)
        })
        .collect()
}

/// Menus with at least two distinct contracts; half of them perturb a single
/// type away from an otherwise pooled menu.
fn non_constant_menus(rng: &mut ChaCha8Rng, inst: &Instance, count: usize) -> Vec<Menu> {
    let n = inst.type_count();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let contracts: Vec<Contract> = if out.len() % 2 == 0 {
            (0..n).map(|_| random_contract(rng, inst.states(), -3, 8)).collect()
        } else {
            let base = random_contract(rng, inst.states(), -3, 8);
            let mut cs = vec![base.clone(); n];
            let t = rng.gen_range(0..n);
            let j = rng.gen_range(0..inst.states());
            let step = ratio(if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..100));
            cs[t].0[j] += step;
            cs
        };
        if contracts.windows(2).any(|w| w[0] != w[1]) {
            out.push(Menu::for_instance(inst, contracts));
        }
    }
    out
}

/// Contaminations of random centers at ε ∈ [3/4, 1] that overlap pairwise in
/// full dimension.
fn fully_overlapping_instance(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let k = rng.gen_range(2..=4);
        let eps = ratio(3, 4) + ratio(1, 4) * dyadic_unit(rng);
        let specs = random_centers(rng, k, k)
            .into_iter()
            .map(|c| BeliefSpec::contamination(c, eps.clone()))
            .collect();
        let values = (0..k).map(|_| random_value(rng)).collect();
        let inst = instance(specs, values);
        if check_fully_overlapping(&inst).holds {
            return inst;
        }
    }
}

fn lowest_type(inst: &Instance) -> usize {
    (0..inst.type_count())
        .reduce(|a, b| if inst.value(b) < inst.value(a) { b } else { a })
        .unwrap()
}

// ---------- suites ----------

fn suite1() -> &'static Suite {
    static S: OnceLock<Suite> = OnceLock::new();
    S.get_or_init(|| {
        let mut instances = Vec::new();
        for i in 0..200u64 {
            let mut rng = rng_for(SEED, 1_000 + i);
            let k = 2 + (i % 4) as usize;
            let centers = loop {
                let c = random_centers(&mut rng, k, k);
                let singles = c.iter().map(|p| BeliefSpec::Singleton { point: p.clone() }).collect();
                if convex_independence_holds(&instance(singles, vec![int(0); k])) {
                    break c;
                }
            };
            let values: Vec<Rational> = (0..k).map(|_| random_value(&mut rng)).collect();
            let specs = if i < 100 {
                centers.into_iter().map(|point| BeliefSpec::Singleton { point }).collect()
            } else {
                let mut tol = ratio(1, 64);
                let eps = loop {
                    let b = ci_epsilon_threshold(&centers, &tol).unwrap();
                    if b.lo.is_positive() {
                        break b.lo;
                    }
                    tol /= int(16);
                };
                centers.into_iter().map(|c| BeliefSpec::contamination(c, eps.clone())).collect()
            };
            instances.push(instance(specs, values));
        }

        let start = Instant::now();
        let mut failures = Vec::new();
        let mut cases = Vec::new();
        for (i, inst) in instances.into_iter().enumerate() {
            match synthesize_full_extraction(&inst, &default_margin()) {
                Ok(menu) => {
                    let verified = verify_extraction(&menu, &inst, ExtractionKind::Full).unwrap().holds;
                    let algebra = matches!(&menu.certificate, Some(CertificateBundle::Full(c)) if c.matches(&menu, &inst));
                    if !verified || !algebra || !oracle_full(&menu, &inst) {
                        failures.push(format!("#{i} does not verify"));
                    }
                    cases.push(Case { inst, menus: vec![menu] });
                }
                Err(e) => failures.push(format!("#{i}: {e}")),
            }
        }
        let elapsed = start.elapsed();
        let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
        Suite {
            pass: ok,
            detail: format!(
                "{}/200 synthesized menus verify (100 singleton, 100 contaminated below threshold) in {:.1}s (limit 60s){}",
                200 - failures.len(),
                elapsed.as_secs_f64(),
                failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
            ),
            cases,
        }
    })
}

fn suite2() -> &'static Suite {
    static S: OnceLock<Suite> = OnceLock::new();
    S.get_or_init(|| {
        let mut cases = Vec::new();
        let mut failures = Vec::new();
        let mut index = 0u64;
        while cases.len() < 100 {
            index += 1;
            let mut rng = rng_for(SEED, 2_000 + index);
            let k = rng.gen_range(2..=4);
            let eps = ratio(1, 4) + ratio(3, 4) * dyadic_unit(&mut rng);
            let specs = random_centers(&mut rng, k, k)
                .into_iter()
                .map(|c| BeliefSpec::contamination(c, eps.clone()))
                .collect();
            let values = (0..k).map(|_| random_value(&mut rng)).collect();
            let inst = instance(specs, values);
            let report = classify(&inst, WciBudget::default(), index).unwrap();
            let WeakConvexIndependence::Holds { selection, .. } = report.weak_convex_independence else {
                continue;
            };
            if report.convex_independence.holds {
                continue;
            }
            let inside = selection
                .iter()
                .enumerate()
                .all(|(t, p)| contains_point(inst.belief(t), p).unwrap().is_inside());
            assert!(inside && selection_is_convex_independent(&selection));
            match synthesize_weak_extraction(&inst, Some(selection.clone()), WciBudget::default(), index, &default_margin())
            {
                Ok(menu) => {
                    let verified = verify_extraction(&menu, &inst, ExtractionKind::Weak).unwrap().holds;
                    // At the selected beliefs: own contract costs v(t), others at least v(t).
                    let oracle = selection.iter().enumerate().all(|(t, p)| {
                        cost(contract(&menu, &inst, t), p) == *inst.value(t)
                            && (0..inst.type_count()).all(|s| cost(contract(&menu, &inst, s), p) >= *inst.value(t))
                    });
                    if !verified || !oracle {
                        failures.push(format!("instance {index}"));
                    }
                    cases.push(Case { inst, menus: vec![menu] });
                }
                Err(e) => {
                    failures.push(format!("instance {index}: {e}"));
                    cases.push(Case { inst, menus: vec![] });
                }
            }
        }
        Suite {
            pass: failures.is_empty(),
            detail: format!(
                "{}/100 weak menus from verified selections pass weak verification (all instances fail convex independence){}",
                100 - failures.len(),
                failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
            ),
            cases,
        }
    })
}

fn suite3() -> &'static Suite {
    static S: OnceLock<Suite> = OnceLock::new();
    S.get_or_init(|| {
        let mut cases = Vec::new();
        let mut problems = Vec::new();
        let mut full_counterexamples = 0usize;
        let mut optimal_counterexamples = 0usize;
        for i in 0..100u64 {
            let mut rng = rng_for(SEED, 3_000 + i);
            let states = rng.gen_range(2..=4);
            let types = rng.gen_range(2..=4);
            let t0 = rng.gen_range(0..types);
            let big = BeliefSpec::contamination(
                dyadic_simplex_point(&mut rng, states),
                ratio(1, 2) + ratio(1, 2) * dyadic_unit(&mut rng),
            );
            let big_poly = robust_extraction::beliefs::realize(&big, states).unwrap();
            let base = random_value(&mut rng);
            let specs: Vec<BeliefSpec> = (0..types)
                .map(|t| {
                    if t == t0 {
                        big.clone()
                    } else {
                        let m = rng.gen_range(1..=2);
                        BeliefSpec::Vertices {
                            vertices: (0..m).map(|_| random_point_in_hull(&mut rng, big_poly.vertices())).collect(),
                        }
                    }
                })
                .collect();
            let values: Vec<Rational> = (0..types)
                .map(|t| if t == t0 { base.clone() } else { &base + ratio(rng.gen_range(1..20), 4) })
                .collect();
            let inst = instance(specs, values);

            match impossibility_certificate(&inst) {
                Some(cert) if cert.verify(&inst) => {}
                _ => problems.push(format!("instance {i}: no impossibility certificate")),
            }
            match synthesize_full_extraction(&inst, &default_margin()) {
                Err(SynthesisError::ConvexIndependenceFails { .. }) => {}
                other => problems.push(format!("instance {i}: full synthesis returned {other:?}")),
            }
            let mut menus = random_menus(&mut rng, &inst, MENUS_PER_INSTANCE);
            menus.push(pooled_menu(&inst, &all_types(&inst)).unwrap());
            if let Ok(m) = synthesize_weak_extraction(&inst, None, WciBudget::default(), i, &default_margin()) {
                menus.push(m);
            }
            for menu in &menus {
                if verify_extraction(menu, &inst, ExtractionKind::Full).unwrap().holds || oracle_full(menu, &inst) {
                    full_counterexamples += 1;
                }
                if verify_extraction(menu, &inst, ExtractionKind::Optimal).unwrap().holds {
                    optimal_counterexamples += 1;
                }
            }
            cases.push(Case { inst, menus });
        }
        let tested: usize = cases.iter().map(|c| c.menus.len()).sum();
        Suite {
            pass: problems.is_empty() && full_counterexamples == 0 && optimal_counterexamples == 0,
            detail: format!(
                "100 convex-dependent instances, {} certificate/synthesis problems; {tested} menus ({MENUS_PER_INSTANCE} random per instance plus pooled and weak attempts): {full_counterexamples} pass full extraction, {optimal_counterexamples} pass optimal extraction{}",
                problems.len(),
                problems.first().map(|f| format!("; first problem {f}")).unwrap_or_default()
            ),
            cases,
        }
    })
}

fn suite4() -> &'static Suite {
    static S: OnceLock<Suite> = OnceLock::new();
    S.get_or_init(|| {
        let mut cases = Vec::new();
        let mut ic_counterexamples = 0usize;
        let mut pooled_failures = 0usize;
        for i in 0..100u64 {
            let mut rng = rng_for(SEED, 4_000 + i);
            let inst = fully_overlapping_instance(&mut rng);
            let all = all_types(&inst);
            let mut menus = non_constant_menus(&mut rng, &inst, MENUS_PER_INSTANCE);
            for menu in &menus {
                if verify_ic_ir(menu, &inst, &all).unwrap().ic || oracle_ic(menu, &inst) {
                    ic_counterexamples += 1;
                }
            }
            let pooled = pooled_menu(&inst, &all).unwrap();
            let r = verify_ic_ir(&pooled, &inst, &all).unwrap();
            if !(r.ic && r.ir && oracle_ic(&pooled, &inst) && oracle_ir(&pooled, &inst)) {
                pooled_failures += 1;
            }
            menus.push(pooled);
            cases.push(Case { inst, menus });
        }
        Suite {
            pass: ic_counterexamples == 0 && pooled_failures == 0,
            detail: format!(
                "100 fully overlapping instances: {ic_counterexamples} of {} non-constant menus pass IC; {pooled_failures} constant min-value menus fail IC or IR",
                100 * MENUS_PER_INSTANCE
            ),
            cases,
        }
    })
}

fn suite5() -> &'static Suite {
    static S: OnceLock<Suite> = OnceLock::new();
    S.get_or_init(|| {
        let mut cases = Vec::new();
        let mut over_bound = 0usize;
        let mut pooled_misses = 0usize;
        let mut icir_menus = 0usize;
        let mut not_applicable = 0usize;
        for i in 0..100u64 {
            let mut rng = rng_for(SEED, 5_000 + i);
            let base = fully_overlapping_instance(&mut rng);
            let t1 = lowest_type(&base);
            let at_t1 = random_point_in_hull(&mut rng, base.belief(t1).vertices());
            let designer = if i % 2 == 0 {
                DesignerSpec {
                    belief: BeliefSpec::Singleton { point: at_t1 },
                    criterion: Criterion::Expected,
                }
            } else {
                let other = dyadic_simplex_point(&mut rng, base.states());
                DesignerSpec {
                    belief: BeliefSpec::Vertices {
                        vertices: vec![at_t1, other],
                    },
                    criterion: Criterion::Maxmin,
                }
            };
            let inst = validate_instance(&base.spec().clone().with_designer(designer)).unwrap();
            let all = all_types(&inst);

            let mut menus = vec![pooled_menu(&inst, &all).unwrap()];
            // One contract for everybody, shifted down until IR binds.
            for _ in 0..40 {
                let c = random_contract(&mut rng, inst.states(), -6, 6);
                let excess = (0..inst.type_count())
                    .map(|t| linear_extremes(inst.belief(t), &c.0).unwrap().max - inst.value(t))
                    .max()
                    .unwrap();
                let shifted = Contract(c.0.iter().map(|x| x - &excess).collect());
                menus.push(Menu::for_instance(&inst, vec![shifted; inst.type_count()]));
            }
            menus.extend(random_menus(&mut rng, &inst, 60));

            let mut kept = Vec::new();
            for (j, menu) in menus.into_iter().enumerate() {
                let r = designer_report(&menu, &inst, &all).unwrap();
                if !(r.ic && r.ir) {
                    continue;
                }
                icir_menus += 1;
                if !r.bound_applies {
                    not_applicable += 1;
                }
                if r.revenue > r.bound {
                    over_bound += 1;
                }
                if j == 0 && r.revenue != r.bound {
                    pooled_misses += 1;
                }
                kept.push(menu);
            }
            cases.push(Case { inst, menus: kept });
        }
        Suite {
            pass: over_bound == 0 && pooled_misses == 0 && not_applicable == 0 && icir_menus > 100,
            detail: format!(
                "100 concurrence instances (50 expected, 50 maxmin): {icir_menus} sampled IC+IR menus, {over_bound} exceed |T*|·v(t1), {pooled_misses} pooled menus miss the bound, {not_applicable} without the bound's premises"
            ),
            cases,
        }
    })
}

fn report_suite(n: u32, title: &str, suite: &Suite) {
    line(n, title, suite.pass, &suite.detail);
}

#[test]
fn criterion_1_full_extraction_round_trip() {
    let _serial = serial();
    report_suite(1, "full extraction round trip", suite1());
}

#[test]
fn criterion_2_weak_extraction_round_trip() {
    let _serial = serial();
    report_suite(2, "weak extraction round trip", suite2());
}

#[test]
fn criterion_3_convex_dependence_blocks_extraction() {
    let _serial = serial();
    report_suite(3, "convex dependence blocks full extraction", suite3());
}

#[test]
fn criterion_4_full_overlap_forces_pooling() {
    let _serial = serial();
    report_suite(4, "full overlap forces constant menus", suite4());
}

#[test]
fn criterion_5_pooled_revenue_bound() {
    let _serial = serial();
    report_suite(5, "revenue bound under concurrence", suite5());
}

#[test]
fn criterion_6_epsilon_threshold() {
    let _serial = serial();
    let centers = [Point::vertex_of_simplex(2, 0), Point::vertex_of_simplex(2, 1)];
    let b = ci_epsilon_threshold(&centers, &ratio(1, 64)).unwrap();
    // Closed form: first coordinates cover [1-ε, 1] and [0, ε], disjoint iff ε < 1/2.
    let closed_form = b.contains(&ratio(1, 2)) && b.width() <= ratio(1, 64);

    let mut bad = 0;
    for i in 0..50u64 {
        let mut rng = rng_for(SEED, 6_000 + i);
        let k = rng.gen_range(2..=4);
        let centers = loop {
            let c = random_centers(&mut rng, k, k);
            let singles = c.iter().map(|p| BeliefSpec::Singleton { point: p.clone() }).collect();
            if convex_independence_holds(&instance(singles, vec![int(0); k])) {
                break c;
            }
        };
        let b = ci_epsilon_threshold(&centers, &ratio(1, 64)).unwrap();
        let at = |e: &Rational| {
            let specs = centers.iter().map(|c| BeliefSpec::contamination(c.clone(), e.clone())).collect();
            check_convex_independence(&instance(specs, (1..=k as i64).map(int).collect())).holds
        };
        if !(at(&b.lo) && !at(&b.hi)) {
            bad += 1;
        }
    }
    line(
        6,
        "epsilon threshold",
        closed_form && bad == 0,
        &format!(
            "orthogonal centers bracket [{}, {}] (contains 1/2: {}, width ≤ 1/64: {}); {bad}/50 random center sets violate CI at lo / not-CI at hi",
            b.lo,
            b.hi,
            b.contains(&ratio(1, 2)),
            b.width() <= ratio(1, 64)
        ),
    );
}

#[test]
fn criterion_7_neither_generic() {
    let _serial = serial();
    let mut witness_ok = true;
    let mut witness_notes = Vec::new();
    for (kind, states, types) in [
        (WitnessKind::Ci, 2, 2),
        (WitnessKind::Ci, 3, 3),
        (WitnessKind::Cd, 2, 2),
        (WitnessKind::Cd, 3, 3),
    ] {
        let w = construct_generic_witnesses(kind, states, types, 20, SEED).unwrap();
        let ok = w.all_checks_pass() && w.perturbations.len() == 20;
        witness_ok &= ok;
        witness_notes.push(format!("{kind:?} {states}x{types} radius {} {}", w.robustness_radius, if ok { "ok" } else { "broken" }));
    }

    let scan_grid = grid(&ratio(1, 32), &ratio(31, 32), &ratio(1, 32)).unwrap();
    let eps = locate_split_epsilon(3, 3, &scan_grid, 40, SEED).unwrap();
    let family = Family::Contamination { epsilon: eps.clone() };
    let mc = monte_carlo_frequencies(3, 3, &family, 1_000, SEED, WciBudget::default()).unwrap();
    let mixed = mc.ci.is_mixed() && mc.cd.is_mixed();

    let upto = Family::ContaminationUpto { epsilon: one() };
    let mc_upto = monte_carlo_frequencies(3, 3, &upto, 1_000, SEED, WciBudget::default()).unwrap();
    note(
        7,
        &format!(
            "per-type ε family {upto}: ci_freq {} cd_freq {} (n = 1000)",
            mc_upto.ci.frequency, mc_upto.cd.frequency
        ),
    );

    line(
        7,
        "robust witnesses and mixed frequencies",
        witness_ok && mixed,
        &format!(
            "witnesses [{}]; {family} located by scan, n = 1000: ci_freq {} cd_freq {} (both required strictly inside (0,1))",
            witness_notes.join(", "),
            mc.ci.frequency,
            mc.cd.frequency
        ),
    );
}

#[test]
fn criterion_8_implication_lattice() {
    let _serial = serial();
    let suites = [suite1(), suite2(), suite3(), suite4(), suite5()];
    let (mut pairs, mut violations) = (0usize, Vec::new());
    for (k, suite) in suites.iter().enumerate() {
        for case in &suite.cases {
            let inst = &case.inst;
            for menu in &case.menus {
                pairs += 1;
                let full = verify_extraction(menu, inst, ExtractionKind::Full).unwrap().holds;
                let optimal = verify_extraction(menu, inst, ExtractionKind::Optimal).unwrap().holds;
                if full && !optimal {
                    violations.push(format!("suite {}: full without optimal", k + 1));
                }
                if full && !verify_extraction(menu, inst, ExtractionKind::Weak).unwrap().holds {
                    violations.push(format!("suite {}: full without weak", k + 1));
                }
                if optimal && !verify_extraction(menu, inst, ExtractionKind::Maximal).unwrap().holds {
                    violations.push(format!("suite {}: optimal without maximal", k + 1));
                }
                let contracts: Vec<Contract> =
                    (0..inst.type_count()).map(|t| contract(menu, inst, t).clone()).collect();
                for t in 0..inst.type_count() {
                    let mixed = mixed_optimal(t, &contracts, inst.belief(t)).unwrap();
                    let pure = optimal_choice(t, &contracts, inst.belief(t)).unwrap();
                    if mixed != pure {
                        violations.push(format!("suite {}: mixed optimality differs from optimality", k + 1));
                    }
                    if mixed != oracle_mixed_optimal(menu, inst, t) {
                        violations.push(format!("suite {}: mixed optimality disagrees with the oracle", k + 1));
                    }
                    if optimal && !mixed {
                        violations.push(format!("suite {}: optimal extraction without mixed optimality", k + 1));
                    }
                }
            }
        }
    }
    line(
        8,
        "verifier implication lattice",
        violations.is_empty(),
        &format!(
            "{pairs} instance/menu pairs from suites 1-5, {} violations of full⇒optimal⇒maximal, full⇒weak, mixed-optimal⇔optimal{}",
            violations.len(),
            violations.first().map(|v| format!("; first {v}")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_9_singleton_reduction() {
    let _serial = serial();
    let mut checked = 0;
    let mut broken = 0;
    for case in suite1().cases.iter().filter(|c| c.inst.beliefs().iter().all(|b| b.is_singleton())) {
        let inst = &case.inst;
        let menu = &case.menus[0];
        let belief = |t: usize| &inst.belief(t).vertices()[0];
        let ok = (0..inst.type_count()).all(|t| {
            cost(contract(menu, inst, t), belief(t)) == *inst.value(t)
                && (0..inst.type_count())
                    .filter(|&s| s != t)
                    .all(|s| cost(contract(menu, inst, t), belief(s)) > *inst.value(s))
        });
        checked += 1;
        if !ok {
            broken += 1;
        }
    }
    let mc = monte_carlo_frequencies(3, 3, &Family::Singleton, 1_000, SEED, WciBudget::default()).unwrap();
    let freq_ok = mc.ci.frequency == one();
    line(
        9,
        "singleton reduction",
        checked == 100 && broken == 0 && freq_ok && mc.ci.count == 1_000 && !mc.cd.frequency.is_positive() && mc.cd.frequency.is_zero(),
        &format!(
            "{}/{checked} singleton menus meet π(t)·c(t) = v(t) and π(s)·c(t) > v(s) exactly; singleton ci_freq {} (n = 1000, |S| = |T| = 3)",
            checked - broken,
            mc.ci.frequency
        ),
    );
}
