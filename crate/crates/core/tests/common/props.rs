//! Property checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestCaseError, TestRunner};
use slice_admission::catalog::feasible_set;
use slice_admission::opportunity_cost::{
    oc_exact_enumeration, oc_monte_carlo, oc_monte_carlo_many, oc_upper_bound, payoff, PaymentVariant,
};
use slice_admission::simulator::{self, RequestSource};
use slice_admission::stochastic::conditional_measure;
use slice_admission::opportunity_cost::OcMethod;
use slice_admission::strategy::{OcSettings, StateKey, StrategyDescriptor};
use slice_admission::{MarketState, Model, Request, ResourceVector};

use super::{random_inst, rng, Inst};

pub const CASES: u32 = 1000;

pub fn runner() -> TestRunner {
    TestRunner::new(PtConfig {
        cases: CASES,
        failure_persistence: None,
        ..PtConfig::default()
    })
}

pub fn instance(seed: u64, t_max: u32, expiring: bool) -> (Inst, Model) {
    let inst = random_inst(&mut rng(seed), 4, t_max, expiring);
    let model = inst.model();
    (inst, model)
}

pub fn strategy(k: u8) -> StrategyDescriptor {
    match k % 3 {
        0 => StrategyDescriptor::AlwaysAccept,
        1 => StrategyDescriptor::NeverAccept,
        _ => StrategyDescriptor::PriceThreshold { min_payment: 2.0 },
    }
}

fn exact_settings() -> OcSettings {
    OcSettings {
        method: OcMethod::Enumeration,
        ..OcSettings::default()
    }
}

/// A state reached by `steps` sampled periods under always-accept.
fn reached(model: &Model, seed: u64, steps: u32) -> MarketState {
    let mut s = model.initial_state();
    let mut stream = slice_admission::stochastic::RequestStream::new(seed, 99);
    for t in 0..steps.min(model.horizon.saturating_sub(1)) {
        let r = model.sample_request(&mut stream, t);
        s = simulator::step(model, &s, &r, &StrategyDescriptor::AlwaysAccept).unwrap().0;
        s.release_expired();
    }
    s
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

pub fn conservation(seed: u64, t_max: u32, expiring: bool, k: u8) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, t_max, expiring);
    let (run, events) = simulator::run(&model, &strategy(k), &RequestSource::Sampled { seed, stream: 0 }).unwrap();
    for e in &events {
        ensure(e.idle_pool.add(&e.reserved) == model.initial_pool, format!("at t={}: {e:?}", e.time))?;
    }
    ensure(run.final_state.is_consistent(), "final state inconsistent")
}

pub fn monotone_pool(seed: u64, t_max: u32, k: u8) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, t_max, false);
    let (_, events) = simulator::run(&model, &strategy(k), &RequestSource::Sampled { seed, stream: 1 }).unwrap();
    let mut prev = model.initial_pool.clone();
    for e in &events {
        ensure(e.idle_pool.fits_in(&prev), format!("pool grew at t={}", e.time))?;
        prev = e.idle_pool.clone();
    }
    Ok(())
}

pub fn f_sums_to_one(seed: u64, pool_units: Vec<u32>) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, 2, false);
    let catalog = &model.catalog;
    let dim = model.dimension();
    let res = catalog.lattice().resolution;
    let pool = ResourceVector::from_units(pool_units.iter().cycle().take(dim).map(|u| u % (res + 1)).collect());
    let set = feasible_set(&pool, catalog);
    let total: f64 = catalog
        .bundles()
        .iter()
        .map(|b| conditional_measure(catalog, &model.dist, b, &set).unwrap())
        .sum();
    ensure((total - 1.0).abs() < 1e-12, format!("sum {total}"))?;
    let full = feasible_set(&catalog.lattice().full(), catalog);
    for (i, b) in catalog.bundles().iter().enumerate() {
        let f = conditional_measure(catalog, &model.dist, b, &full).unwrap();
        ensure((f - model.dist.marginal()[i]).abs() < 1e-12, "f differs from g on the full pool")?;
    }
    Ok(())
}

pub fn null_costs_nothing(seed: u64, steps: u32, expiring: bool) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, 4, expiring);
    let s = reached(&model, seed, steps);
    let r = Request::null(s.time(), model.dimension());
    let f = StrategyDescriptor::AlwaysAccept;
    let e = oc_exact_enumeration(&model, &s, &r, &f, PaymentVariant::Literal, 1_000_000).unwrap();
    let m = oc_monte_carlo(&model, &s, &r, &f, PaymentVariant::RemainingHorizon, 4, seed).unwrap();
    ensure(e == 0.0 && m.value == 0.0, format!("{e} {}", m.value))
}

pub fn decide_coherence(seed: u64, steps: u32, expiring: bool, pick: usize) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, 4, expiring);
    let s = reached(&model, seed, steps);
    let offers = model.offers_at(s.time());
    let r = &offers[pick % offers.len()];
    let f = StrategyDescriptor::oc_optimal_on_demand(StrategyDescriptor::AlwaysAccept, exact_settings(), model.horizon);
    let d = f.decide(&model, &s, r).unwrap();
    if !model.is_admissible(&s, r) {
        return ensure(!d.accepted && d.payoff.is_none(), "inadmissible request accepted");
    }
    let oc = oc_exact_enumeration(
        &model,
        &s,
        r,
        &StrategyDescriptor::AlwaysAccept,
        PaymentVariant::Literal,
        1_000_000,
    )
    .unwrap();
    let gamma = payoff(&model, r, oc).unwrap();
    ensure(d.oc == Some(oc) && d.payoff == Some(gamma), "decision used another cost")?;
    ensure(d.accepted == (gamma >= 0.0), format!("accepted={} with Γ={gamma}", d.accepted))?;
    ensure(oc <= oc_upper_bound(&model, &s, r) + 1e-9, "cost above the crude bound")
}

/// Same `(t, idle)` reached through different ledgers gives the same key,
/// cost and decision in non-expiring mode.
pub fn markov_key(seed: u64, t: u32, pick: usize) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, 4, false);
    let t = 1 + t % (model.horizon - 1);
    let bundles: Vec<ResourceVector> = model.catalog.bundles()[1..]
        .iter()
        .filter(|b| b.fits_in(&model.initial_pool))
        .cloned()
        .collect();
    if bundles.is_empty() {
        return Ok(());
    }
    let b = bundles[pick % bundles.len()].clone();
    let mut early = model.initial_state();
    early.admit(b.clone(), model.horizon, 1.0).unwrap();
    for _ in 0..t {
        early.advance();
    }
    let mut late = model.initial_state();
    for _ in 0..t - 1 {
        late.advance();
    }
    late.admit(b, model.horizon - (t - 1), 5.0).unwrap();
    late.advance();
    ensure(StateKey::of(&model, &early) == StateKey::of(&model, &late), "keys differ")?;
    let f = StrategyDescriptor::AlwaysAccept;
    for r in model.offers_at(t) {
        if !model.is_admissible(&early, &r) {
            continue;
        }
        let a = oc_exact_enumeration(&model, &early, &r, &f, PaymentVariant::Literal, 1_000_000).unwrap();
        let c = oc_exact_enumeration(&model, &late, &r, &f, PaymentVariant::Literal, 1_000_000).unwrap();
        ensure(a == c, format!("{a} vs {c}"))?;
        let g = StrategyDescriptor::oc_optimal_on_demand(f.clone(), exact_settings(), model.horizon);
        ensure(
            g.decide(&model, &early, &r).unwrap().accepted == g.decide(&model, &late, &r).unwrap().accepted,
            "decisions differ",
        )?;
    }
    Ok(())
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

pub fn thread_determinism(seed: u64, expiring: bool, k: u8) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, 4, expiring);
    let strategies = vec![("s".to_string(), strategy(k)), ("a".to_string(), StrategyDescriptor::AlwaysAccept)];
    let src = RequestSource::Sampled { seed, stream: 3 };
    let init = model.initial_state();
    let offers: Vec<Request> = model.offers_at(0).into_iter().filter(|r| model.is_admissible(&init, r)).collect();
    let one = with_threads(1, || {
        (
            simulator::run(&model, &strategy(k), &src).unwrap(),
            simulator::evaluate(&model, &strategies, 8, seed).unwrap(),
            oc_monte_carlo_many(&model, &init, &offers, &strategy(k), PaymentVariant::Literal, 16, seed)
                .unwrap(),
        )
    });
    let many = with_threads(4, || {
        (
            simulator::run(&model, &strategy(k), &src).unwrap(),
            simulator::evaluate(&model, &strategies, 8, seed).unwrap(),
            oc_monte_carlo_many(&model, &init, &offers, &strategy(k), PaymentVariant::Literal, 16, seed)
                .unwrap(),
        )
    });
    ensure(one.0 == many.0, "trace differs")?;
    ensure(one.1 == many.1 && one.1.profits == many.1.profits, "evaluation differs")?;
    ensure(one.2 == many.2, "estimates differ")
}

/// With never-accept fixing the trajectory, a larger bundle never blocks less.
pub fn monotone_blocking(seed: u64, pick: (usize, usize)) -> Result<(), TestCaseError> {
    let (_, model) = instance(seed, 3, false);
    let s = model.initial_state();
    let offers: Vec<Request> = model.offers_at(0).into_iter().filter(|r| model.is_admissible(&s, r)).collect();
    if offers.is_empty() {
        return Ok(());
    }
    let (a, b) = (&offers[pick.0 % offers.len()], &offers[pick.1 % offers.len()]);
    if !a.bundle.fits_in(&b.bundle) {
        return Ok(());
    }
    let f = StrategyDescriptor::NeverAccept;
    let blocking = |r: &Request| {
        let oc = oc_exact_enumeration(&model, &s, r, &f, PaymentVariant::Literal, 1000).unwrap();
        oc - slice_admission::economics::pv_own_revenue(&r.bundle, model.effective_period(r), &model.params, &model.catalog)
    };
    ensure(blocking(a) <= blocking(b) + 1e-9, "blocking fell for a larger bundle")
}

/// Library enumeration agrees with the independent oracle.
pub fn enumeration_matches_oracle(seed: u64, expiring: bool, k: u8, pick: usize) -> Result<(), TestCaseError> {
    let t_max = 2 + (seed % 3) as u32;
    let (inst, model) = instance(seed, t_max, expiring);
    let fixed = match k % 3 {
        0 => super::Fixed::Always,
        1 => super::Fixed::Never,
        _ => super::Fixed::Threshold(2.0),
    };
    let s = model.initial_state();
    let offers = model.offers_at(0);
    let r = &offers[pick % offers.len()];
    if !r.bundle.fits_in(s.idle_pool()) {
        return Ok(());
    }
    let b = inst.bundles.iter().position(|(u, _)| u.as_slice() == r.bundle.units()).unwrap();
    let want = super::oc(&inst, fixed, &super::St::initial(&inst), b, r.period);
    let got = oc_exact_enumeration(&model, &s, r, &strategy(k), PaymentVariant::Literal, 1_000_000).unwrap();
    ensure((want - got).abs() <= 1e-9 * want.abs().max(1.0), format!("{got} vs oracle {want}"))
}

pub fn dp_matches_oracle(seed: u64, expiring: bool) -> Result<(), TestCaseError> {
    let t_max = 1 + (seed % 4) as u32;
    let (inst, model) = instance(seed, t_max, expiring);
    let want = super::dp(&inst, &super::St::initial(&inst));
    let got = slice_admission::oracle::dp_solve(&model, 100_000).unwrap().v0();
    ensure((want - got).abs() <= 1e-9 * want.abs().max(1.0), format!("{got} vs oracle {want}"))
}

/// Runs every structural property with `CASES` generated cases each and
/// returns `(name, outcome)` pairs.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    macro_rules! check {
        ($strategy:expr, $f:expr) => {
            runner().run(&$strategy, $f).map_err(|e| e.to_string())
        };
    }
    vec![
        (
            "conservation",
            check!((any::<u64>(), 1u32..7, any::<bool>(), any::<u8>()), |(s, t, e, k)| conservation(s, t, e, k)),
        ),
        (
            "non-expiring monotonicity",
            check!((any::<u64>(), 1u32..7, any::<u8>()), |(s, t, k)| monotone_pool(s, t, k)),
        ),
        (
            "f sums to one and equals g on the full pool",
            check!((any::<u64>(), proptest::collection::vec(0u32..12, 2)), |(s, p)| f_sums_to_one(s, p)),
        ),
        (
            "oc(null) = 0",
            check!((any::<u64>(), 0u32..4, any::<bool>()), |(s, n, e)| null_costs_nothing(s, n, e)),
        ),
        (
            "decide = (payoff >= 0)",
            check!((any::<u64>(), 0u32..4, any::<bool>(), any::<usize>()), |(s, n, e, p)| {
                decide_coherence(s, n, e, p)
            }),
        ),
        (
            "markov key in non-expiring mode",
            check!((any::<u64>(), any::<u32>(), any::<usize>()), |(s, t, p)| markov_key(s, t, p)),
        ),
        (
            "determinism across thread counts",
            check!((any::<u64>(), any::<bool>(), any::<u8>()), |(s, e, k)| thread_determinism(s, e, k)),
        ),
    ]
}
