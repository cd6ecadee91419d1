//! Opportunity cost and payoff of accepting a request.
//!
//! The opportunity cost of reserving `ω_t` is the own-slice revenue the
//! bundle would have earned plus the discounted payments of future requests
//! that the reservation would block:
//!
//! ```text
//! C = q_pv(ω_t) + Σ_{τ=t}^{t_max-1} β^{τ-t+1} Σ_{ω ∈ G(ψ_τ)} [f(ω, G(ψ_τ)) - f(ω, G(ψ'_τ))] · p(ω, T*)
//! ```
//!
//! `ψ_τ` is the idle pool along the trajectory where the request is
//! declined and later requests are handled by the supplied strategy.
//! `ψ'_τ` is that pool with `ω_t` taken out: for every `τ` in non-expiring
//! models, and only while the contract would be active in expiring models.
//! If taking `ω_t` out would drive `ψ_τ` negative, nothing but the null
//! request fits. `T*` depends on [`PaymentVariant`].
//!
//! Three evaluators share this definition: exact enumeration of the
//! request tree, Monte Carlo over sampled trajectories, and the closed form
//! of the two-period model (which has its own, slightly different shape).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{feasible_set, FeasibleSet};
use crate::economics::{self, annuity_factor};
use crate::error::{Error, Result};
use crate::market::{MarketState, Mode, Request};
use crate::model::Model;
use crate::resource::ResourceVector;
use crate::stats::Summary;
use crate::stochastic::{conditional_measure_index, RequestStream};
use crate::strategy::StrategyDescriptor;

/// Which contract length prices the blocked requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaymentVariant {
    /// `p(ω, t_max - t)` (non-expiring) or `p(ω, T_t)` (expiring), fixed at
    /// the decision time for every `τ`.
    #[default]
    Literal,
    /// `p(ω, t_max - τ)`: the length a request blocked at `τ` would sign.
    RemainingHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcMethod {
    ClosedForm2step,
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcEstimate {
    pub value: f64,
    pub std_error: f64,
    pub sample_count: u64,
    pub method: OcMethod,
}

impl OcEstimate {
    pub fn exact(value: f64, method: OcMethod) -> Self {
        Self {
            value,
            std_error: 0.0,
            sample_count: 1,
            method,
        }
    }
}

/// Default cap on the number of leaves an exact enumeration may expand.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

fn two_step_check(model: &Model, pool: &ResourceVector, bundle: &ResourceVector) -> Result<()> {
    if model.catalog.bundle_index(bundle).is_none() {
        return Err(Error::UnknownBundle(bundle.clone()));
    }
    if !bundle.fits_in(pool) {
        return Err(Error::InfeasibleRequest {
            pool: pool.clone(),
            bundle: bundle.clone(),
        });
    }
    Ok(())
}

/// Opportunity cost of accepting `(pool, bundle, 2)` at `t = 0` in the
/// two-period model:
/// `(1+β) q(ω₀) + β Σ_ω [f(ω, Ω₀) - f(ω, G(ψ₀ - ω₀))] p(ω, 1)`.
///
/// Only the catalog, arrival measure and economics of `model` are used.
pub fn oc_two_step(model: &Model, pool: &ResourceVector, bundle: &ResourceVector) -> Result<f64> {
    two_step_check(model, pool, bundle)?;
    let beta = model.params.beta;
    let catalog = &model.catalog;
    let everything = FeasibleSet::all(catalog);
    let after = feasible_set(&pool.checked_sub(bundle)?, catalog);
    let mut blocked = 0.0;
    for (i, w) in catalog.bundles().iter().enumerate() {
        let df = conditional_measure_index(&model.dist, i, &everything)
            - conditional_measure_index(&model.dist, i, &after);
        if df != 0.0 {
            blocked += df * catalog.tariff(w, 1)?;
        }
    }
    Ok((1.0 + beta) * model.own_revenue(bundle) + beta * blocked)
}

/// `Γ₁ = (1+β) p(ω₀, 2) - C₁`.
pub fn payoff_two_step(model: &Model, pool: &ResourceVector, bundle: &ResourceVector) -> Result<f64> {
    let oc = oc_two_step(model, pool, bundle)?;
    let beta = model.params.beta;
    Ok((1.0 + beta) * model.catalog.tariff(bundle, 2)? - oc)
}

/// `Γ = pv_payments(ω_t, effective period) - oc`.
pub fn payoff(model: &Model, request: &Request, oc_value: f64) -> Result<f64> {
    if request.is_null() {
        return Ok(0.0);
    }
    let period = model.effective_period(request);
    Ok(economics::pv_payments(&request.bundle, period, &model.params, &model.catalog)? - oc_value)
}

/// Everything about a request the blocking sum needs, resolved once.
struct Candidate {
    time: u32,
    bundle: ResourceVector,
    period: u32,
    own_revenue_pv: f64,
}

impl Candidate {
    fn new(model: &Model, state: &MarketState, request: &Request) -> Result<Option<Self>> {
        if request.is_null() {
            return Ok(None);
        }
        if model.catalog.bundle_index(&request.bundle).is_none() {
            return Err(Error::UnknownBundle(request.bundle.clone()));
        }
        if !request.bundle.fits_in(state.idle_pool()) {
            return Err(Error::InfeasibleRequest {
                pool: state.idle_pool().clone(),
                bundle: request.bundle.clone(),
            });
        }
        let period = model.effective_period(request);
        Ok(Some(Self {
            time: state.time(),
            bundle: request.bundle.clone(),
            period,
            own_revenue_pv: economics::pv_own_revenue(&request.bundle, period, &model.params, &model.catalog),
        }))
    }

    /// Whether the reservation is still held at `tau`.
    fn holds_at(&self, mode: Mode, tau: u32) -> bool {
        match mode {
            Mode::NonExpiring => true,
            Mode::Expiring => tau < self.time + self.period,
        }
    }

    fn payment_period(&self, model: &Model, variant: PaymentVariant, tau: u32) -> u32 {
        match variant {
            PaymentVariant::Literal => self.period,
            PaymentVariant::RemainingHorizon => model.horizon - tau,
        }
    }

    /// Discounted blocked payments at `tau` given the declined-branch idle
    /// pool `pool`.
    fn blocking_at(&self, model: &Model, variant: PaymentVariant, tau: u32, pool: &ResourceVector) -> Result<f64> {
        if !self.holds_at(model.mode, tau) {
            return Ok(0.0);
        }
        let catalog = &model.catalog;
        let factual = feasible_set(pool, catalog);
        let counterfactual = match pool.checked_sub(&self.bundle) {
            Ok(p) => feasible_set(&p, catalog),
            Err(_) => FeasibleSet::null_only(catalog),
        };
        let period = self.payment_period(model, variant, tau);
        let mut sum = 0.0;
        for i in factual.indices() {
            let df = conditional_measure_index(&model.dist, i, &factual)
                - conditional_measure_index(&model.dist, i, &counterfactual);
            if df != 0.0 {
                sum += df * catalog.tariff(&catalog.bundles()[i], period)?;
            }
        }
        Ok(model.params.beta.powi((tau - self.time + 1) as i32) * sum)
    }

    fn value_along(&self, model: &Model, variant: PaymentVariant, pools: &[ResourceVector]) -> Result<f64> {
        let mut total = self.own_revenue_pv;
        for (k, pool) in pools.iter().enumerate() {
            total += self.blocking_at(model, variant, self.time + k as u32, pool)?;
        }
        Ok(total)
    }
}

/// Applies one arrival to a state that has already processed its expiries
/// at the current time, then advances the clock and processes the next
/// period's expiries.
pub(crate) fn transition(
    model: &Model,
    strategy: &StrategyDescriptor,
    state: &mut MarketState,
    request: &Request,
) -> Result<()> {
    let decision = strategy.decide(model, state, request)?;
    if decision.accepted {
        let payment = model.payment(request)?;
        state.admit(request.bundle.clone(), model.effective_period(request), payment)?;
    }
    state.advance();
    state.release_expired();
    Ok(())
}

/// The declined-branch idle pools `ψ_τ` for `τ = t, ..., t_max - 1`.
/// `draw(τ)` supplies the request arriving at `τ`.
fn declined_pools(
    model: &Model,
    strategy: &StrategyDescriptor,
    state: &MarketState,
    mut draw: impl FnMut(u32) -> Request,
) -> Result<Vec<ResourceVector>> {
    let t = state.time();
    let mut pools = Vec::with_capacity(model.horizon.saturating_sub(t) as usize);
    let mut s = state.clone();
    s.advance();
    s.release_expired();
    pools.push(state.idle_pool().clone());
    for tau in t + 1..model.horizon {
        pools.push(s.idle_pool().clone());
        // the last arrival cannot change any pool inside the horizon
        if tau + 1 < model.horizon {
            let r = draw(tau);
            transition(model, strategy, &mut s, &r)?;
        }
    }
    Ok(pools)
}

/// Number of leaves the exact request tree below `t` would have.
pub fn enumeration_leaves(model: &Model, t: u32) -> u128 {
    let levels = model.horizon.saturating_sub(t + 2);
    let branches = model.arrival_outcomes(0).len().max(1) as u128;
    let mut leaves: u128 = 1;
    for _ in 0..levels {
        leaves = leaves.saturating_mul(branches);
    }
    leaves
}

/// Exact expectation of the opportunity cost over every request sequence.
pub fn oc_exact_enumeration(
    model: &Model,
    state: &MarketState,
    request: &Request,
    strategy: &StrategyDescriptor,
    variant: PaymentVariant,
    budget: u128,
) -> Result<f64> {
    let Some(candidate) = Candidate::new(model, state, request)? else {
        return Ok(0.0);
    };
    let leaves = enumeration_leaves(model, state.time());
    if leaves > budget {
        return Err(Error::BudgetExceeded {
            what: "exact opportunity-cost enumeration",
            needed: leaves,
            budget,
        });
    }
    let blocking_now = candidate.blocking_at(model, variant, state.time(), state.idle_pool())?;
    let mut next = state.clone();
    next.advance();
    next.release_expired();
    let future = expected_blocking(model, strategy, &candidate, variant, &next)?;
    Ok(candidate.own_revenue_pv + blocking_now + future)
}

/// `E[Σ_{τ ≥ s.time} blocking_τ]` from a state whose expiries at its own
/// time are already processed.
fn expected_blocking(
    model: &Model,
    strategy: &StrategyDescriptor,
    candidate: &Candidate,
    variant: PaymentVariant,
    state: &MarketState,
) -> Result<f64> {
    let tau = state.time();
    if tau >= model.horizon {
        return Ok(0.0);
    }
    let here = candidate.blocking_at(model, variant, tau, state.idle_pool())?;
    if tau + 1 >= model.horizon {
        return Ok(here);
    }
    let mut future = 0.0;
    for (p, r) in model.arrival_outcomes(tau) {
        let mut s = state.clone();
        transition(model, strategy, &mut s, &r)?;
        future += p * expected_blocking(model, strategy, candidate, variant, &s)?;
    }
    Ok(here + future)
}

/// Monte Carlo estimate of the opportunity cost for several requests at the
/// same state. All requests are evaluated on the same sampled trajectories;
/// sample `k` uses stream `(seed, k)`.
pub fn oc_monte_carlo_many(
    model: &Model,
    state: &MarketState,
    requests: &[Request],
    strategy: &StrategyDescriptor,
    variant: PaymentVariant,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<OcEstimate>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let candidates = requests
        .iter()
        .map(|r| Candidate::new(model, state, r))
        .collect::<Result<Vec<_>>>()?;
    if candidates.iter().all(Option::is_none) {
        return Ok(requests
            .iter()
            .map(|_| OcEstimate {
                value: 0.0,
                std_error: 0.0,
                sample_count: n_samples,
                method: OcMethod::MonteCarlo,
            })
            .collect());
    }

    let samples: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut stream = RequestStream::new(seed, k);
            let pools = declined_pools(model, strategy, state, |tau| model.sample_request(&mut stream, tau))?;
            candidates
                .iter()
                .map(|c| match c {
                    Some(c) => c.value_along(model, variant, &pools),
                    None => Ok(0.0),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((0..requests.len())
        .map(|j| {
            let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
            let s = Summary::of(&column);
            OcEstimate {
                value: s.mean,
                std_error: s.std_error(),
                sample_count: n_samples,
                method: OcMethod::MonteCarlo,
            }
        })
        .collect())
}

/// Monte Carlo estimate of the opportunity cost of one request.
pub fn oc_monte_carlo(
    model: &Model,
    state: &MarketState,
    request: &Request,
    strategy: &StrategyDescriptor,
    variant: PaymentVariant,
    n_samples: u64,
    seed: u64,
) -> Result<OcEstimate> {
    oc_monte_carlo_many(model, state, std::slice::from_ref(request), strategy, variant, n_samples, seed)
        .map(|mut v| v.remove(0))
}

/// Crude upper bound on any opportunity cost: own revenue plus the largest
/// payment blocked in every remaining period.
pub fn oc_upper_bound(model: &Model, state: &MarketState, request: &Request) -> f64 {
    let period = model.effective_period(request);
    let remaining = model.horizon.saturating_sub(state.time());
    economics::pv_own_revenue(&request.bundle, period, &model.params, &model.catalog)
        + model.params.beta * annuity_factor(model.params.beta, remaining) * model.catalog.max_payment()
}
