//! Exact ground truth for tiny instances.
//!
//! [`dp_solve`] runs backward induction over every reachable state and
//! yields the policy that maximizes expected realized profit, measured
//! exactly as [`crate::simulator::run`] measures it. [`two_step_enumerate`]
//! expands the two-period model by hand.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::economics::{self, annuity_factor};
use crate::error::{Error, Result};
use crate::learner::reachable_states;
use crate::market::{MarketState, Mode, Request};
use crate::model::Model;
use crate::opportunity_cost::payoff_two_step;
use crate::resource::ResourceVector;
use crate::strategy::{StateKey, TableKey};

/// Default cap on `(time, state)` pairs the DP may visit.
pub const DEFAULT_DP_BUDGET: usize = 1_000_000;
/// Longest horizon the expiring-mode DP accepts.
pub const EXPIRING_DP_MAX_HORIZON: u32 = 6;

/// Optimal values and decisions. Keys carry the time.
#[derive(Debug, Clone, PartialEq)]
pub struct DpPolicy {
    pub values: HashMap<StateKey, f64>,
    pub decisions: BTreeMap<TableKey, bool>,
    pub initial_key: StateKey,
}

impl DpPolicy {
    /// `V(0, ψ₀)`: the best achievable expected discounted profit.
    pub fn v0(&self) -> f64 {
        self.values[&self.initial_key]
    }

    pub fn value(&self, key: &StateKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn accepts(&self, key: &TableKey) -> Option<bool> {
        self.decisions.get(key).copied()
    }
}

/// Value of each branch of one arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValues {
    pub decline: f64,
    /// `None` when the request cannot be accepted.
    pub accept: Option<f64>,
}

impl BranchValues {
    pub fn best(&self) -> f64 {
        match self.accept {
            Some(a) if a >= self.decline => a,
            _ => self.decline,
        }
    }

    pub fn accepts(&self) -> bool {
        self.accept.is_some_and(|a| a >= self.decline)
    }
}

fn exact_model(model: &Model) -> Model {
    let mut m = model.clone();
    m.bucket_width = 1;
    m
}

fn successor(model: &Model, state: &MarketState, accept: Option<&Request>) -> Result<MarketState> {
    let mut s = state.clone();
    if let Some(r) = accept {
        s.admit(r.bundle.clone(), model.effective_period(r), model.payment(r)?)?;
    }
    s.advance();
    s.release_expired();
    Ok(s)
}

/// One-step lookahead at `state` for `request`, given the values of the
/// next layer.
pub fn branch_values(
    model: &Model,
    state: &MarketState,
    request: &Request,
    next_value: impl Fn(&StateKey) -> f64,
) -> Result<BranchValues> {
    let beta = model.params.beta;
    let idle = state.idle_pool();
    let declined = successor(model, state, None)?;
    let decline = model.own_revenue(idle) + beta * next_value(&StateKey::of(model, &declined));
    let accept = if model.is_admissible(state, request) {
        let accepted = successor(model, state, Some(request))?;
        let period = model.effective_period(request);
        let contract = model.payment(request)? * annuity_factor(beta, period);
        let rest = idle.checked_sub(&request.bundle)?;
        Some(contract + model.own_revenue(&rest) + beta * next_value(&StateKey::of(model, &accepted)))
    } else {
        None
    };
    Ok(BranchValues { decline, accept })
}

/// Backward induction over the reachable state space.
pub fn dp_solve(model: &Model, budget: usize) -> Result<DpPolicy> {
    if model.mode == Mode::Expiring && model.horizon > EXPIRING_DP_MAX_HORIZON {
        return Err(Error::BudgetExceeded {
            what: "expiring-mode dynamic programming horizon",
            needed: u128::from(model.horizon),
            budget: u128::from(EXPIRING_DP_MAX_HORIZON),
        });
    }
    let model = exact_model(model);
    let states = reachable_states(&model, budget)?;
    let mut layers: BTreeMap<u32, Vec<(StateKey, MarketState)>> = BTreeMap::new();
    for (k, s) in states {
        layers.entry(k.time).or_default().push((k, s));
    }

    let mut values: HashMap<StateKey, f64> = HashMap::new();
    let mut decisions = BTreeMap::new();
    for (&t, layer) in layers.iter().rev() {
        let outcomes = model.arrival_outcomes(t);
        let lookup = |k: &StateKey| {
            if k.time >= model.horizon {
                0.0
            } else {
                values[k]
            }
        };
        let mut layer_values = Vec::with_capacity(layer.len());
        for (key, state) in layer {
            let mut v = 0.0;
            for (p, r) in &outcomes {
                let b = branch_values(&model, state, r, lookup)?;
                v += p * b.best();
            }
            // also record decisions for zero-probability offers
            for r in model.offers_at(t) {
                let b = branch_values(&model, state, &r, lookup)?;
                decisions.insert(TableKey::new(key.clone(), &r), b.accepts());
            }
            layer_values.push((key.clone(), v));
        }
        values.extend(layer_values);
    }
    let initial_key = StateKey::of(&model, &model.initial_state());
    Ok(DpPolicy {
        values,
        decisions,
        initial_key,
    })
}

/// Expected one-step lookahead at `key`; equals `V(key)` for a correct
/// solution.
pub fn bellman_lookahead(model: &Model, policy: &DpPolicy, state: &MarketState) -> Result<f64> {
    let model = exact_model(model);
    let lookup = |k: &StateKey| {
        if k.time >= model.horizon {
            0.0
        } else {
            policy.values[k]
        }
    };
    let mut v = 0.0;
    for (p, r) in model.arrival_outcomes(state.time()) {
        v += p * branch_values(&model, state, &r, lookup)?.best();
    }
    Ok(v)
}

/// Expected profits of the two `t = 0` decisions in the two-period model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepReport {
    /// At `t = 1` every request that fits is accepted.
    pub accept_profit_greedy: f64,
    pub decline_profit_greedy: f64,
    pub difference_greedy: f64,
    /// At `t = 1` a request is accepted iff its payment covers its own-slice
    /// revenue, which is optimal with one period left.
    pub accept_profit_optimal: f64,
    pub decline_profit_optimal: f64,
    pub difference_optimal: f64,
    /// `Γ₁` from the closed form.
    pub closed_form_payoff: f64,
    /// `difference_greedy - closed_form_payoff`.
    pub discrepancy: f64,
}

/// Enumerates both periods of the two-step model for the request
/// `(pool, bundle, 2)` at `t = 0`.
pub fn two_step_enumerate(model: &Model, pool: &ResourceVector, bundle: &ResourceVector) -> Result<TwoStepReport> {
    let catalog = &model.catalog;
    let params = &model.params;
    let beta = params.beta;
    if catalog.bundle_index(bundle).is_none() {
        return Err(Error::UnknownBundle(bundle.clone()));
    }
    if !bundle.fits_in(pool) {
        return Err(Error::InfeasibleRequest {
            pool: pool.clone(),
            bundle: bundle.clone(),
        });
    }
    let q = |v: &ResourceVector| economics::own_revenue(v, params, catalog);
    let g = model.dist.marginal();

    // Expected income in the last period with idle pool `idle`.
    let last_period = |idle: &ResourceVector, optimal: bool| -> Result<f64> {
        let mut e = 0.0;
        for (i, w) in catalog.bundles().iter().enumerate() {
            if g[i] == 0.0 {
                continue;
            }
            let mut income = q(idle);
            if i != 0 && w.fits_in(idle) {
                let pay = catalog.tariff(w, 1)?;
                let take = pay + q(&idle.checked_sub(w)?);
                if !optimal || take >= income {
                    income = take;
                }
            }
            e += g[i] * income;
        }
        Ok(e)
    };

    let contract = catalog.tariff(bundle, 2)?;
    let rest = pool.checked_sub(bundle)?;
    let mut out = [0.0; 4];
    for (j, optimal) in [false, true].into_iter().enumerate() {
        let accept = if bundle.is_zero() {
            q(pool) + beta * last_period(pool, optimal)?
        } else {
            contract + q(&rest) + beta * (contract + last_period(&rest, optimal)?)
        };
        let decline = q(pool) + beta * last_period(pool, optimal)?;
        out[2 * j] = accept;
        out[2 * j + 1] = decline;
    }
    let closed = if bundle.is_zero() { 0.0 } else { payoff_two_step(model, pool, bundle)? };
    Ok(TwoStepReport {
        accept_profit_greedy: out[0],
        decline_profit_greedy: out[1],
        difference_greedy: out[0] - out[1],
        accept_profit_optimal: out[2],
        decline_profit_optimal: out[3],
        difference_optimal: out[2] - out[3],
        closed_form_payoff: closed,
        discrepancy: (out[0] - out[1]) - closed,
    })
}
