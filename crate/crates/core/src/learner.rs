//! Iterative approximation of the opportunity-cost strategy.
//!
//! Each iteration estimates the opportunity cost of every offer at every
//! reachable state under the current strategy, then replaces the strategy by
//! the threshold rule on those costs. The loop stops once the costs at the
//! initial state move by less than `gamma` (summed over offers) between two
//! iterations, or after `i_max` iterations.
//!
//! Every iteration samples its request sequences from the same streams, so
//! once the strategy stops changing the costs repeat exactly.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketState, Request};
use crate::model::Model;
use crate::opportunity_cost::{self, OcMethod, PaymentVariant};
use crate::stochastic::derive_seed;
use crate::strategy::{OcPolicy, OcSettings, OcTable, StateKey, StrategyDescriptor, TableKey};

const LEARN_STREAM_TAG: u64 = 0x006c_6561_726e;

/// Default cap on the number of distinct reachable state keys.
pub const DEFAULT_STATE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSettings {
    pub i_max: u32,
    /// Absolute stopping threshold. `None` means one percent of the summed
    /// absolute costs at the initial state after the first iteration.
    pub gamma: Option<f64>,
    pub n_samples: u64,
    pub variant: PaymentVariant,
    pub seed: u64,
    pub state_budget: usize,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self {
            i_max: 50,
            gamma: None,
            n_samples: 2_000,
            variant: PaymentVariant::Literal,
            seed: 0,
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// Costs at the initial state, one per offer in `ConvergenceReport::offers`.
    pub oc_at_initial: Vec<f64>,
    /// `Σ |C^i - C^{i-1}|` at the initial state; absent for the first iteration.
    pub metric: Option<f64>,
    /// Number of `(state, offer)` cells whose decision flipped against the
    /// previous strategy.
    pub decision_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Offers at the initial state as `(bundle units, period)`.
    pub offers: Vec<Request>,
    pub gamma: f64,
    pub converged: bool,
    pub iterations: Vec<IterationRecord>,
}

impl ConvergenceReport {
    pub fn final_metric(&self) -> Option<f64> {
        self.iterations.last().and_then(|r| r.metric)
    }
}

/// Every state reachable from the initial state at `t < t_max` under some
/// sequence of arrivals and decisions, one representative per key.
pub fn reachable_states(model: &Model, budget: usize) -> Result<Vec<(StateKey, MarketState)>> {
    let mut seen: BTreeMap<StateKey, MarketState> = BTreeMap::new();
    let init = model.initial_state();
    let mut queue = VecDeque::new();
    seen.insert(StateKey::of(model, &init), init.clone());
    queue.push_back(init);
    while let Some(state) = queue.pop_front() {
        let t = state.time();
        if t + 1 >= model.horizon {
            continue;
        }
        let mut successors = Vec::new();
        let mut declined = state.clone();
        declined.advance();
        declined.release_expired();
        successors.push(declined);
        for r in model.offers_at(t) {
            if model.is_admissible(&state, &r) {
                let mut s = state.clone();
                s.admit(r.bundle.clone(), model.effective_period(&r), model.payment(&r)?)?;
                s.advance();
                s.release_expired();
                successors.push(s);
            }
        }
        for s in successors {
            let key = StateKey::of(model, &s);
            if !seen.contains_key(&key) {
                if seen.len() >= budget {
                    return Err(Error::BudgetExceeded {
                        what: "reachable state enumeration",
                        needed: seen.len() as u128 + 1,
                        budget: budget as u128,
                    });
                }
                seen.insert(key, s.clone());
                queue.push_back(s);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn admissible_offers(model: &Model, state: &MarketState) -> Vec<Request> {
    model
        .offers_at(state.time())
        .into_iter()
        .filter(|r| model.is_admissible(state, r))
        .collect()
}

/// Estimates a full cost table under `strategy`.
fn estimate_table(
    model: &Model,
    states: &[(StateKey, MarketState)],
    strategy: &StrategyDescriptor,
    settings: &OcSettings,
    iteration: u32,
) -> Result<OcTable> {
    let cells: Vec<Vec<(TableKey, _)>> = states
        .par_iter()
        .map(|(key, state)| {
            let offers = admissible_offers(model, state);
            if offers.is_empty() {
                return Ok(Vec::new());
            }
            let estimates = opportunity_cost::oc_monte_carlo_many(
                model,
                state,
                &offers,
                strategy,
                settings.variant,
                settings.n_samples,
                settings.seed,
            )?;
            Ok(offers
                .iter()
                .zip(estimates)
                .map(|(r, e)| (TableKey::new(key.clone(), r), e))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = OcTable::new(model.horizon, iteration);
    for (k, e) in cells.into_iter().flatten() {
        table.insert(k, e);
    }
    Ok(table)
}

fn count_decision_changes(
    model: &Model,
    states: &[(StateKey, MarketState)],
    old: &StrategyDescriptor,
    new: &StrategyDescriptor,
) -> Result<usize> {
    let mut changes = 0;
    for (_, state) in states {
        for r in admissible_offers(model, state) {
            if old.decide(model, state, &r)?.accepted != new.decide(model, state, &r)?.accepted {
                changes += 1;
            }
        }
    }
    Ok(changes)
}

/// Learns a threshold strategy starting from `initial`.
///
/// Not converging within `i_max` iterations is reported in the returned
/// [`ConvergenceReport`], not raised.
pub fn learn_strategy(
    model: &Model,
    initial: StrategyDescriptor,
    settings: &LearnerSettings,
) -> Result<(StrategyDescriptor, ConvergenceReport)> {
    if settings.i_max == 0 {
        return Err(Error::invalid("learner.i_max", "must be at least 1"));
    }
    if settings.n_samples == 0 {
        return Err(Error::invalid("learner.n_samples", "must be at least 1"));
    }
    if let Some(g) = settings.gamma {
        if g.is_nan() || g <= 0.0 {
            return Err(Error::invalid("learner.gamma", "must be positive"));
        }
    }

    let states = reachable_states(model, settings.state_budget)?;
    let init = model.initial_state();
    let init_key = StateKey::of(model, &init);
    let offers = admissible_offers(model, &init);
    let oc_settings = OcSettings {
        method: OcMethod::MonteCarlo,
        n_samples: settings.n_samples,
        variant: settings.variant,
        seed: derive_seed(settings.seed, LEARN_STREAM_TAG),
        ..OcSettings::default()
    };

    let mut current = initial;
    let mut previous: Option<Vec<f64>> = None;
    let mut gamma = settings.gamma;
    let mut records = Vec::new();
    let mut converged = false;

    for i in 0..settings.i_max {
        let table = estimate_table(model, &states, &current, &oc_settings, i)?;
        let at_initial: Vec<f64> = offers
            .iter()
            .map(|r| table.get(&TableKey::new(init_key.clone(), r)).map(|e| e.value).unwrap_or(0.0))
            .collect();
        let gamma_now = *gamma.get_or_insert_with(|| 0.01 * at_initial.iter().map(|c| c.abs()).sum::<f64>());

        // The table covers every reachable cell, so the base only serves
        // off-table lookups; keep it one level deep.
        let base = match &current {
            StrategyDescriptor::OcOptimal(p) => p.base.clone(),
            other => other.clone(),
        };
        let updated = StrategyDescriptor::OcOptimal(Box::new(OcPolicy {
            table,
            base,
            settings: oc_settings,
        }));
        let decision_changes = count_decision_changes(model, &states, &current, &updated)?;
        let metric = previous
            .as_ref()
            .map(|p| p.iter().zip(&at_initial).map(|(a, b)| (a - b).abs()).sum::<f64>());
        records.push(IterationRecord {
            iteration: i,
            oc_at_initial: at_initial.clone(),
            metric,
            decision_changes,
        });
        current = updated;
        if metric.is_some_and(|m| m < gamma_now) {
            converged = true;
            break;
        }
        previous = Some(at_initial);
    }

    let report = ConvergenceReport {
        offers,
        gamma: gamma.unwrap_or(0.0),
        converged,
        iterations: records,
    };
    Ok((current, report))
}
