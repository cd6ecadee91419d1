//! Admission strategies: baselines and the opportunity-cost threshold rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketState, Mode, Request};
use crate::model::Model;
use crate::opportunity_cost::{
    self, OcEstimate, OcMethod, PaymentVariant, DEFAULT_ENUMERATION_BUDGET,
};
use crate::resource::ResourceVector;

/// What a table-backed strategy may condition on.
///
/// Non-expiring models are Markov in `(time, idle pool)`. Expiring models
/// also need the active contracts, kept as sorted `(bucket, bundle)` pairs
/// where the bucket is `(remaining periods - 1) / bucket_width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateKey {
    pub time: u32,
    pub idle: ResourceVector,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contracts: Vec<(u32, ResourceVector)>,
}

impl StateKey {
    pub fn of(model: &Model, state: &MarketState) -> Self {
        let contracts = match model.mode {
            Mode::NonExpiring => Vec::new(),
            Mode::Expiring => {
                let mut c: Vec<(u32, ResourceVector)> = state
                    .ledger()
                    .iter()
                    .filter(|c| c.end() > state.time())
                    .map(|c| ((c.end() - state.time() - 1) / model.bucket_width, c.bundle.clone()))
                    .collect();
                c.sort();
                c
            }
        };
        Self {
            time: state.time(),
            idle: state.idle_pool().clone(),
            contracts,
        }
    }
}

/// A `(state, offer)` cell of an [`OcTable`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableKey {
    pub state: StateKey,
    pub bundle: ResourceVector,
    pub period: u32,
}

impl TableKey {
    pub fn new(state: StateKey, request: &Request) -> Self {
        Self {
            state,
            bundle: request.bundle.clone(),
            period: request.period,
        }
    }
}

/// Estimated opportunity costs per `(state key, offer)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OcTable {
    pub horizon: u32,
    pub iteration: u32,
    pub entries: BTreeMap<TableKey, OcEstimate>,
}

impl OcTable {
    pub fn new(horizon: u32, iteration: u32) -> Self {
        Self {
            horizon,
            iteration,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: &TableKey) -> Option<&OcEstimate> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: TableKey, estimate: OcEstimate) {
        self.entries.insert(key, estimate);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// How missing opportunity costs are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcSettings {
    pub method: OcMethod,
    pub n_samples: u64,
    pub variant: PaymentVariant,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub enumeration_budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_ENUMERATION_BUDGET as u64
}

impl Default for OcSettings {
    fn default() -> Self {
        Self {
            method: OcMethod::MonteCarlo,
            n_samples: 2_000,
            variant: PaymentVariant::Literal,
            seed: 0,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET as u64,
        }
    }
}

/// The opportunity-cost threshold rule: accept iff `Γ ≥ 0`.
///
/// Costs come from `table`; cells it lacks are estimated on demand with
/// future decisions taken by `base`, the strategy the table was built
/// under.
#[derive(Debug, Clone, PartialEq)]
pub struct OcPolicy {
    pub table: OcTable,
    pub base: StrategyDescriptor,
    pub settings: OcSettings,
}

impl OcPolicy {
    pub fn oc_for(&self, model: &Model, state: &MarketState, request: &Request) -> Result<OcEstimate> {
        let key = TableKey::new(StateKey::of(model, state), request);
        if let Some(e) = self.table.get(&key) {
            return Ok(*e);
        }
        estimate_oc(model, state, request, &self.base, &self.settings)
    }
}

/// Computes the opportunity cost of `request` at `state` with the method
/// in `settings`, future decisions taken by `strategy`.
pub fn estimate_oc(
    model: &Model,
    state: &MarketState,
    request: &Request,
    strategy: &StrategyDescriptor,
    settings: &OcSettings,
) -> Result<OcEstimate> {
    match settings.method {
        OcMethod::MonteCarlo => opportunity_cost::oc_monte_carlo(
            model,
            state,
            request,
            strategy,
            settings.variant,
            settings.n_samples,
            settings.seed,
        ),
        OcMethod::Enumeration => opportunity_cost::oc_exact_enumeration(
            model,
            state,
            request,
            strategy,
            settings.variant,
            u128::from(settings.enumeration_budget),
        )
        .map(|v| OcEstimate::exact(v, OcMethod::Enumeration)),
        OcMethod::ClosedForm2step => Err(Error::InvalidArgument(
            "the two-period closed form is not a general-horizon estimator".into(),
        )),
    }
}

/// An admission strategy `F`.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyDescriptor {
    AlwaysAccept,
    NeverAccept,
    /// Accept when the periodic payment is at least `min_payment`.
    PriceThreshold { min_payment: f64 },
    OcOptimal(Box<OcPolicy>),
}

impl StrategyDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            StrategyDescriptor::AlwaysAccept => "always-accept",
            StrategyDescriptor::NeverAccept => "never-accept",
            StrategyDescriptor::PriceThreshold { .. } => "price-threshold",
            StrategyDescriptor::OcOptimal(_) => "oc-optimal",
        }
    }

    /// The threshold rule over an empty table: every cost is estimated on
    /// demand with `base` taking the future decisions.
    pub fn oc_optimal_on_demand(base: StrategyDescriptor, settings: OcSettings, horizon: u32) -> Self {
        StrategyDescriptor::OcOptimal(Box::new(OcPolicy {
            table: OcTable::new(horizon, 0),
            base,
            settings,
        }))
    }

    pub fn decide(&self, model: &Model, state: &MarketState, request: &Request) -> Result<Decision> {
        if request.is_null() {
            return Ok(Decision::decline(DecisionReason::NullRequest));
        }
        if !model.is_admissible(state, request) {
            return Ok(Decision::decline(DecisionReason::Inadmissible));
        }
        Ok(match self {
            StrategyDescriptor::AlwaysAccept => Decision::by_policy(true),
            StrategyDescriptor::NeverAccept => Decision::by_policy(false),
            StrategyDescriptor::PriceThreshold { min_payment } => {
                Decision::by_policy(model.payment(request)? >= *min_payment)
            }
            StrategyDescriptor::OcOptimal(policy) => {
                let oc = policy.oc_for(model, state, request)?;
                let payoff = opportunity_cost::payoff(model, request, oc.value)?;
                Decision {
                    accepted: payoff >= 0.0,
                    reason: DecisionReason::Policy,
                    oc: Some(oc.value),
                    payoff: Some(payoff),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionReason {
    NullRequest,
    /// The bundle does not fit, or the contract would outlive the horizon.
    Inadmissible,
    Policy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub accepted: bool,
    pub reason: DecisionReason,
    /// The opportunity cost the decision used, for threshold strategies.
    pub oc: Option<f64>,
    pub payoff: Option<f64>,
}

impl Decision {
    fn decline(reason: DecisionReason) -> Self {
        Self {
            accepted: false,
            reason,
            oc: None,
            payoff: None,
        }
    }

    fn by_policy(accepted: bool) -> Self {
        Self {
            accepted,
            reason: DecisionReason::Policy,
            oc: None,
            payoff: None,
        }
    }
}

/// Decides on `request` and returns the decision with the state after it:
/// an accepted bundle is moved from the idle pool into the ledger. The
/// clock is not advanced.
pub fn decide(
    strategy: &StrategyDescriptor,
    model: &Model,
    state: &MarketState,
    request: &Request,
) -> Result<(Decision, MarketState)> {
    let decision = strategy.decide(model, state, request)?;
    let mut next = state.clone();
    if decision.accepted {
        next.admit(
            request.bundle.clone(),
            model.effective_period(request),
            model.payment(request)?,
        )?;
    }
    Ok((decision, next))
}
