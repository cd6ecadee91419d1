//! Discrete-time market simulation and strategy comparison.
//!
//! Each period runs in a fixed order: contracts whose window closed release
//! their bundles, the period's request arrives and is decided, then income
//! accrues. Income is every active contract's payment plus the own-slice
//! revenue of the idle pool, discounted by `β^t`. Payments start in the
//! arrival period.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketState, Request};
use crate::model::Model;
use crate::resource::ResourceVector;
use crate::stats::Summary;
use crate::stochastic::{derive_seed, RequestStream};
use crate::strategy::{DecisionReason, StrategyDescriptor};

const EVAL_STREAM_TAG: u64 = 0x6576_616c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    RequestArrival,
    Accept,
    Decline,
    Expiry,
    PeriodIncome,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::RequestArrival => "request-arrival",
            EventKind::Accept => "accept",
            EventKind::Decline => "decline",
            EventKind::Expiry => "expiry",
            EventKind::PeriodIncome => "period-income",
        }
    }
}

/// One line of a trace.
///
/// For `period-income` events, `payment` is the undiscounted income of the
/// period: one event per active contract, plus one own-slice event with
/// `period == 0` whose bundle is the idle pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: u32,
    pub kind: EventKind,
    pub bundle: ResourceVector,
    pub period: u32,
    pub payment: f64,
    pub idle_pool: ResourceVector,
    pub reserved: ResourceVector,
}

impl TraceEvent {
    pub fn is_own_revenue(&self) -> bool {
        self.kind == EventKind::PeriodIncome && self.period == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Realized discounted profit; equals `payments_pv + own_revenue_pv`.
    pub profit: f64,
    pub payments_pv: f64,
    pub own_revenue_pv: f64,
    pub requests: u32,
    pub accepted: u32,
    pub declined_by_policy: u32,
    /// Declined because the bundle did not fit or the contract would
    /// outlive the horizon.
    pub declined_inadmissible: u32,
    pub final_state: MarketState,
}

/// Where a run's requests come from.
#[derive(Debug, Clone)]
pub enum RequestSource {
    Sampled { seed: u64, stream: u64 },
    /// Requests by arrival time; periods without one see the null request.
    Scripted(Vec<Request>),
}

impl RequestSource {
    fn request_at(&self, model: &Model, stream: &mut Option<RequestStream>, t: u32) -> Request {
        match self {
            RequestSource::Sampled { .. } => {
                model.sample_request(stream.as_mut().expect("sampled source has a stream"), t)
            }
            RequestSource::Scripted(list) => list
                .iter()
                .find(|r| r.arrival_time == t)
                .map(|r| model.normalize(r.clone()))
                .unwrap_or_else(|| Request::null(t, model.dimension())),
        }
    }
}

/// Tally of one period, used by [`run`] for accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PeriodIncome {
    pub payments: f64,
    pub own_revenue: f64,
}

/// Advances one period: releases expired contracts, decides on `request`,
/// accrues income and moves the clock forward.
pub fn step(
    model: &Model,
    state: &MarketState,
    request: &Request,
    strategy: &StrategyDescriptor,
) -> Result<(MarketState, Vec<TraceEvent>)> {
    step_with_income(model, state, request, strategy, true).map(|(s, e, _, _)| (s, e))
}

type StepOutcome = (MarketState, Vec<TraceEvent>, PeriodIncome, Option<(DecisionReason, bool)>);

fn step_with_income(
    model: &Model,
    state: &MarketState,
    request: &Request,
    strategy: &StrategyDescriptor,
    trace: bool,
) -> Result<StepOutcome> {
    if request.arrival_time != state.time() {
        return Err(Error::InvalidArgument(format!(
            "request arrives at {} but the market is at {}",
            request.arrival_time,
            state.time()
        )));
    }
    let mut s = state.clone();
    let mut events = Vec::new();
    let t = s.time();

    for c in s.release_expired() {
        if trace {
            events.push(TraceEvent {
                time: t,
                kind: EventKind::Expiry,
                bundle: c.bundle,
                period: c.period,
                payment: c.payment,
                idle_pool: s.idle_pool().clone(),
                reserved: s.reserved().clone(),
            });
        }
    }

    let mut reason = None;
    if !request.is_null() {
        let period = model.effective_period(request);
        let payment = model.payment(request)?;
        if trace {
            events.push(TraceEvent {
                time: t,
                kind: EventKind::RequestArrival,
                bundle: request.bundle.clone(),
                period,
                payment,
                idle_pool: s.idle_pool().clone(),
                reserved: s.reserved().clone(),
            });
        }
        let decision = strategy.decide(model, &s, request)?;
        reason = Some((decision.reason, decision.accepted));
        if decision.accepted {
            s.admit(request.bundle.clone(), period, payment)?;
        }
        if trace {
            events.push(TraceEvent {
                time: t,
                kind: if decision.accepted { EventKind::Accept } else { EventKind::Decline },
                bundle: request.bundle.clone(),
                period,
                payment,
                idle_pool: s.idle_pool().clone(),
                reserved: s.reserved().clone(),
            });
        }
    }

    let mut income = PeriodIncome::default();
    for c in s.ledger().iter().filter(|c| c.is_active_at(t)) {
        income.payments += c.payment;
        if trace {
            events.push(TraceEvent {
                time: t,
                kind: EventKind::PeriodIncome,
                bundle: c.bundle.clone(),
                period: c.period,
                payment: c.payment,
                idle_pool: s.idle_pool().clone(),
                reserved: s.reserved().clone(),
            });
        }
    }
    income.own_revenue = model.own_revenue(s.idle_pool());
    if trace {
        events.push(TraceEvent {
            time: t,
            kind: EventKind::PeriodIncome,
            bundle: s.idle_pool().clone(),
            period: 0,
            payment: income.own_revenue,
            idle_pool: s.idle_pool().clone(),
            reserved: s.reserved().clone(),
        });
    }
    s.advance();
    Ok((s, events, income, reason))
}

fn run_inner(
    model: &Model,
    strategy: &StrategyDescriptor,
    source: &RequestSource,
    trace: bool,
) -> Result<(RunResult, Vec<TraceEvent>)> {
    let mut stream = match source {
        RequestSource::Sampled { seed, stream } => Some(RequestStream::new(*seed, *stream)),
        RequestSource::Scripted(_) => None,
    };
    let mut state = model.initial_state();
    let mut events = Vec::new();
    let (mut payments_pv, mut own_revenue_pv) = (0.0, 0.0);
    let (mut requests, mut accepted, mut by_policy, mut inadmissible) = (0, 0, 0, 0);
    let beta = model.params.beta;
    let mut discount = 1.0;
    for t in 0..model.horizon {
        let request = source.request_at(model, &mut stream, t);
        let (next, ev, income, decision) = step_with_income(model, &state, &request, strategy, trace)?;
        match decision {
            None => {}
            Some((_, true)) => accepted += 1,
            Some((DecisionReason::Inadmissible, false)) => inadmissible += 1,
            Some(_) => by_policy += 1,
        }
        if decision.is_some() {
            requests += 1;
        }
        payments_pv += discount * income.payments;
        own_revenue_pv += discount * income.own_revenue;
        discount *= beta;
        events.extend(ev);
        state = next;
    }
    Ok((
        RunResult {
            profit: payments_pv + own_revenue_pv,
            payments_pv,
            own_revenue_pv,
            requests,
            accepted,
            declined_by_policy: by_policy,
            declined_inadmissible: inadmissible,
            final_state: state,
        },
        events,
    ))
}

/// Simulates one trajectory over the horizon and returns its result and
/// trace.
pub fn run(
    model: &Model,
    strategy: &StrategyDescriptor,
    source: &RequestSource,
) -> Result<(RunResult, Vec<TraceEvent>)> {
    run_inner(model, strategy, source, true)
}

/// As [`run`], without building the trace.
pub fn run_quiet(model: &Model, strategy: &StrategyDescriptor, source: &RequestSource) -> Result<RunResult> {
    run_inner(model, strategy, source, false).map(|(r, _)| r)
}

/// Recomputes the realized profit from a trace alone.
pub fn profit_from_trace(events: &[TraceEvent], beta: f64) -> f64 {
    events
        .iter()
        .filter(|e| e.kind == EventKind::PeriodIncome)
        .map(|e| beta.powi(e.time as i32) * e.payment)
        .sum()
}

/// Writes a trace as CSV with header
/// `t,event,bundle,period,payment,idle_pool,reserved`; vectors are
/// `/`-joined lattice units.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "trace".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(["t", "event", "bundle", "period", "payment", "idle_pool", "reserved"])
        .map_err(io)?;
    for e in events {
        w.write_record([
            e.time.to_string(),
            e.kind.as_str().to_string(),
            e.bundle.to_string(),
            e.period.to_string(),
            format!("{}", e.payment),
            e.idle_pool.to_string(),
            e.reserved.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "trace".into(),
        source: e,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub name: String,
    pub kind: String,
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub mean_accepted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDifference {
    pub first: String,
    pub second: String,
    /// Mean of `profit(first) - profit(second)` over paired runs.
    pub mean_difference: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub max_abs_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_runs: u64,
    pub strategies: Vec<StrategySummary>,
    pub pairwise: Vec<PairwiseDifference>,
    /// `profits[s][k]`: profit of strategy `s` on run `k`.
    #[serde(skip)]
    pub profits: Vec<Vec<f64>>,
}

/// Runs every strategy on the same `n_runs` request streams and compares
/// their realized profits.
pub fn evaluate(
    model: &Model,
    strategies: &[(String, StrategyDescriptor)],
    n_runs: u64,
    seed: u64,
) -> Result<ComparisonReport> {
    if n_runs < 2 {
        return Err(Error::InvalidArgument(
            "evaluation needs at least two runs to estimate variance".into(),
        ));
    }
    let eval_seed = derive_seed(seed, EVAL_STREAM_TAG);
    let per_run: Vec<Vec<RunResult>> = (0..n_runs)
        .into_par_iter()
        .map(|k| {
            let source = RequestSource::Sampled { seed: eval_seed, stream: k };
            strategies
                .iter()
                .map(|(_, s)| run_quiet(model, s, &source))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let profits: Vec<Vec<f64>> = (0..strategies.len())
        .map(|j| per_run.iter().map(|row| row[j].profit).collect())
        .collect();
    let summaries = strategies
        .iter()
        .enumerate()
        .map(|(j, (name, s))| {
            let sm = Summary::of(&profits[j]);
            let acc: Vec<f64> = per_run.iter().map(|row| f64::from(row[j].accepted)).collect();
            StrategySummary {
                name: name.clone(),
                kind: s.kind().to_string(),
                mean: sm.mean,
                std_dev: sm.std_dev,
                std_error: sm.std_error(),
                ci95: sm.ci95(),
                mean_accepted: Summary::of(&acc).mean,
            }
        })
        .collect();
    let mut pairwise = Vec::new();
    for a in 0..strategies.len() {
        for b in a + 1..strategies.len() {
            let diffs: Vec<f64> = profits[a].iter().zip(&profits[b]).map(|(x, y)| x - y).collect();
            let sm = Summary::of(&diffs);
            pairwise.push(PairwiseDifference {
                first: strategies[a].0.clone(),
                second: strategies[b].0.clone(),
                mean_difference: sm.mean,
                std_error: sm.std_error(),
                ci95: sm.ci95(),
                max_abs_difference: diffs.iter().fold(0.0, |m, d| m.max(d.abs())),
            });
        }
    }
    Ok(ComparisonReport {
        n_runs,
        strategies: summaries,
        pairwise,
        profits,
    })
}
