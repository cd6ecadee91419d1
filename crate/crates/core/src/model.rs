//! A complete market instance: catalog, arrivals, economics, contract mode
//! and horizon.

use crate::catalog::Catalog;
use crate::economics::{self, EconomicParams};
use crate::error::{Error, Issue, Result};
use crate::market::{MarketState, Mode, Request};
use crate::resource::ResourceVector;
use crate::stochastic::{self, RequestDistribution, RequestStream};

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub catalog: Catalog,
    pub dist: RequestDistribution,
    pub params: EconomicParams,
    pub mode: Mode,
    /// `t_max`: decisions happen at `t = 0, ..., t_max - 1`.
    pub horizon: u32,
    pub initial_pool: ResourceVector,
    /// Width of the remaining-period buckets in expiring-mode state keys.
    pub bucket_width: u32,
}

impl Model {
    pub fn new(
        catalog: Catalog,
        dist: RequestDistribution,
        params: EconomicParams,
        mode: Mode,
        horizon: u32,
        initial_pool: ResourceVector,
    ) -> Result<Self> {
        let mut issues = Vec::new();
        let lattice = catalog.lattice();
        if horizon == 0 {
            issues.push(Issue::new("t_max", "must be at least 1"));
        }
        if !lattice.contains(&initial_pool) {
            issues.push(Issue::new("initial_pool", "must lie in [0,1]^N at the configured resolution"));
        }
        if params.own_revenue_rates.len() != lattice.dimension {
            issues.push(Issue::new(
                "own_revenue_rates",
                format!("expected {} rates, got {}", lattice.dimension, params.own_revenue_rates.len()),
            ));
        }
        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }
        let model = Self {
            catalog,
            dist,
            params,
            mode,
            horizon,
            initial_pool,
            bucket_width: 1,
        };
        model.check_pricing()?;
        Ok(model)
    }

    pub fn with_bucket_width(mut self, width: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("state_bucket_width", "must be at least 1"));
        }
        self.bucket_width = width;
        Ok(self)
    }

    /// Every payment the model can ask for must resolve: non-expiring
    /// contracts last `t_max - t` periods, which the catalog covers only by
    /// listing those periods or by flat pricing.
    fn check_pricing(&self) -> Result<()> {
        let periods: Vec<u32> = match self.mode {
            Mode::NonExpiring => (1..=self.horizon).collect(),
            Mode::Expiring => self.catalog.periods(),
        };
        let mut issues = Vec::new();
        for b in self.catalog.bundles().iter().skip(1) {
            for &t in &periods {
                if self.catalog.tariff(b, t).is_err() {
                    issues.push(Issue::new(
                        "catalog",
                        format!("no payment for bundle {b} over {t} periods (list it or price the bundle flat)"),
                    ));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }

    pub fn initial_state(&self) -> MarketState {
        MarketState::new(self.initial_pool.clone())
    }

    pub fn dimension(&self) -> usize {
        self.catalog.lattice().dimension
    }

    /// Contract length actually signed for `request`.
    pub fn effective_period(&self, request: &Request) -> u32 {
        match self.mode {
            Mode::NonExpiring => self.horizon.saturating_sub(request.arrival_time),
            Mode::Expiring => request.period,
        }
    }

    /// Rewrites the period of a non-expiring request to `t_max - t`.
    pub fn normalize(&self, request: Request) -> Request {
        if request.is_null() {
            return Request::null(request.arrival_time, self.dimension());
        }
        let period = self.effective_period(&request);
        Request { period, ..request }
    }

    pub fn sample_request(&self, stream: &mut RequestStream, t: u32) -> Request {
        self.normalize(stochastic::sample_request(&self.catalog, &self.dist, t, stream))
    }

    /// Whether accepting is possible at all: the bundle fits the idle pool
    /// and the contract ends within the horizon.
    pub fn is_admissible(&self, state: &MarketState, request: &Request) -> bool {
        let period = self.effective_period(request);
        !request.is_null()
            && period >= 1
            && request.arrival_time + period <= self.horizon
            && request.bundle.fits_in(state.idle_pool())
    }

    /// Periodic payment of a (normalized) request.
    pub fn payment(&self, request: &Request) -> Result<f64> {
        self.catalog.tariff(&request.bundle, self.effective_period(request))
    }

    pub fn own_revenue(&self, bundle: &ResourceVector) -> f64 {
        economics::own_revenue(bundle, &self.params, &self.catalog)
    }

    /// The distinct non-null requests that can arrive at `t`, normalized.
    /// Non-expiring models offer one request per distinct bundle, since the
    /// period is overridden; expiring models offer every listed entry.
    pub fn offers_at(&self, t: u32) -> Vec<Request> {
        match self.mode {
            Mode::NonExpiring => self
                .catalog
                .bundles()
                .iter()
                .skip(1)
                .map(|b| self.normalize(Request::new(t, b.clone(), 1)))
                .collect(),
            Mode::Expiring => self
                .catalog
                .entries()
                .iter()
                .map(|e| Request::new(t, e.bundle.clone(), e.period))
                .collect(),
        }
    }

    /// Branches of one period's arrival: `(probability, request)` with the
    /// null request first. Zero-probability outcomes are dropped and
    /// entries that normalize to the same request are merged.
    pub fn arrival_outcomes(&self, t: u32) -> Vec<(f64, Request)> {
        let mut out: Vec<(f64, Request)> = Vec::new();
        if self.dist.null_weight() > 0.0 {
            out.push((self.dist.null_weight(), Request::null(t, self.dimension())));
        }
        for (e, &w) in self.catalog.entries().iter().zip(self.dist.entry_weights()) {
            if w <= 0.0 {
                continue;
            }
            let r = self.normalize(Request::new(t, e.bundle.clone(), e.period));
            match out.iter_mut().find(|(_, q)| *q == r) {
                Some((p, _)) => *p += w,
                None => out.push((w, r)),
            }
        }
        out
    }
}
