//! Requests, contracts and the evolving market state.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::resource::ResourceVector;

/// Whether accepted contracts ever hand their resources back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every contract runs to the horizon: the period is `t_max - t`.
    NonExpiring,
    /// Contracts release their bundle after their own period.
    Expiring,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::NonExpiring => "non-expiring",
            Mode::Expiring => "expiring",
        })
    }
}

/// A tenant request for `bundle` over `period` periods, arriving at
/// `arrival_time`. The zero bundle is the null request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Request {
    pub arrival_time: u32,
    pub bundle: ResourceVector,
    pub period: u32,
}

impl Request {
    pub fn new(arrival_time: u32, bundle: ResourceVector, period: u32) -> Self {
        Self {
            arrival_time,
            bundle,
            period,
        }
    }

    pub fn null(arrival_time: u32, dimension: usize) -> Self {
        Self {
            arrival_time,
            bundle: ResourceVector::zero(dimension),
            period: 1,
        }
    }

    pub fn is_null(&self) -> bool {
        self.bundle.is_zero()
    }
}

/// An accepted contract. It holds its bundle during the periods
/// `start, start+1, ..., start+period-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveContract {
    pub start: u32,
    pub period: u32,
    pub bundle: ResourceVector,
    pub payment: f64,
}

impl ActiveContract {
    /// First period in which the bundle is idle again.
    pub fn end(&self) -> u32 {
        self.start + self.period
    }

    pub fn is_active_at(&self, t: u32) -> bool {
        self.start <= t && t < self.end()
    }
}

/// The idle pool, the ledger of active contracts and the clock.
///
/// `idle_pool + reserved == initial_pool` holds exactly after every
/// operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    time: u32,
    initial_pool: ResourceVector,
    ledger: Vec<ActiveContract>,
    reserved: ResourceVector,
    idle_pool: ResourceVector,
}

impl MarketState {
    pub fn new(initial_pool: ResourceVector) -> Self {
        let zero = ResourceVector::zero(initial_pool.dimension());
        Self {
            time: 0,
            idle_pool: initial_pool.clone(),
            initial_pool,
            ledger: Vec::new(),
            reserved: zero,
        }
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn initial_pool(&self) -> &ResourceVector {
        &self.initial_pool
    }

    pub fn idle_pool(&self) -> &ResourceVector {
        &self.idle_pool
    }

    pub fn reserved(&self) -> &ResourceVector {
        &self.reserved
    }

    pub fn ledger(&self) -> &[ActiveContract] {
        &self.ledger
    }

    /// Drops contracts whose window has closed by the current time and
    /// returns them, oldest first.
    pub fn release_expired(&mut self) -> Vec<ActiveContract> {
        let now = self.time;
        let (expired, active): (Vec<_>, Vec<_>) =
            self.ledger.drain(..).partition(|c| c.end() <= now);
        self.ledger = active;
        for c in &expired {
            self.idle_pool = self.idle_pool.add(&c.bundle);
            self.reserved = self
                .reserved
                .checked_sub(&c.bundle)
                .expect("reserved always covers every ledger bundle");
        }
        expired
    }

    /// Reserves `bundle` for a contract starting now.
    pub fn admit(&mut self, bundle: ResourceVector, period: u32, payment: f64) -> Result<()> {
        self.idle_pool = self.idle_pool.checked_sub(&bundle)?;
        self.reserved = self.reserved.add(&bundle);
        self.ledger.push(ActiveContract {
            start: self.time,
            period,
            bundle,
            payment,
        });
        Ok(())
    }

    pub fn advance(&mut self) {
        self.time += 1;
    }

    /// Sum of periodic payments of contracts active now.
    pub fn active_payments(&self) -> f64 {
        self.ledger
            .iter()
            .filter(|c| c.is_active_at(self.time))
            .map(|c| c.payment)
            .sum()
    }

    /// Recomputes the reserved total from the ledger and checks it against
    /// the cached value and the pool identity.
    pub fn is_consistent(&self) -> bool {
        let from_ledger = self
            .ledger
            .iter()
            .fold(ResourceVector::zero(self.initial_pool.dimension()), |acc, c| {
                acc.add(&c.bundle)
            });
        from_ledger == self.reserved && self.idle_pool.add(&self.reserved) == self.initial_pool
    }
}
