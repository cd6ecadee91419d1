//! Opportunity-cost admission control for tenant slice requests.
//!
//! An operator owns a finite pool of resources and receives at most one
//! request per period for a bundle of them under a fixed-price contract.
//! Accepting earns the contract payments; declining keeps the bundle for the
//! operator's own slices and for later, possibly better, requests. The
//! threshold rule accepts when the present value of the payments covers the
//! opportunity cost of reserving the bundle.
//!
//! ```
//! use slice_admission::config::Config;
//! use slice_admission::opportunity_cost::payoff_two_step;
//!
//! let config = Config::from_json(r#"{
//!     "dimension": 1,
//!     "initial_pool": [1.0],
//!     "catalog": [
//!         {"bundle": [0.4], "period": 2, "payment": 2.0},
//!         {"bundle": [0.6], "period": 2, "payment": 3.0}
//!     ],
//!     "request_weights": [0.3, 0.2],
//!     "beta": 0.9,
//!     "own_revenue_rates": [4.0],
//!     "mode": "non-expiring",
//!     "t_max": 2
//! }"#).unwrap();
//! let model = config.build_model().unwrap();
//! let lattice = model.catalog.lattice();
//! let gamma = payoff_two_step(&model, &model.initial_pool, &lattice.vector(&[0.6]).unwrap()).unwrap();
//! assert!((gamma - 0.6).abs() < 1e-9);
//! ```

pub mod catalog;
pub mod cli;
pub mod config;
pub mod document;
pub mod economics;
pub mod error;
pub mod learner;
pub mod market;
pub mod model;
pub mod opportunity_cost;
pub mod oracle;
pub mod resource;
pub mod simulator;
pub mod stats;
pub mod stochastic;
pub mod strategy;

#[cfg(test)]
mod testkit;

pub use catalog::{Catalog, CatalogEntry, FeasibleSet};
pub use config::Config;
pub use error::{Error, Result};
pub use market::{MarketState, Mode, Request};
pub use model::Model;
pub use resource::{Lattice, ResourceVector};
pub use strategy::{Decision, StrategyDescriptor};
