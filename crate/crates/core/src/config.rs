//! JSON configuration: one file describes a whole market instance plus the
//! knobs of the learner, the estimator and the oracle.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{Catalog, CatalogEntry};
use crate::economics::EconomicParams;
use crate::error::{Error, Issue, Result};
use crate::learner::{LearnerSettings, DEFAULT_STATE_BUDGET};
use crate::market::Mode;
use crate::model::Model;
use crate::opportunity_cost::{OcMethod, PaymentVariant, DEFAULT_ENUMERATION_BUDGET};
use crate::oracle::DEFAULT_DP_BUDGET;
use crate::resource::Lattice;
use crate::stochastic::RequestDistribution;
use crate::strategy::OcSettings;

fn default_resolution() -> u32 {
    100
}
fn default_bucket_width() -> u32 {
    1
}
fn default_i_max() -> u32 {
    50
}
fn default_samples() -> u64 {
    2_000
}
fn default_enumeration_budget() -> u64 {
    DEFAULT_ENUMERATION_BUDGET as u64
}
fn default_dp_budget() -> usize {
    DEFAULT_DP_BUDGET
}
fn default_state_budget() -> usize {
    DEFAULT_STATE_BUDGET
}
fn default_method() -> OcMethod {
    OcMethod::MonteCarlo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntryConfig {
    pub bundle: Vec<f64>,
    pub period: u32,
    pub payment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    #[serde(default = "default_i_max")]
    pub i_max: u32,
    /// Absolute threshold; omitted means 1% of the first iteration's costs.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    #[serde(default = "default_state_budget")]
    pub state_budget: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            i_max: default_i_max(),
            gamma: None,
            n_samples: default_samples(),
            state_budget: default_state_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcConfig {
    #[serde(default = "default_method")]
    pub method: OcMethod,
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    #[serde(default)]
    pub payment_variant: PaymentVariant,
    #[serde(default = "default_enumeration_budget")]
    pub enumeration_budget: u64,
}

impl Default for OcConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            n_samples: default_samples(),
            payment_variant: PaymentVariant::Literal,
            enumeration_budget: default_enumeration_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_dp_budget")]
    pub state_budget: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            state_budget: default_dp_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub dimension: usize,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    pub initial_pool: Vec<f64>,
    pub catalog: Vec<CatalogEntryConfig>,
    /// One weight per catalog entry.
    pub request_weights: Vec<f64>,
    /// Probability of no request; omitted means `1 - Σ request_weights`.
    #[serde(default)]
    pub null_weight: Option<f64>,
    pub beta: f64,
    pub own_revenue_rates: Vec<f64>,
    pub mode: Mode,
    pub t_max: u32,
    #[serde(default = "default_bucket_width")]
    pub state_bucket_width: u32,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub oc: OcConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(compact.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks every field and builds the model. All problems found are
    /// reported together.
    pub fn build_model(&self) -> Result<Model> {
        let mut issues = Vec::new();
        if !(self.beta > 0.0 && self.beta < 1.0) {
            issues.push(Issue::new("beta", format!("must lie in the open interval (0, 1), got {}", self.beta)));
        }
        if self.t_max == 0 {
            issues.push(Issue::new("t_max", "must be at least 1"));
        }
        if self.state_bucket_width == 0 {
            issues.push(Issue::new("state_bucket_width", "must be at least 1"));
        }
        if self.learner.i_max == 0 {
            issues.push(Issue::new("learner.i_max", "must be at least 1"));
        }
        if let Some(g) = self.learner.gamma {
            if g.is_nan() || g <= 0.0 {
                issues.push(Issue::new("learner.gamma", "must be positive"));
            }
        }
        if self.learner.n_samples == 0 {
            issues.push(Issue::new("learner.n_samples", "must be at least 1"));
        }
        if self.oc.n_samples == 0 {
            issues.push(Issue::new("oc.n_samples", "must be at least 1"));
        }
        if self.oc.method == OcMethod::ClosedForm2step {
            issues.push(Issue::new("oc.method", "must be monte-carlo or enumeration"));
        }
        if self.own_revenue_rates.len() != self.dimension {
            issues.push(Issue::new(
                "own_revenue_rates",
                format!("expected {} rates, got {}", self.dimension, self.own_revenue_rates.len()),
            ));
        }
        for (i, c) in self.own_revenue_rates.iter().enumerate() {
            if !c.is_finite() || *c < 0.0 {
                issues.push(Issue::new(format!("own_revenue_rates[{i}]"), "must be a non-negative number"));
            }
        }

        let lattice = match Lattice::new(self.dimension, self.resolution) {
            Ok(l) => Some(l),
            Err(Error::InvalidConfig(mut v)) => {
                issues.append(&mut v);
                None
            }
            Err(e) => return Err(e),
        };
        let Some(lattice) = lattice else {
            return Err(Error::InvalidConfig(issues));
        };

        let pool = lattice.vector(&self.initial_pool).map_err(|e| Issue::new("initial_pool", e.to_string()));
        let mut entries = Vec::new();
        for (i, e) in self.catalog.iter().enumerate() {
            match lattice.vector(&e.bundle) {
                Ok(bundle) => entries.push(CatalogEntry {
                    bundle,
                    period: e.period,
                    payment: e.payment,
                }),
                Err(err) => issues.push(Issue::new(format!("catalog[{i}].bundle"), err.to_string())),
            }
        }
        let pool = match pool {
            Ok(p) => Some(p),
            Err(issue) => {
                issues.push(issue);
                None
            }
        };
        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }

        let catalog = Catalog::new(lattice, entries)?;
        let dist = RequestDistribution::new(&catalog, self.request_weights.clone(), self.null_weight)?;
        let params = EconomicParams::new(self.beta, self.own_revenue_rates.clone())?;
        Model::new(catalog, dist, params, self.mode, self.t_max, pool.expect("checked above"))?
            .with_bucket_width(self.state_bucket_width)
    }

    pub fn oc_settings(&self) -> OcSettings {
        OcSettings {
            method: self.oc.method,
            n_samples: self.oc.n_samples,
            variant: self.oc.payment_variant,
            seed: self.seed,
            enumeration_budget: self.oc.enumeration_budget,
        }
    }

    pub fn learner_settings(&self) -> LearnerSettings {
        LearnerSettings {
            i_max: self.learner.i_max,
            gamma: self.learner.gamma,
            n_samples: self.learner.n_samples,
            variant: self.oc.payment_variant,
            seed: self.seed,
            state_budget: self.learner.state_budget,
        }
    }
}
