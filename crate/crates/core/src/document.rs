//! Versioned JSON documents for strategies.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::learner::{ConvergenceReport, IterationRecord};
use crate::market::Mode;
use crate::model::Model;
use crate::opportunity_cost::OcEstimate;
use crate::strategy::{OcPolicy, OcSettings, OcTable, StrategyDescriptor, TableKey};

pub const STRATEGY_SCHEMA_VERSION: &str = "1";

/// Where an output came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcTableRow {
    #[serde(flatten)]
    pub key: TableKey,
    #[serde(flatten)]
    pub estimate: OcEstimate,
}

/// One strategy without its base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyLayer {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_payment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oc_settings: Option<OcSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_iteration: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oc_table: Vec<OcTableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDocument {
    pub schema_version: String,
    pub horizon: u32,
    pub mode: Mode,
    pub resolution: u32,
    #[serde(flatten)]
    pub top: StrategyLayer,
    /// Bases of the top strategy, outermost first. A threshold strategy
    /// falls back to its base to estimate costs its table lacks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_chain: Vec<StrategyLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub convergence_history: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn layer_of(s: &StrategyDescriptor) -> (StrategyLayer, Option<&StrategyDescriptor>) {
    let mut layer = StrategyLayer {
        kind: s.kind().to_string(),
        min_payment: None,
        oc_settings: None,
        table_iteration: None,
        oc_table: Vec::new(),
    };
    match s {
        StrategyDescriptor::AlwaysAccept | StrategyDescriptor::NeverAccept => (layer, None),
        StrategyDescriptor::PriceThreshold { min_payment } => {
            layer.min_payment = Some(*min_payment);
            (layer, None)
        }
        StrategyDescriptor::OcOptimal(p) => {
            layer.oc_settings = Some(p.settings);
            layer.table_iteration = Some(p.table.iteration);
            layer.oc_table = p
                .table
                .entries
                .iter()
                .map(|(k, e)| OcTableRow {
                    key: k.clone(),
                    estimate: *e,
                })
                .collect();
            (layer, Some(&p.base))
        }
    }
}

impl StrategyDocument {
    pub fn from_strategy(strategy: &StrategyDescriptor, model: &Model) -> Self {
        let (top, mut next) = layer_of(strategy);
        let mut base_chain = Vec::new();
        while let Some(s) = next {
            let (layer, n) = layer_of(s);
            base_chain.push(layer);
            next = n;
        }
        Self {
            schema_version: STRATEGY_SCHEMA_VERSION.to_string(),
            horizon: model.horizon,
            mode: model.mode,
            resolution: model.catalog.lattice().resolution,
            top,
            base_chain,
            converged: None,
            gamma: None,
            convergence_history: Vec::new(),
            provenance: None,
        }
    }

    pub fn with_report(mut self, report: &ConvergenceReport) -> Self {
        self.converged = Some(report.converged);
        self.gamma = Some(report.gamma);
        self.convergence_history = report.iterations.clone();
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy document serializes")
    }

    /// Parses a document, checking the schema version before the body.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Malformed("a strategy document must be a JSON object".into()))?;
        let version = match obj.get("schema_version") {
            None => return Err(Error::Malformed("missing schema_version".into())),
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            Some(other) => return Err(Error::Malformed(format!("schema_version must be a string, got {other}"))),
        };
        if version != STRATEGY_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: version,
                supported: STRATEGY_SCHEMA_VERSION.to_string(),
            });
        }
        let mut doc: StrategyDocument =
            serde_json::from_value(value).map_err(|e| Error::Malformed(e.to_string()))?;
        doc.schema_version = version;
        Ok(doc)
    }

    /// Rebuilds the strategy, checking that it was made for a compatible
    /// model.
    pub fn to_strategy(&self, model: &Model) -> Result<StrategyDescriptor> {
        let mut mismatches = Vec::new();
        if self.mode != model.mode {
            mismatches.push(format!("mode {} vs {}", self.mode, model.mode));
        }
        if self.resolution != model.catalog.lattice().resolution {
            mismatches.push(format!("resolution {} vs {}", self.resolution, model.catalog.lattice().resolution));
        }
        if self.horizon != model.horizon {
            mismatches.push(format!("horizon {} vs {}", self.horizon, model.horizon));
        }
        if !mismatches.is_empty() {
            return Err(Error::invalid(
                "strategy",
                format!("document does not match the config: {}", mismatches.join(", ")),
            ));
        }
        self.to_descriptor()
    }

    /// Rebuilds the strategy without consulting a model.
    pub fn to_descriptor(&self) -> Result<StrategyDescriptor> {
        let mut layers: Vec<&StrategyLayer> = std::iter::once(&self.top).chain(&self.base_chain).collect();
        let innermost = layers.pop().expect("at least the top layer");
        let mut strategy = build_layer(innermost, None, self.horizon)?;
        while let Some(layer) = layers.pop() {
            strategy = build_layer(layer, Some(strategy), self.horizon)?;
        }
        Ok(strategy)
    }
}

fn build_layer(layer: &StrategyLayer, base: Option<StrategyDescriptor>, horizon: u32) -> Result<StrategyDescriptor> {
    let leaf = |s: StrategyDescriptor| {
        if base.is_some() {
            Err(Error::Malformed(format!("{} strategy cannot have a base", layer.kind)))
        } else {
            Ok(s)
        }
    };
    match layer.kind.as_str() {
        "always-accept" => leaf(StrategyDescriptor::AlwaysAccept),
        "never-accept" => leaf(StrategyDescriptor::NeverAccept),
        "price-threshold" => {
            let min_payment = layer
                .min_payment
                .ok_or_else(|| Error::Malformed("price-threshold needs min_payment".into()))?;
            leaf(StrategyDescriptor::PriceThreshold { min_payment })
        }
        "oc-optimal" => {
            let base = base.ok_or_else(|| Error::Malformed("oc-optimal needs a base strategy".into()))?;
            let settings = layer
                .oc_settings
                .ok_or_else(|| Error::Malformed("oc-optimal needs oc_settings".into()))?;
            let mut table = OcTable::new(horizon, layer.table_iteration.unwrap_or(0));
            for row in &layer.oc_table {
                table.insert(row.key.clone(), row.estimate);
            }
            Ok(StrategyDescriptor::OcOptimal(Box::new(OcPolicy { table, base, settings })))
        }
        other => Err(Error::Malformed(format!("unknown strategy kind {other:?}"))),
    }
}

/// Serializes a strategy to its JSON document.
pub fn serialize_strategy(strategy: &StrategyDescriptor, model: &Model) -> String {
    StrategyDocument::from_strategy(strategy, model).to_json()
}

/// Parses a strategy document for `model`.
pub fn deserialize_strategy(text: &str, model: &Model) -> Result<StrategyDescriptor> {
    StrategyDocument::from_json(text)?.to_strategy(model)
}
