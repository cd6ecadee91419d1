//! The `slicectl` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::Config;
use crate::document::{Provenance, StrategyDocument};
use crate::error::{Error, Result};
use crate::learner::learn_strategy;
use crate::model::Model;
use crate::oracle::{dp_solve, two_step_enumerate, TwoStepReport};
use crate::simulator::{self, ComparisonReport, RequestSource, RunResult};
use crate::strategy::{StateKey, StrategyDescriptor, TableKey};

#[derive(Debug, Parser)]
#[command(name = "slicectl", version, about = "Admission control for tenant slice requests")]
pub struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Builtin name (always-accept, never-accept, price-threshold:X,
        /// oc-optimal) or a strategy document.
        #[arg(long)]
        strategy: String,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Trace CSV.
        #[arg(long)]
        out: PathBuf,
        /// Run summary JSON; defaults to the trace path with a
        /// `.result.json` extension.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Learn an opportunity-cost strategy.
    Learn {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare strategies on common request streams.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "strategy", required = true)]
        strategies: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        n_runs: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the instance exactly and measure strategy gaps.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "strategy")]
        strategies: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        n_runs: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_text(path, &text)
}

/// A parsed config with its model.
struct Loaded {
    config: Config,
    model: Model,
}

impl Loaded {
    fn from_path(path: &Path, seed: Option<u64>) -> Result<Self> {
        let mut config = Config::from_json(&read_text(path)?)?;
        if let Some(s) = seed {
            config.seed = s;
        }
        let model = config.build_model()?;
        Ok(Self { config, model })
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(self.config.hash(), self.config.seed)
    }
}

/// Resolves a builtin name or loads a strategy document.
pub fn resolve_strategy(spec: &str, config: &Config, model: &Model) -> Result<StrategyDescriptor> {
    match spec {
        "always-accept" => return Ok(StrategyDescriptor::AlwaysAccept),
        "never-accept" => return Ok(StrategyDescriptor::NeverAccept),
        "oc-optimal" => {
            return Ok(StrategyDescriptor::oc_optimal_on_demand(
                StrategyDescriptor::AlwaysAccept,
                config.oc_settings(),
                model.horizon,
            ))
        }
        _ => {}
    }
    if let Some(x) = spec.strip_prefix("price-threshold:") {
        let min_payment: f64 = x
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("price-threshold needs a number, got {x:?}")))?;
        return Ok(StrategyDescriptor::PriceThreshold { min_payment });
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "{spec:?} is neither a builtin strategy nor an existing file"
        )));
    }
    StrategyDocument::from_json(&read_text(path)?)?.to_strategy(model)
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    provenance: Provenance,
    strategy: &'a str,
    #[serde(flatten)]
    result: &'a RunResult,
}

fn cmd_simulate(config: &Path, strategy: &str, seed: Option<u64>, out: &Path, result: Option<&Path>) -> Result<()> {
    let loaded = Loaded::from_path(config, seed)?;
    let s = resolve_strategy(strategy, &loaded.config, &loaded.model)?;
    let source = RequestSource::Sampled {
        seed: loaded.config.seed,
        stream: 0,
    };
    let (run, events) = simulator::run(&loaded.model, &s, &source)?;
    let file = fs::File::create(out).map_err(|e| io_error(out, e))?;
    simulator::write_trace_csv(&events, file).map_err(|e| match e {
        Error::Io { source, .. } => io_error(out, source),
        other => other,
    })?;
    let result_path = result.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("result.json"));
    write_json(
        &result_path,
        &SimulateReport {
            provenance: loaded.provenance(),
            strategy,
            result: &run,
        },
    )
}

fn cmd_learn(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let loaded = Loaded::from_path(config, seed)?;
    let (strategy, report) = learn_strategy(
        &loaded.model,
        StrategyDescriptor::AlwaysAccept,
        &loaded.config.learner_settings(),
    )?;
    let doc = StrategyDocument::from_strategy(&strategy, &loaded.model)
        .with_report(&report)
        .with_provenance(loaded.provenance());
    write_text(out, &doc.to_json())
}

#[derive(Serialize)]
struct EvaluateReport {
    provenance: Provenance,
    #[serde(flatten)]
    comparison: ComparisonReport,
}

fn load_strategies(loaded: &Loaded, specs: &[String]) -> Result<Vec<(String, StrategyDescriptor)>> {
    specs
        .iter()
        .map(|spec| Ok((spec.clone(), resolve_strategy(spec, &loaded.config, &loaded.model)?)))
        .collect()
}

fn cmd_evaluate(config: &Path, specs: &[String], n_runs: u64, seed: Option<u64>, out: &Path) -> Result<()> {
    let loaded = Loaded::from_path(config, seed)?;
    let strategies = load_strategies(&loaded, specs)?;
    let comparison = simulator::evaluate(&loaded.model, &strategies, n_runs, loaded.config.seed)?;
    write_json(
        out,
        &EvaluateReport {
            provenance: loaded.provenance(),
            comparison,
        },
    )
}

#[derive(Debug, Serialize)]
struct OfferDecision {
    bundle: Vec<f64>,
    period: u32,
    accept: bool,
}

#[derive(Debug, Serialize)]
struct PolicySummary {
    states: usize,
    decision_cells: usize,
    accept_cells: usize,
}

#[derive(Debug, Serialize)]
struct Gap {
    strategy: String,
    mean_profit: f64,
    std_error: f64,
    /// `V0 - mean`.
    gap: f64,
    gap_ci95: (f64, f64),
}

#[derive(Debug, Serialize)]
struct TwoStepEntry {
    bundle: Vec<f64>,
    #[serde(flatten)]
    report: TwoStepReport,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    provenance: Provenance,
    v0: f64,
    policy: PolicySummary,
    initial_decisions: Vec<OfferDecision>,
    gaps: Vec<Gap>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    two_step: Vec<TwoStepEntry>,
}

fn cmd_oracle(config: &Path, specs: &[String], n_runs: u64, seed: Option<u64>, out: &Path) -> Result<()> {
    let loaded = Loaded::from_path(config, seed)?;
    let model = &loaded.model;
    let strategies = load_strategies(&loaded, specs)?;
    let policy = dp_solve(model, loaded.config.oracle.state_budget)?;
    let v0 = policy.v0();
    let lattice = model.catalog.lattice();

    let init = model.initial_state();
    let init_key = StateKey::of(model, &init);
    let initial_decisions = model
        .offers_at(0)
        .iter()
        .filter_map(|r| {
            policy.accepts(&TableKey::new(init_key.clone(), r)).map(|accept| OfferDecision {
                bundle: lattice.fractions(&r.bundle),
                period: r.period,
                accept,
            })
        })
        .collect();

    let mut gaps = Vec::new();
    if !strategies.is_empty() {
        let cmp = simulator::evaluate(model, &strategies, n_runs, loaded.config.seed)?;
        for s in cmp.strategies {
            gaps.push(Gap {
                gap: v0 - s.mean,
                gap_ci95: (v0 - s.ci95.1, v0 - s.ci95.0),
                strategy: s.name,
                mean_profit: s.mean,
                std_error: s.std_error,
            });
        }
    }

    let mut two_step = Vec::new();
    if model.horizon == 2 {
        for w in model.catalog.bundles().iter().skip(1) {
            if w.fits_in(&model.initial_pool) {
                two_step.push(TwoStepEntry {
                    bundle: lattice.fractions(w),
                    report: two_step_enumerate(model, &model.initial_pool, w)?,
                });
            }
        }
    }

    let report = OracleReport {
        provenance: loaded.provenance(),
        v0,
        policy: PolicySummary {
            states: policy.values.len(),
            decision_cells: policy.decisions.len(),
            accept_cells: policy.decisions.values().filter(|a| **a).count(),
        },
        initial_decisions,
        gaps,
        two_step,
    };
    write_json(out, &report)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            strategy,
            seed,
            out,
            result,
        } => cmd_simulate(&config, &strategy, seed, &out, result.as_deref()),
        Command::Learn { config, seed, out } => cmd_learn(&config, seed, &out),
        Command::Evaluate {
            config,
            strategies,
            n_runs,
            seed,
            out,
        } => cmd_evaluate(&config, &strategies, n_runs, seed, &out),
        Command::Oracle {
            config,
            strategies,
            n_runs,
            seed,
            out,
        } => cmd_oracle(&config, &strategies, n_runs, seed, &out),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => Err(Error::InvalidArgument(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(cli),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
