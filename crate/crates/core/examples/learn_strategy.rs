//! Iterates the opportunity-cost strategy to a fixed point and saves it.
//!
//! ```bash
//! cargo run --release --example learn_strategy -- strategy.json
//! ```

use slice_admission::document::{Provenance, StrategyDocument};
use slice_admission::learner::learn_strategy;
use slice_admission::{Config, StrategyDescriptor};

fn main() -> slice_admission::Result<()> {
    let config = Config::from_json(include_str!("configs/toy1_horizon6.json"))?;
    let model = config.build_model()?;
    let (strategy, report) = learn_strategy(&model, StrategyDescriptor::AlwaysAccept, &config.learner_settings())?;

    println!("gamma = {:.4}, converged = {}", report.gamma, report.converged);
    for it in &report.iterations {
        let metric = it.metric.map_or("-".into(), |m| format!("{m:.4}"));
        println!("iteration {:>2}: costs at t=0 {:?}, metric {metric}, {} decisions changed", it.iteration, it.oc_at_initial, it.decision_changes);
    }

    if let Some(path) = std::env::args().nth(1) {
        let doc = StrategyDocument::from_strategy(&strategy, &model)
            .with_report(&report)
            .with_provenance(Provenance::new(config.hash(), config.seed));
        std::fs::write(&path, doc.to_json()).expect("write strategy");
        println!("wrote {path}");
    }
    Ok(())
}
