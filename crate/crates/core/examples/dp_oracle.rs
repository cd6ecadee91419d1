//! Exact optimum by backward induction, and how far the learned rule is
//! from it.

use slice_admission::learner::learn_strategy;
use slice_admission::oracle::dp_solve;
use slice_admission::simulator::evaluate;
use slice_admission::strategy::{StateKey, TableKey};
use slice_admission::{Config, StrategyDescriptor};

fn main() -> slice_admission::Result<()> {
    let config = Config::from_json(include_str!("configs/toy1_horizon6.json"))?;
    let model = config.build_model()?;
    let policy = dp_solve(&model, config.oracle.state_budget)?;
    println!("V0 = {:.4} over {} states", policy.v0(), policy.values.len());

    let key = StateKey::of(&model, &model.initial_state());
    for r in model.offers_at(0) {
        let accept = policy.accepts(&TableKey::new(key.clone(), &r)).unwrap_or(false);
        println!("  t=0 offer {}: {}", r.bundle, if accept { "accept" } else { "decline" });
    }

    let (learned, _) = learn_strategy(&model, StrategyDescriptor::AlwaysAccept, &config.learner_settings())?;
    let report = evaluate(&model, &[("oc-optimal".into(), learned)], 5000, config.seed)?;
    let s = &report.strategies[0];
    println!("learned rule: {:.4} +- {:.4}, gap {:.4}", s.mean, s.std_error, policy.v0() - s.mean);
    Ok(())
}
