//! Compares a learned strategy with the baselines on common request streams.

use slice_admission::learner::learn_strategy;
use slice_admission::simulator::evaluate;
use slice_admission::{Config, StrategyDescriptor};

fn main() -> slice_admission::Result<()> {
    let config = Config::from_json(include_str!("configs/two_resources_expiring.json"))?;
    let model = config.build_model()?;
    let (learned, _) = learn_strategy(&model, StrategyDescriptor::AlwaysAccept, &config.learner_settings())?;

    let strategies = vec![
        ("oc-optimal".to_string(), learned),
        ("always-accept".to_string(), StrategyDescriptor::AlwaysAccept),
        ("never-accept".to_string(), StrategyDescriptor::NeverAccept),
        ("price>=3".to_string(), StrategyDescriptor::PriceThreshold { min_payment: 3.0 }),
    ];
    let report = evaluate(&model, &strategies, 2000, config.seed)?;
    for s in &report.strategies {
        println!("{:<14} mean {:>8.4}  95% CI [{:.4}, {:.4}]  accepted {:.2}", s.name, s.mean, s.ci95.0, s.ci95.1, s.mean_accepted);
    }
    for p in report.pairwise.iter().filter(|p| p.first == "oc-optimal") {
        println!("oc-optimal - {:<14} {:>8.4} +- {:.4}", p.second, p.mean_difference, p.std_error);
    }
    Ok(())
}
