//! One seeded trajectory, printed as CSV.

use slice_admission::simulator::{run, write_trace_csv, RequestSource};
use slice_admission::{Config, StrategyDescriptor};

fn main() -> slice_admission::Result<()> {
    let config = Config::from_json(include_str!("configs/toy1_horizon6.json"))?;
    let model = config.build_model()?;
    let source = RequestSource::Sampled { seed: config.seed, stream: 0 };
    let (result, events) = run(&model, &StrategyDescriptor::PriceThreshold { min_payment: 2.5 }, &source)?;

    write_trace_csv(&events, std::io::stdout())?;
    println!(
        "\nprofit {:.4} = payments {:.4} + own use {:.4}; {} accepted of {} requests",
        result.profit, result.payments_pv, result.own_revenue_pv, result.accepted, result.requests
    );
    Ok(())
}
