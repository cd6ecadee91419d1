//! Opportunity cost over a longer horizon: exact enumeration against Monte
//! Carlo, under two different future strategies.

use slice_admission::opportunity_cost::{oc_exact_enumeration, oc_monte_carlo, PaymentVariant};
use slice_admission::{Config, StrategyDescriptor};

fn main() -> slice_admission::Result<()> {
    let model = Config::from_json(include_str!("configs/toy1_horizon6.json"))?.build_model()?;
    let state = model.initial_state();

    for future in [StrategyDescriptor::AlwaysAccept, StrategyDescriptor::NeverAccept] {
        println!("future decisions: {}", future.kind());
        for request in model.offers_at(0) {
            let exact = oc_exact_enumeration(&model, &state, &request, &future, PaymentVariant::Literal, 10_000_000)?;
            let mc = oc_monte_carlo(&model, &state, &request, &future, PaymentVariant::Literal, 20_000, 1)?;
            println!(
                "  bundle {} for {} periods: exact {:.4}, monte carlo {:.4} +- {:.4}",
                request.bundle, request.period, exact, mc.value, mc.std_error
            );
        }
    }
    Ok(())
}
