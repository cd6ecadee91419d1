//! The two-period closed form on the worked example, next to a full
//! enumeration of both periods.
//!
//! ```bash
//! cargo run --example two_step
//! ```

use slice_admission::opportunity_cost::{oc_two_step, payoff_two_step};
use slice_admission::oracle::two_step_enumerate;
use slice_admission::Config;

fn main() -> slice_admission::Result<()> {
    let text = include_str!("configs/toy1.json");
    let model = Config::from_json(text)?.build_model()?;
    let lattice = model.catalog.lattice();
    let pool = &model.initial_pool;

    for size in [0.4, 0.6] {
        let bundle = lattice.vector(&[size])?;
        let c = oc_two_step(&model, pool, &bundle)?;
        let gamma = payoff_two_step(&model, pool, &bundle)?;
        let rep = two_step_enumerate(&model, pool, &bundle)?;
        println!("bundle {size}: C1 = {c:.4}, payoff = {gamma:.4} -> {}", if gamma >= 0.0 { "accept" } else { "decline" });
        println!(
            "  enumerated accept - decline: {:.4} (t=1 greedy), {:.4} (t=1 optimal)",
            rep.difference_greedy, rep.difference_optimal
        );
    }
    Ok(())
}
