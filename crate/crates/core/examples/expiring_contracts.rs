//! Contracts that release their bundle: a scripted run showing the release
//! and the reuse of the freed resources.

use slice_admission::simulator::{run, EventKind, RequestSource};
use slice_admission::{Config, Request, StrategyDescriptor};

fn main() -> slice_admission::Result<()> {
    let model = Config::from_json(include_str!("configs/two_resources_expiring.json"))?.build_model()?;
    let lattice = model.catalog.lattice();
    let big = lattice.vector(&[0.6, 0.5])?;
    let script = vec![
        Request::new(0, big.clone(), 2),
        Request::new(1, big.clone(), 2),
        Request::new(2, big, 2),
    ];
    let (result, events) = run(&model, &StrategyDescriptor::AlwaysAccept, &RequestSource::Scripted(script))?;
    for e in events.iter().filter(|e| e.kind != EventKind::PeriodIncome) {
        println!("t={} {:<16} bundle {:<6} idle {:<6} reserved {}", e.time, e.kind.as_str(), e.bundle, e.idle_pool, e.reserved);
    }
    println!("accepted {}, declined for lack of room {}", result.accepted, result.declined_inadmissible);
    Ok(())
}
