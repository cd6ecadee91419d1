//! Small instances shared by unit tests.

use crate::catalog::{Catalog, CatalogEntry};
use crate::economics::EconomicParams;
use crate::market::Mode;
use crate::model::Model;
use crate::resource::{Lattice, ResourceVector};
use crate::stochastic::RequestDistribution;

pub fn lattice() -> Lattice {
    Lattice::new(1, 100).unwrap()
}

pub fn v(x: f64) -> ResourceVector {
    lattice().vector(&[x]).unwrap()
}

/// Pool 1.0; A = 0.4 pays 2, B = 0.6 pays 3 (flat); g = (0.5, 0.3, 0.2);
/// β = 0.9. `periods` lists the contract lengths of each bundle.
pub fn toy(mode: Mode, t_max: u32, rate: f64, periods: &[u32], null_weight: f64) -> Model {
    let l = lattice();
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    let share = (1.0 - null_weight) / 0.5 / periods.len() as f64;
    for &t in periods {
        entries.push(CatalogEntry { bundle: v(0.4), period: t, payment: 2.0 });
        weights.push(0.3 * share);
        entries.push(CatalogEntry { bundle: v(0.6), period: t, payment: 3.0 });
        weights.push(0.2 * share);
    }
    let catalog = Catalog::new(l, entries).unwrap();
    let dist = RequestDistribution::new(&catalog, weights, Some(null_weight)).unwrap();
    let params = EconomicParams::new(0.9, vec![rate]).unwrap();
    Model::new(catalog, dist, params, mode, t_max, v(1.0)).unwrap()
}

pub fn toy1(t_max: u32) -> Model {
    toy(Mode::NonExpiring, t_max, 4.0, &[1], 0.5)
}
