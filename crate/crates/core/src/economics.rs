//! Prices, own-slice revenue and present values of payment streams.

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::resource::ResourceVector;

/// Discount factor and the linear own-revenue rates `c` (money per period
/// per unit of each resource type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    pub beta: f64,
    pub own_revenue_rates: Vec<f64>,
}

impl EconomicParams {
    pub fn new(beta: f64, own_revenue_rates: Vec<f64>) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1), got {beta}")));
        }
        if let Some(i) = own_revenue_rates.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid(
                format!("own_revenue_rates[{i}]"),
                "must be a non-negative number",
            ));
        }
        Ok(Self {
            beta,
            own_revenue_rates,
        })
    }
}

/// `Σ_{k=0}^{periods-1} β^k`: the present value of one unit paid at the
/// start of each of `periods` periods.
pub fn annuity_factor(beta: f64, periods: u32) -> f64 {
    let mut sum = 0.0;
    let mut w = 1.0;
    for _ in 0..periods {
        sum += w;
        w *= beta;
    }
    sum
}

/// Periodic payment of a listed option; zero for the null bundle.
pub fn price(bundle: &ResourceVector, period: u32, catalog: &Catalog) -> Result<f64> {
    catalog.price(bundle, period)
}

/// `q(ω) = c · ω`.
pub fn own_revenue(bundle: &ResourceVector, params: &EconomicParams, catalog: &Catalog) -> f64 {
    bundle.dot(&params.own_revenue_rates, catalog.lattice().resolution)
}

/// Present value of `period` payments of `p(ω, period)`, the first one
/// undiscounted. Unlisted periods resolve through [`Catalog::tariff`].
pub fn pv_payments(
    bundle: &ResourceVector,
    period: u32,
    params: &EconomicParams,
    catalog: &Catalog,
) -> Result<f64> {
    Ok(catalog.tariff(bundle, period)? * annuity_factor(params.beta, period))
}

/// Present value of using `bundle` for the operator's own slices over
/// `period` periods.
pub fn pv_own_revenue(
    bundle: &ResourceVector,
    period: u32,
    params: &EconomicParams,
    catalog: &Catalog,
) -> f64 {
    own_revenue(bundle, params, catalog) * annuity_factor(params.beta, period)
}
