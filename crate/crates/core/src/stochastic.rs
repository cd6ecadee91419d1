//! Request-arrival statistics: the per-period measure `g`, the conditional
//! measure `f` over a feasible set, and reproducible request streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{Catalog, FeasibleSet};
use crate::error::{Error, Issue, Result};
use crate::market::Request;
use crate::resource::ResourceVector;

/// Probability of each catalog entry arriving in one unit period, plus the
/// probability of no request. At most one request arrives per period.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestDistribution {
    null_weight: f64,
    weights: Vec<f64>,
    /// Marginal `g` over [`Catalog::bundles`].
    marginal: Vec<f64>,
}

impl RequestDistribution {
    /// Builds the distribution for `catalog`. With `null_weight` omitted the
    /// null probability is whatever mass the entries leave over; with it
    /// given, all weights together must sum to one (and are renormalized
    /// to absorb rounding).
    pub fn new(catalog: &Catalog, weights: Vec<f64>, null_weight: Option<f64>) -> Result<Self> {
        let mut issues = Vec::new();
        if weights.len() != catalog.entries().len() {
            issues.push(Issue::new(
                "request_weights",
                format!(
                    "expected {} weights (one per catalog entry), got {}",
                    catalog.entries().len(),
                    weights.len()
                ),
            ));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                issues.push(Issue::new(format!("request_weights[{i}]"), "must be a non-negative number"));
            }
        }
        if let Some(n) = null_weight {
            if !n.is_finite() || n < 0.0 {
                issues.push(Issue::new("null_weight", "must be a non-negative number"));
            }
        }
        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }

        let entry_total: f64 = weights.iter().sum();
        let (null_weight, weights) = match null_weight {
            Some(n) => {
                let total = n + entry_total;
                if (total - 1.0).abs() > 1e-6 {
                    return Err(Error::invalid(
                        "request_weights",
                        format!("weights including null sum to {total}, expected 1"),
                    ));
                }
                (n / total, weights.iter().map(|w| w / total).collect::<Vec<_>>())
            }
            None => {
                if entry_total > 1.0 + 1e-9 {
                    return Err(Error::invalid(
                        "request_weights",
                        format!("entry weights sum to {entry_total}, which exceeds 1"),
                    ));
                }
                let scale = entry_total.max(1.0);
                let weights: Vec<f64> = weights.iter().map(|w| w / scale).collect();
                let rest: f64 = weights.iter().sum();
                ((1.0 - rest).max(0.0), weights)
            }
        };

        let mut marginal = vec![0.0; catalog.bundles().len()];
        marginal[0] = null_weight;
        for (i, w) in weights.iter().enumerate() {
            marginal[catalog.bundle_of_entry(i)] += w;
        }
        Ok(Self {
            null_weight,
            weights,
            marginal,
        })
    }

    pub fn null_weight(&self) -> f64 {
        self.null_weight
    }

    /// Weight of each catalog entry.
    pub fn entry_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `g` indexed like [`Catalog::bundles`].
    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// `g(bundle)`, marginalized over periods.
    pub fn g(&self, catalog: &Catalog, bundle: &ResourceVector) -> Result<f64> {
        catalog
            .bundle_index(bundle)
            .map(|i| self.marginal[i])
            .ok_or_else(|| Error::UnknownBundle(bundle.clone()))
    }

    /// Picks an outcome from a uniform draw in `[0, 1)`: `None` is the null
    /// request, `Some(i)` is catalog entry `i`.
    pub fn pick(&self, u: f64) -> Option<usize> {
        let mut acc = self.null_weight;
        if u < acc {
            return None;
        }
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return Some(i);
            }
        }
        // Rounding left a sliver above the last cumulative weight.
        self.weights
            .iter()
            .rposition(|&w| w > 0.0)
    }
}

/// `f(ω, Ω)` by bundle index: oversize requests are folded into null.
pub fn conditional_measure_index(dist: &RequestDistribution, bundle: usize, feasible: &FeasibleSet) -> f64 {
    let g = dist.marginal();
    if bundle == 0 {
        g[0] + (1..g.len())
            .filter(|&i| !feasible.contains_index(i))
            .map(|i| g[i])
            .sum::<f64>()
    } else if feasible.contains_index(bundle) {
        g[bundle]
    } else {
        0.0
    }
}

/// `f(ω, Ω)`: zero for non-null bundles outside `feasible`, `g(ω)` for those
/// inside, and the null request absorbs all oversize mass.
pub fn conditional_measure(
    catalog: &Catalog,
    dist: &RequestDistribution,
    bundle: &ResourceVector,
    feasible: &FeasibleSet,
) -> Result<f64> {
    let idx = catalog
        .bundle_index(bundle)
        .ok_or_else(|| Error::UnknownBundle(bundle.clone()))?;
    Ok(conditional_measure_index(dist, idx, feasible))
}

/// Mixes a master seed with a purpose tag into an independent seed.
pub fn derive_seed(master: u64, purpose: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(purpose);
    rng.next_u64()
}

/// One trajectory's random stream.
///
/// The draw for period `t` is read at a fixed position of a ChaCha stream
/// selected by `(seed, stream)`, so it depends only on `(seed, stream, t)`:
/// not on how many draws came before or which thread runs the trajectory.
#[derive(Debug, Clone)]
pub struct RequestStream {
    rng: ChaCha8Rng,
}

impl RequestStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform draw in `[0, 1)` tied to period `t`.
    pub fn uniform_at(&mut self, t: u32) -> f64 {
        self.rng.set_word_pos(u128::from(t) * 4);
        self.rng.random::<f64>()
    }
}

/// Draws the (possibly null) request arriving at `t`. The period is the
/// catalog entry's own; non-expiring models override it afterwards.
pub fn sample_request(
    catalog: &Catalog,
    dist: &RequestDistribution,
    t: u32,
    stream: &mut RequestStream,
) -> Request {
    let u = stream.uniform_at(t);
    match dist.pick(u) {
        None => Request::null(t, catalog.lattice().dimension),
        Some(i) => {
            let e = &catalog.entries()[i];
            Request::new(t, e.bundle.clone(), e.period)
        }
    }
}
