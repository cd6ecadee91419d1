//! The operator's contract menu and the feasible-bundle map `G`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Issue, Result};
use crate::resource::{Lattice, ResourceVector};

/// One contract option: a bundle rented for `period` unit periods at
/// `payment` per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub bundle: ResourceVector,
    pub period: u32,
    pub payment: f64,
}

/// Fixed menu of contract options. Bundle index 0 is always the null bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    lattice: Lattice,
    entries: Vec<CatalogEntry>,
    bundles: Vec<ResourceVector>,
    entry_bundle: Vec<usize>,
}

impl Catalog {
    pub fn new(lattice: Lattice, entries: Vec<CatalogEntry>) -> Result<Self> {
        let mut issues = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            let field = format!("catalog[{i}]");
            if !lattice.contains(&e.bundle) {
                issues.push(Issue::new(&field, "bundle is outside the resource space"));
            }
            if e.bundle.is_zero() {
                issues.push(Issue::new(
                    &field,
                    "the null bundle is implicit and must not be listed",
                ));
            }
            if e.period == 0 {
                issues.push(Issue::new(&field, "period must be at least 1"));
            }
            if !e.payment.is_finite() || e.payment <= 0.0 {
                issues.push(Issue::new(
                    &field,
                    "payment must be positive for a non-null bundle",
                ));
            }
            if !seen.insert((e.bundle.clone(), e.period)) {
                issues.push(Issue::new(&field, "duplicate (bundle, period) pair"));
            }
        }
        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }

        let mut distinct: BTreeSet<ResourceVector> = entries.iter().map(|e| e.bundle.clone()).collect();
        distinct.remove(&lattice.zero());
        let mut bundles = vec![lattice.zero()];
        bundles.extend(distinct);
        let entry_bundle = entries
            .iter()
            .map(|e| bundles.iter().position(|b| *b == e.bundle).unwrap())
            .collect();
        Ok(Self {
            lattice,
            entries,
            bundles,
            entry_bundle,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    /// The distinct bundles `Ω₀`, null first.
    pub fn bundles(&self) -> &[ResourceVector] {
        &self.bundles
    }

    pub fn null_bundle(&self) -> &ResourceVector {
        &self.bundles[0]
    }

    pub fn bundle_index(&self, bundle: &ResourceVector) -> Option<usize> {
        self.bundles.iter().position(|b| b == bundle)
    }

    /// Index into [`Catalog::bundles`] of the bundle of entry `entry`.
    pub fn bundle_of_entry(&self, entry: usize) -> usize {
        self.entry_bundle[entry]
    }

    pub fn entry_index(&self, bundle: &ResourceVector, period: u32) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.bundle == *bundle && e.period == period)
    }

    /// Sorted set of contract periods.
    pub fn periods(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.entries.iter().map(|e| e.period).collect();
        set.into_iter().collect()
    }

    /// The periodic payment of a listed option; zero for the null bundle.
    pub fn price(&self, bundle: &ResourceVector, period: u32) -> Result<f64> {
        if bundle.is_zero() {
            return Ok(0.0);
        }
        self.entry_index(bundle, period)
            .map(|i| self.entries[i].payment)
            .ok_or_else(|| Error::UnknownEntry {
                bundle: bundle.clone(),
                period,
            })
    }

    /// Periodic payment for `bundle` over an arbitrary period.
    ///
    /// Listed options resolve exactly. A period that is not listed still
    /// resolves when the bundle is priced flat (every listed period carries
    /// the same payment), which is what non-expiring contracts of length
    /// `t_max - t` need.
    pub fn tariff(&self, bundle: &ResourceVector, period: u32) -> Result<f64> {
        if bundle.is_zero() {
            return Ok(0.0);
        }
        if let Ok(p) = self.price(bundle, period) {
            return Ok(p);
        }
        let mut payments = self
            .entries
            .iter()
            .filter(|e| e.bundle == *bundle)
            .map(|e| e.payment);
        let first = payments.next().ok_or_else(|| Error::UnknownBundle(bundle.clone()))?;
        if payments.all(|p| p == first) {
            Ok(first)
        } else {
            Err(Error::UnknownEntry {
                bundle: bundle.clone(),
                period,
            })
        }
    }

    pub fn max_payment(&self) -> f64 {
        self.entries.iter().map(|e| e.payment).fold(0.0, f64::max)
    }
}

/// A subset of `Ω₀`, stored as membership flags over [`Catalog::bundles`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeasibleSet {
    members: Vec<bool>,
}

impl FeasibleSet {
    /// Only the null bundle. This is `G` of a pool that went negative.
    pub fn null_only(catalog: &Catalog) -> Self {
        let mut members = vec![false; catalog.bundles().len()];
        members[0] = true;
        Self { members }
    }

    /// Every bundle of the catalog: `G` of the full pool.
    pub fn all(catalog: &Catalog) -> Self {
        Self {
            members: vec![true; catalog.bundles().len()],
        }
    }

    pub fn contains_index(&self, bundle: usize) -> bool {
        self.members.get(bundle).copied().unwrap_or(false)
    }

    pub fn contains(&self, catalog: &Catalog, bundle: &ResourceVector) -> bool {
        catalog
            .bundle_index(bundle)
            .is_some_and(|i| self.contains_index(i))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset_of(&self, other: &FeasibleSet) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }

    pub fn bundles<'a>(&'a self, catalog: &'a Catalog) -> impl Iterator<Item = &'a ResourceVector> + 'a {
        self.indices().map(move |i| &catalog.bundles()[i])
    }
}

/// `G(pool)`: the catalog bundles that fit in `pool`, always including null.
pub fn feasible_set(pool: &ResourceVector, catalog: &Catalog) -> FeasibleSet {
    FeasibleSet {
        members: catalog.bundles().iter().map(|b| b.fits_in(pool)).collect(),
    }
}
