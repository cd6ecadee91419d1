//! Resource vectors on the integer lattice.
//!
//! Every pool and bundle is a point of `[0,1]^N`, stored as integer multiples
//! of `1/D`. Keeping the lattice integral makes pool arithmetic, feasibility
//! tests and state keys exact.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when snapping a fractional amount to the lattice.
const SNAP_TOLERANCE: f64 = 1e-9;

/// Shape shared by all vectors of one model instance: `N` resource types at
/// resolution `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub dimension: usize,
    pub resolution: u32,
}

impl Lattice {
    pub fn new(dimension: usize, resolution: u32) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if resolution == 0 {
            return Err(Error::invalid("resolution", "must be at least 1"));
        }
        Ok(Self {
            dimension,
            resolution,
        })
    }

    pub fn zero(&self) -> ResourceVector {
        ResourceVector::zero(self.dimension)
    }

    /// The full normalized pool `(1, ..., 1)`.
    pub fn full(&self) -> ResourceVector {
        ResourceVector {
            units: vec![self.resolution; self.dimension],
        }
    }

    /// Snaps fractions in `[0,1]` to the lattice, rejecting values that are
    /// not multiples of `1/D`.
    pub fn vector(&self, fractions: &[f64]) -> Result<ResourceVector> {
        if fractions.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: fractions.len(),
            });
        }
        let d = f64::from(self.resolution);
        let units = fractions
            .iter()
            .map(|&x| {
                if !x.is_finite() || !(0.0..=1.0 + SNAP_TOLERANCE).contains(&x) {
                    return Err(Error::InvalidArgument(format!(
                        "resource amount {x} is outside [0, 1]"
                    )));
                }
                let scaled = x * d;
                let rounded = scaled.round();
                if (scaled - rounded).abs() > SNAP_TOLERANCE * d.max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "resource amount {x} is not a multiple of 1/{}",
                        self.resolution
                    )));
                }
                Ok(rounded as u32)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResourceVector { units })
    }

    pub fn fractions(&self, v: &ResourceVector) -> Vec<f64> {
        let d = f64::from(self.resolution);
        v.units.iter().map(|&u| f64::from(u) / d).collect()
    }

    /// Checks dimension and the `[0,1]^N` bound.
    pub fn contains(&self, v: &ResourceVector) -> bool {
        v.units.len() == self.dimension && v.units.iter().all(|&u| u <= self.resolution)
    }
}

/// A point of the resource lattice, in units of `1/D` per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceVector {
    units: Vec<u32>,
}

impl ResourceVector {
    pub fn zero(dimension: usize) -> Self {
        Self {
            units: vec![0; dimension],
        }
    }

    pub fn from_units(units: Vec<u32>) -> Self {
        Self { units }
    }

    pub fn units(&self) -> &[u32] {
        &self.units
    }

    pub fn dimension(&self) -> usize {
        self.units.len()
    }

    pub fn is_zero(&self) -> bool {
        self.units.iter().all(|&u| u == 0)
    }

    /// Componentwise `self <= other`.
    pub fn fits_in(&self, other: &ResourceVector) -> bool {
        debug_assert_eq!(self.units.len(), other.units.len());
        self.units.iter().zip(&other.units).all(|(a, b)| a <= b)
    }

    /// Componentwise partial order; `None` when the vectors are incomparable.
    pub fn partial_cmp_componentwise(&self, other: &ResourceVector) -> Option<Ordering> {
        match (self.fits_in(other), other.fits_in(self)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    /// Exact difference; fails if any component would go negative.
    pub fn checked_sub(&self, bundle: &ResourceVector) -> Result<ResourceVector> {
        if self.units.len() != bundle.units.len() {
            return Err(Error::DimensionMismatch {
                expected: self.units.len(),
                got: bundle.units.len(),
            });
        }
        self.units
            .iter()
            .zip(&bundle.units)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(|units| ResourceVector { units })
            .ok_or_else(|| Error::InfeasibleSubtraction {
                pool: self.clone(),
                bundle: bundle.clone(),
            })
    }

    pub fn add(&self, other: &ResourceVector) -> ResourceVector {
        debug_assert_eq!(self.units.len(), other.units.len());
        ResourceVector {
            units: self
                .units
                .iter()
                .zip(&other.units)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `Σ_i rates_i · fraction_i` at resolution `resolution`.
    pub fn dot(&self, rates: &[f64], resolution: u32) -> f64 {
        let d = f64::from(resolution);
        self.units
            .iter()
            .zip(rates)
            .map(|(&u, &c)| c * f64::from(u) / d)
            .sum()
    }
}

impl fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.units.iter().map(|u| u.to_string()).collect();
        f.write_str(&parts.join("/"))
    }
}

/// Exact difference on the lattice. See [`ResourceVector::checked_sub`].
pub fn pool_subtract(pool: &ResourceVector, bundle: &ResourceVector) -> Result<ResourceVector> {
    pool.checked_sub(bundle)
}
