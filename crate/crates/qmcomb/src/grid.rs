//! Uniform frequency grids.
//!
//! All spectra in this crate are sampled on a [`FrequencyGrid`]. Grids that
//! are symmetric about zero are built from a mirrored formula so that
//! `nu[i] == -nu[n-1-i]` holds *exactly* in floating point; phase
//! anti-symmetrization and delay evenness checks rely on that.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Uniformly sampled frequency axis (units of the block detuning).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T = f64> {
    nu_min: T,
    nu_max: T,
    values: Vec<T>,
    symmetric: bool,
}

impl<T: Scalar> FrequencyGrid<T> {
    /// Builds a uniform grid of `n_points >= 3` samples over `[nu_min, nu_max]`.
    ///
    /// When the interval is symmetric about zero and `n_points` is odd, the
    /// samples are generated as `(i - mid) * step` so the grid is exactly
    /// mirror-symmetric and contains an exact zero.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] if the bounds are not finite and
    /// increasing or `n_points < 3`.
    pub fn new(nu_min: T, nu_max: T, n_points: usize) -> Result<Self> {
        if !nu_min.is_finite() || !nu_max.is_finite() || nu_min >= nu_max {
            return Err(Error::InvalidParameter(format!(
                "frequency grid bounds must be finite with nu_min < nu_max, got [{nu_min}, {nu_max}]"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "frequency grid needs at least 3 points, got {n_points}"
            )));
        }
        let symmetric = nu_min == -nu_max && n_points % 2 == 1;
        let values = if symmetric {
            let mid = (n_points - 1) / 2;
            let step = nu_max / lit::<T>(mid as f64);
            (0..n_points)
                .map(|i| lit::<T>(i as f64 - mid as f64) * step)
                .collect()
        } else {
            let span = nu_max - nu_min;
            let denom = lit::<T>((n_points - 1) as f64);
            (0..n_points)
                .map(|i| nu_min + span * lit::<T>(i as f64) / denom)
                .collect()
        };
        Ok(Self { nu_min, nu_max, values, symmetric })
    }

    /// Builds the symmetric grid `[-halfwidth, +halfwidth]` with an odd
    /// number of points, guaranteeing an exact zero sample.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] if `halfwidth <= 0` or `n_points` is even
    /// or below 3.
    pub fn symmetric(halfwidth: T, n_points: usize) -> Result<Self> {
        if !(halfwidth > T::zero()) || !halfwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "symmetric grid halfwidth must be positive and finite, got {halfwidth}"
            )));
        }
        if n_points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "symmetric grid needs an odd number of points, got {n_points}"
            )));
        }
        Self::new(-halfwidth, halfwidth, n_points)
    }

    /// Lower bound of the grid.
    pub fn nu_min(&self) -> T {
        self.nu_min
    }

    /// Upper bound of the grid.
    pub fn nu_max(&self) -> T {
        self.nu_max
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True only for the degenerate empty grid (never constructible).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample values in increasing order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Spacing between adjacent samples.
    pub fn step(&self) -> T {
        let n = self.values.len();
        (self.nu_max - self.nu_min) / lit::<T>((n - 1) as f64)
    }

    /// Whether the grid is exactly mirror-symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Index of the exact zero sample of a symmetric grid.
    pub fn zero_index(&self) -> Option<usize> {
        self.symmetric.then_some((self.values.len() - 1) / 2)
    }
}
