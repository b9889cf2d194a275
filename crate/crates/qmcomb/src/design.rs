//! Multi-element circuit design: frequency combs with curvature-flattened
//! delay and glued pairs of optimized blocks.
//!
//! A single flattened block holds its delay constant over roughly the unit
//! band. Wider memories chain several blocks whose centers are shifted so
//! the individual plateaus join smoothly. The gluing rule used here matches
//! the slope of the composite phase at the seam: the shift `delta` solves
//! `phi(2 delta) / (2 delta) = phi'(delta)` for the single-block phase
//! `phi`, i.e. the normalized delay of the shifted pair evaluated at the
//! seam equals its band-center value.

use serde::{Deserialize, Serialize};

use crate::circuit::{Block, Circuit, Comb, Element};
use crate::delay::{delay_curvature_at_band_center, delay_profile, delay_spread};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::response::spectral_response;

/// Bisection interval for the comb coupling search.
const COMB_K_RANGE: (f64, f64) = (1e-3, 20.0);
/// Accepted residual curvature at a solved comb coupling.
const CURVATURE_RESIDUAL_TOL: f64 = 1e-6;
/// Target residual for the gluing-shift root.
const GLUE_RESIDUAL_TOL: f64 = 1e-8;

/// A glued pair of identical blocks shifted to `-delta_shift` and
/// `+delta_shift`, together with its wide-band delay spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueResult {
    /// Center shift of each block away from zero.
    pub delta_shift: f64,
    /// The two-block circuit realizing the widened plateau.
    pub composite: Circuit,
    /// Normalized-delay spread of the composite over three unit bands
    /// (`[-3w, 3w]` for gluing band halfwidth `w`).
    pub spread_in_band: f64,
}

/// Delay spreads of two circuits over a common band, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignComparison {
    /// Spread of the first circuit.
    pub spread_a: f64,
    /// Spread of the second circuit.
    pub spread_b: f64,
    /// `spread_a / spread_b`.
    pub ratio: f64,
}

/// Solves for the coupling that cancels the band-center curvature of a
/// symmetric comb's delay.
///
/// The comb's own `k` field is treated as a placeholder: the search spans
/// `(0, 20]` regardless and returns the coupling where the third phase
/// derivative at band center crosses zero (small couplings give narrow
/// resonances with positive curvature sum, large couplings flatten each
/// line into negative curvature).
///
/// # Errors
/// - [`Error::InvalidParameter`] if the comb is invalid or its detunings
///   are not symmetric about zero.
/// - [`Error::NoSolution`] if the curvature does not change sign over the
///   search interval or the bracketed root fails the residual check.
pub fn curvature_flat_k(comb: &Comb) -> Result<f64> {
    comb.validate()?;
    if !comb.is_symmetric() {
        return Err(Error::InvalidParameter(
            "curvature flattening needs detunings symmetric about zero".into(),
        ));
    }
    let curvature = |k: f64| -> Result<f64> {
        let trial = Comb::new(comb.detunings.clone(), k);
        delay_curvature_at_band_center(&Circuit::new(vec![Element::Comb(trial)]))
    };

    let (mut lo, mut hi) = COMB_K_RANGE;
    let mut f_lo = curvature(lo)?;
    let f_hi = curvature(hi)?;
    if f_lo.signum() == f_hi.signum() {
        // No end-to-end sign change: scan for an interior bracket.
        let mut found = None;
        let steps = 200;
        for i in 1..=steps {
            let k = lo + (hi - lo) * i as f64 / steps as f64;
            let f_k = curvature(k)?;
            if f_lo.signum() != f_k.signum() {
                found = Some((lo + (hi - lo) * (i - 1) as f64 / steps as f64, k, f_lo));
                break;
            }
            f_lo = f_k;
        }
        match found {
            Some((a, b, fa)) => {
                lo = a;
                hi = b;
                f_lo = fa;
            }
            None => {
                return Err(Error::NoSolution(format!(
                    "delay curvature keeps the same sign for k in ({}, {}]",
                    COMB_K_RANGE.0, COMB_K_RANGE.1
                )))
            }
        }
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 * mid.max(1.0) {
            break;
        }
        let f_mid = curvature(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    let residual = curvature(k)?;
    if residual.abs() > CURVATURE_RESIDUAL_TOL {
        return Err(Error::NoSolution(format!(
            "curvature residual {residual:.3e} at k = {k:.6} exceeds {CURVATURE_RESIDUAL_TOL:.0e}"
        )));
    }
    Ok(k)
}

/// Detunings of an equidistant comb of `n` resonators: odd multiples of the
/// unit half-spacing, `{..., -3, -1, +1, +3, ...}` (adjacent spacing 2),
/// symmetric about zero. For four resonators this is `{-3, -1, +1, +3}`,
/// the layout whose curvature-flat coupling lands near `k = 4.26`; the
/// denser `{-1.5, -0.5, +0.5, +1.5}` alternative flattens at roughly half
/// that coupling and covers half the band, so it is not used as the
/// baseline.
pub fn equidistant_comb_detunings(n: usize) -> Vec<f64> {
    (0..n).map(|i| (2 * i) as f64 - (n - 1) as f64).collect()
}

/// Builds the `n`-resonator equidistant comb with its curvature-flattened
/// coupling; returns the comb and the solved `k`.
///
/// # Errors
/// Propagates [`curvature_flat_k`] failures; `n < 2` is rejected.
pub fn design_equidistant_comb(n: usize) -> Result<(Comb, f64)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "an equidistant comb needs at least 2 resonators, got {n}"
        )));
    }
    let comb = Comb::new(equidistant_comb_detunings(n), 1.0);
    let k = curvature_flat_k(&comb)?;
    Ok((Comb::new(comb.detunings, k), k))
}

/// Normalized delay of the `[-delta, +delta]`-shifted pair at the seam
/// frequency `nu = delta`, minus its band-center value. The gluing shift is
/// the largest root of this misfit.
fn glue_misfit(block: &Block, delta: f64) -> Result<f64> {
    let composite = glued_pair(block, delta);
    let n_half = ((delta / 0.002).ceil() as usize).max(600);
    let grid = FrequencyGrid::symmetric(delta, 2 * n_half + 1)?;
    let profile = delay_profile(&spectral_response(&composite, &grid)?)?;
    Ok(profile.t[profile.t.len() - 1] - profile.t0)
}

/// The two-block circuit with centers at `-delta` and `+delta`.
fn glued_pair(block: &Block, delta: f64) -> Circuit {
    Circuit::new(vec![
        Element::Block(Block { center: -delta, ..*block }),
        Element::Block(Block { center: delta, ..*block }),
    ])
}

/// Finds the center shift that glues two copies of a flattened block into
/// one wide plateau.
///
/// The shift solves "seam delay equals center delay" for the composite:
/// `T(delta) = T(0)` with the seam halfway between the two block centers.
/// Scanning from six band halfwidths downward selects the largest
/// self-consistent shift — smaller roots interleave the plateaus instead of
/// joining them edge to edge. The returned spread is measured over
/// `[-3w, 3w]`, the widened working band of the pair.
///
/// # Errors
/// - [`Error::InvalidParameter`] if the block is invalid, not centered at
///   zero, or uncoupled (`k = 0` has no delay plateau to glue).
/// - [`Error::NoSolution`] if no sign change is found below six band
///   halfwidths.
pub fn glue_delta(block: &Block, band_halfwidth: f64) -> Result<GlueResult> {
    block.validate()?;
    if block.center != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gluing expects a block centered at zero, got center = {}",
            block.center
        )));
    }
    if block.k == 0.0 {
        return Err(Error::InvalidParameter(
            "gluing needs a waveguide-coupled block (k > 0)".into(),
        ));
    }
    if !(band_halfwidth > 0.0) || !band_halfwidth.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "band halfwidth must be positive and finite, got {band_halfwidth}"
        )));
    }

    // Downward scan: first sign change from above is the largest root.
    let step = 0.1 * band_halfwidth;
    let mut hi = 6.0 * band_halfwidth;
    let mut f_hi = glue_misfit(block, hi)?;
    let mut bracket = None;
    while hi - step > 0.05 * band_halfwidth {
        let lo = hi - step;
        let f_lo = glue_misfit(block, lo)?;
        if f_lo.signum() != f_hi.signum() {
            bracket = Some((lo, hi, f_lo));
            break;
        }
        hi = lo;
        f_hi = f_lo;
    }
    let (mut lo, mut hi, mut f_lo) = bracket.ok_or_else(|| {
        Error::NoSolution(format!(
            "no gluing shift below {} (the seam-delay misfit never changes sign)",
            6.0 * band_halfwidth
        ))
    })?;

    let mut delta = 0.5 * (lo + hi);
    for _ in 0..80 {
        delta = 0.5 * (lo + hi);
        let f_mid = glue_misfit(block, delta)?;
        if f_mid.abs() < GLUE_RESIDUAL_TOL {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = delta;
            f_lo = f_mid;
        } else {
            hi = delta;
        }
    }

    let composite = glued_pair(block, delta);
    let w = band_halfwidth;
    let half = (3.0 * w + 2.0).max(6.0);
    let grid = FrequencyGrid::symmetric(half, 6001)?;
    let profile = delay_profile(&spectral_response(&composite, &grid)?)?;
    let spread_in_band = delay_spread(&profile, -3.0 * w, 3.0 * w)?;
    Ok(GlueResult { delta_shift: delta, composite, spread_in_band })
}

/// Compares the normalized-delay spreads of two circuits over a common band.
///
/// # Errors
/// [`Error::InvalidParameter`] for an empty or reversed band or circuits
/// without a delay reference (all couplings zero); solver errors propagate.
pub fn compare_designs(
    a: &Circuit,
    b: &Circuit,
    band: (f64, f64),
) -> Result<DesignComparison> {
    let (lo, hi) = band;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "comparison band must satisfy lo < hi, got ({lo}, {hi})"
        )));
    }
    let half = (lo.abs().max(hi.abs()) * 1.4 + 1.0).max(6.0);
    let spread_of = |c: &Circuit| -> Result<f64> {
        let grid = FrequencyGrid::symmetric(half, 6001)?;
        let profile = delay_profile(&spectral_response(c, &grid)?)?;
        delay_spread(&profile, lo, hi)
    };
    let spread_a = spread_of(a)?;
    let spread_b = spread_of(b)?;
    Ok(DesignComparison { spread_a, spread_b, ratio: spread_a / spread_b })
}
