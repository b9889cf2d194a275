//! Spectral delay profiles.
//!
//! The normalized spectral delay of an all-pass circuit is defined from its
//! unwrapped transfer phase as `T(nu) = PHASE_DELAY_CALIBRATION * phase / nu`,
//! with the `nu = 0` value supplied by a quadratic-in-`nu^2` extrapolation.
//! A storage device wants `T` flat over its working band; the figure of
//! merit everywhere in this crate is the spread of `T_rel = T / T(0)`.

use crate::circuit::{Block, Circuit};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::response::{cascade_response, SpectralResponse};
use crate::scalar::{lit, Scalar};

/// Ratio between the normalized spectral delay and `phase / nu`.
///
/// Pinned by the analytic one-mode oracle: a centered block's phase slope at
/// the band center is `8k / (k^2 + 4 delta^2 + 8 g^2)`, exactly twice the
/// delay normalization this crate reproduces ([`block_t0`]), so
/// `T = +phase / (2 nu)`. The physical group delay of a narrowband pulse at
/// the band center is therefore `2 * T(0)`. Every relative quantity
/// (`T_rel`, spreads, optima) is independent of this factor.
pub const PHASE_DELAY_CALIBRATION: f64 = 0.5;

/// Largest phase magnitude at `nu = 0` still accepted as "anchored".
const ANCHOR_TOL: f64 = 1e-9;

/// Step used by the direct small-frequency probes of cascade delay.
const PROBE_STEP: f64 = 1e-3;

/// Normalized spectral delay sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile<T = f64> {
    /// Frequency axis shared with the response the profile came from.
    pub grid: FrequencyGrid<T>,
    /// Normalized delay per sample.
    pub t: Vec<T>,
    /// Delay at the band center (extrapolated, never divided 0/0).
    pub t0: T,
    /// `t / t0` per sample, exactly 1 at the center; `None` when `t0 = 0`
    /// (a fully decoupled circuit has no delay to normalize by).
    pub t_rel: Option<Vec<T>>,
}

/// Quadratic-in-`nu^2` extrapolation of `T` to `nu = 0` from the first
/// samples above center: exact through the `nu^4` term of an even function.
fn extrapolate_t0<T: Scalar>(t: &[T], mid: usize) -> T {
    if t.len() >= mid + 4 {
        lit::<T>(1.5) * t[mid + 1] - lit::<T>(0.6) * t[mid + 2] + lit::<T>(0.1) * t[mid + 3]
    } else {
        // Short grids (5 points) get the linear-in-nu^2 version.
        (lit::<T>(4.0) * t[mid + 1] - t[mid + 2]) / lit::<T>(3.0)
    }
}

/// Extracts the normalized delay profile from an unwrapped spectral response.
///
/// # Errors
/// - [`Error::InvalidParameter`] unless the grid is symmetric (so it
///   contains an exact zero sample).
/// - [`Error::PhaseNotAnchored`] if the phase at the center is not zero.
pub fn delay_profile<T: Scalar>(response: &SpectralResponse<T>) -> Result<DelayProfile<T>> {
    let grid = &response.grid;
    let mid = grid.zero_index().ok_or_else(|| {
        Error::InvalidParameter(
            "delay profile needs a symmetric grid containing nu = 0".into(),
        )
    })?;
    let center_phase = response.phase[mid];
    if center_phase.abs() > lit::<T>(ANCHOR_TOL) {
        return Err(Error::PhaseNotAnchored {
            phase: center_phase.to_f64().unwrap_or(f64::NAN),
        });
    }
    let calibration = lit::<T>(PHASE_DELAY_CALIBRATION);
    let mut t: Vec<T> = response
        .phase
        .iter()
        .zip(grid.values())
        .map(|(&phi, &nu)| {
            if nu == T::zero() {
                T::zero() // placeholder, replaced by the extrapolated value
            } else {
                calibration * phi / nu
            }
        })
        .collect();
    let t0 = extrapolate_t0(&t, mid);
    t[mid] = t0;
    let t_rel = if t0 == T::zero() {
        None
    } else {
        let mut rel: Vec<T> = t.iter().map(|&x| x / t0).collect();
        rel[mid] = T::one();
        Some(rel)
    };
    Ok(DelayProfile { grid: grid.clone(), t, t0, t_rel })
}

/// Spread (max minus min) of the normalized delay `T_rel` over a band.
///
/// # Errors
/// [`Error::InvalidParameter`] if the band is empty, reaches outside the
/// grid, contains no samples, or `T_rel` is undefined because `T(0) = 0`.
pub fn delay_spread<T: Scalar>(profile: &DelayProfile<T>, nu_lo: T, nu_hi: T) -> Result<T> {
    if !(nu_lo < nu_hi) {
        return Err(Error::InvalidParameter(format!(
            "band must satisfy lo < hi, got [{nu_lo}, {nu_hi}]"
        )));
    }
    if nu_lo < profile.grid.nu_min() || nu_hi > profile.grid.nu_max() {
        return Err(Error::InvalidParameter(format!(
            "band [{nu_lo}, {nu_hi}] reaches outside the grid [{}, {}]",
            profile.grid.nu_min(),
            profile.grid.nu_max()
        )));
    }
    let rel = profile.t_rel.as_ref().ok_or_else(|| {
        Error::InvalidParameter("normalized delay undefined: T(0) = 0".into())
    })?;
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (&nu, &r) in profile.grid.values().iter().zip(rel) {
        if nu >= nu_lo && nu <= nu_hi {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if !hi.is_finite() {
        return Err(Error::InvalidParameter(
            "band contains no grid samples".into(),
        ));
    }
    Ok(hi - lo)
}

/// Analytic band-center delay of a single block:
/// `T(0) = 4k / (k^2 + 4 delta^2 + 8 g^2)`.
///
/// For the unit detuning spread this is `4k / (8 g^2 + k^2 + 4)`, the
/// small-frequency limit of the closed-form phase ratio.
pub fn block_t0<T: Scalar>(block: &Block<T>) -> T {
    let four = lit::<T>(4.0);
    let eight = lit::<T>(8.0);
    let denom = block.k * block.k + four * block.delta * block.delta + eight * block.g * block.g;
    if denom == T::zero() {
        return T::zero(); // fully degenerate block: no coupling at all
    }
    four * block.k / denom
}

/// Samples the normalized delay of a symmetric circuit at a single positive
/// frequency by direct evaluation (principal argument; valid while the
/// accumulated phase stays within a half turn).
fn probe_t<T: Scalar>(circuit: &Circuit<T>, nu: T) -> Result<T> {
    let s = cascade_response(circuit, nu)?;
    Ok(lit::<T>(PHASE_DELAY_CALIBRATION) * s.arg() / nu)
}

/// Band-center delay `T(0)` of a circuit symmetric about zero, by direct
/// small-frequency extrapolation (no full grid required).
///
/// # Errors
/// - [`Error::InvalidParameter`] if the circuit is invalid or its response
///   at zero is not 1 (i.e. the circuit is not symmetric about zero).
/// - Solver errors propagate.
pub fn delay_at_band_center<T: Scalar>(circuit: &Circuit<T>) -> Result<T> {
    let s0 = cascade_response(circuit, T::zero())?;
    if s0.arg().abs() > lit::<T>(1e-6) {
        return Err(Error::InvalidParameter(
            "band-center delay probe needs a circuit symmetric about zero".into(),
        ));
    }
    let h = lit::<T>(PROBE_STEP);
    let t1 = probe_t(circuit, h)?;
    let t2 = probe_t(circuit, h + h)?;
    let t3 = probe_t(circuit, h + h + h)?;
    Ok(lit::<T>(1.5) * t1 - lit::<T>(0.6) * t2 + lit::<T>(0.1) * t3)
}

/// Second derivative of the normalized delay at the band center of a
/// circuit symmetric about zero, via a five-point even-function stencil with
/// the center value supplied by extrapolation.
///
/// Exact through the `nu^4` term of `T`; the residual error scales as the
/// sixth-order coefficient times [`PROBE_STEP`] to the fourth.
///
/// # Errors
/// Same conditions as [`delay_at_band_center`].
pub fn delay_curvature_at_band_center<T: Scalar>(circuit: &Circuit<T>) -> Result<T> {
    let s0 = cascade_response(circuit, T::zero())?;
    if s0.arg().abs() > lit::<T>(1e-6) {
        return Err(Error::InvalidParameter(
            "curvature probe needs a circuit symmetric about zero".into(),
        ));
    }
    let h = lit::<T>(PROBE_STEP);
    let t1 = probe_t(circuit, h)?;
    let t2 = probe_t(circuit, h + h)?;
    let t3 = probe_t(circuit, h + h + h)?;
    let t0 = lit::<T>(1.5) * t1 - lit::<T>(0.6) * t2 + lit::<T>(0.1) * t3;
    // Even-function five-point second-derivative stencil folded to one side:
    // [-T(2h) + 16 T(h) - 15 T(0)] / (6 h^2).
    Ok((lit::<T>(16.0) * t1 - t2 - lit::<T>(15.0) * t0) / (lit::<T>(6.0) * h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Comb, Element};
    use crate::response::spectral_response;
    use approx::assert_abs_diff_eq;

    fn profile_of(block: Block, halfwidth: f64, n: usize) -> DelayProfile {
        let circuit = Circuit::single_block(block);
        let grid = FrequencyGrid::symmetric(halfwidth, n).unwrap();
        let resp = spectral_response(&circuit, &grid).unwrap();
        delay_profile(&resp).unwrap()
    }

    #[test]
    fn analytic_t0_of_flattened_block() {
        // 4 * 3.47 / (8 * 0.29^2 + 3.47^2 + 4) = 13.88 / 16.7137.
        let t0 = block_t0(&Block::centered(3.47, 0.29));
        assert_abs_diff_eq!(t0, 13.88 / 16.7137, epsilon = 1e-12);
        assert_abs_diff_eq!(t0, 0.8304565, epsilon = 1e-6);
    }

    #[test]
    fn extrapolated_t0_matches_analytic() {
        for (k, g) in [(3.47, 0.29), (3.17, 0.0), (1.0, 1.5), (7.3, 0.1)] {
            let p = profile_of(Block::centered(k, g), 4.0, 4001);
            assert_abs_diff_eq!(p.t0, block_t0(&Block::centered(k, g)), epsilon = 1e-8);
        }
    }

    #[test]
    fn t_rel_is_one_at_center_and_even() {
        let p = profile_of(Block::centered(3.47, 0.29), 4.0, 4001);
        let rel = p.t_rel.as_ref().unwrap();
        let mid = p.grid.zero_index().unwrap();
        assert_eq!(rel[mid], 1.0);
        let n = rel.len();
        for i in 0..n {
            assert!(
                (p.t[i] - p.t[n - 1 - i]).abs() < 1e-10,
                "delay must be even in nu"
            );
        }
    }

    #[test]
    fn zero_coupling_profile_has_no_normalization() {
        let p = profile_of(Block::centered(0.0, 0.5), 4.0, 401);
        assert_eq!(p.t0, 0.0);
        assert!(p.t_rel.is_none());
        assert!(p.t.iter().all(|&t| t == 0.0));
        assert!(matches!(
            delay_spread(&p, -1.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn spread_of_constant_profile_is_zero() {
        let grid = FrequencyGrid::symmetric(2.0, 11).unwrap();
        let t = vec![0.7; 11];
        let profile = DelayProfile {
            grid: grid.clone(),
            t: t.clone(),
            t0: 0.7,
            t_rel: Some(vec![1.0; 11]),
        };
        assert_eq!(delay_spread(&profile, -1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn spread_validates_band() {
        let p = profile_of(Block::centered(3.47, 0.29), 4.0, 401);
        assert!(delay_spread(&p, 1.0, -1.0).is_err());
        assert!(delay_spread(&p, -5.0, 1.0).is_err());
        assert!(delay_spread(&p, -1.0, 5.0).is_err());
        assert!(delay_spread(&p, -1.0, 1.0).is_ok());
    }

    #[test]
    fn unanchored_phase_is_rejected() {
        let circuit = Circuit::single_block(Block::centered(3.47, 0.29));
        let grid = FrequencyGrid::symmetric(4.0, 401).unwrap();
        let mut resp = spectral_response(&circuit, &grid).unwrap();
        for p in resp.phase.iter_mut() {
            *p += 0.3;
        }
        assert!(matches!(
            delay_profile(&resp),
            Err(Error::PhaseNotAnchored { .. })
        ));
    }

    #[test]
    fn asymmetric_grid_is_rejected() {
        let circuit = Circuit::single_block(Block::centered(3.47, 0.29));
        let grid = FrequencyGrid::new(-1.0, 2.0, 301).unwrap();
        let resp = spectral_response(&circuit, &grid).unwrap();
        assert!(delay_profile(&resp).is_err());
    }

    #[test]
    fn band_center_probe_matches_analytic_block_value() {
        for (k, g) in [(3.47, 0.29), (2.0, 0.0), (5.5, 1.2)] {
            let circuit = Circuit::single_block(Block::centered(k, g));
            let probed = delay_at_band_center(&circuit).unwrap();
            assert_abs_diff_eq!(probed, block_t0(&Block::centered(k, g)), epsilon = 1e-9);
        }
    }

    #[test]
    fn band_center_probe_rejects_asymmetric_circuits() {
        let circuit = Circuit::single_block(Block {
            center: 1.3,
            ..Block::centered(3.47, 0.29)
        });
        assert!(delay_at_band_center(&circuit).is_err());
    }

    #[test]
    fn comb_band_center_delay_adds_per_resonator() {
        // Each resonator contributes 2k / (k^2 + 4 d^2) to T(0).
        let comb = Comb::new(vec![-3.0, -1.0, 1.0, 3.0], 4.26);
        let circuit = Circuit::new(vec![Element::Comb(comb.clone())]);
        let probed = delay_at_band_center(&circuit).unwrap();
        let analytic: f64 = comb
            .detunings
            .iter()
            .map(|&d| 2.0 * comb.k / (comb.k * comb.k + 4.0 * d * d))
            .sum();
        assert_abs_diff_eq!(probed, analytic, epsilon = 1e-9);
    }

    #[test]
    fn curvature_probe_finds_flat_point_of_resonator_pair() {
        // A symmetric two-resonator comb has zero delay curvature at
        // k = 2 sqrt(3): the small-frequency expansion gives 3(k^2+4) = 4k^2.
        let flat_k = 2.0 * 3f64.sqrt();
        for (k, expect_sign) in [(flat_k - 0.5, 1.0), (flat_k + 0.5, -1.0)] {
            let circuit = Circuit::new(vec![Element::Comb(Comb::new(vec![-1.0, 1.0], k))]);
            let c = delay_curvature_at_band_center(&circuit).unwrap();
            assert!(
                c * expect_sign > 0.0,
                "curvature at k={k} should have sign {expect_sign}, got {c:.3e}"
            );
        }
        let circuit = Circuit::new(vec![Element::Comb(Comb::new(vec![-1.0, 1.0], flat_k))]);
        let c = delay_curvature_at_band_center(&circuit).unwrap();
        assert!(c.abs() < 1e-6, "curvature at the flat point: {c:.3e}");
    }
}
