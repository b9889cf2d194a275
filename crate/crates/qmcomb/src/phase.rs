//! Continuous transfer phase from principal-value arguments.
//!
//! Complex responses only expose their argument modulo `2 pi`; delay
//! extraction needs the continuous phase. [`unwrap_phase`] restores
//! continuity by tracking an integer winding count per sample, then anchors
//! and symmetrizes the result on grids that support it.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::scalar::{lit, Scalar};

/// Margin (radians) below `pi` at which an adjacent phase step is treated
/// as aliased: steps this large cannot be distinguished from wrapped-around
/// larger ones, so the grid must be refined.
pub const ALIAS_GUARD: f64 = 1e-3;

/// Residual magnitude under which the phase at `nu = 0` is snapped to an
/// exact zero (lossless symmetric circuits have `S(0) = 1`, so anything this
/// small is roundoff, not structure).
const ANCHOR_SNAP: f64 = 1e-6;

/// Largest even-part defect at which an unwrapped phase is still considered
/// odd and gets projected onto its exactly odd part.
const ODDNESS_TOL: f64 = 1e-6;

/// Unwraps principal-value arguments into a continuous phase sequence.
///
/// Each output sample stays congruent to its input modulo `2 pi`; only the
/// winding count changes. On a symmetric grid the result is additionally
/// re-anchored so the winding at `nu = 0` is minimal, snapped to exactly
/// zero there when the residual is pure roundoff, and — if the sequence is
/// odd up to roundoff, as lossless circuits symmetric about zero produce —
/// projected to an exactly odd sequence. Sequences that are genuinely not
/// odd (asymmetric circuits sampled on a symmetric grid) are left intact.
///
/// # Errors
/// - [`Error::InvalidParameter`] if `raw_args` and `grid` disagree in length.
/// - [`Error::GridTooCoarse`] if an adjacent corrected step reaches
///   `pi - ALIAS_GUARD`, i.e. the sampling cannot resolve the phase slope.
pub fn unwrap_phase<T: Scalar>(raw_args: &[T], grid: &FrequencyGrid<T>) -> Result<Vec<T>> {
    if raw_args.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "raw argument count {} does not match grid length {}",
            raw_args.len(),
            grid.len()
        )));
    }
    let two_pi = T::PI() + T::PI();
    let limit = T::PI() - lit::<T>(ALIAS_GUARD);

    // Integer winding per sample keeps each value exactly congruent to its
    // raw argument; accumulating corrected differences instead would smear
    // roundoff across the scan.
    let mut winding = vec![0i64; raw_args.len()];
    for i in 1..raw_args.len() {
        let diff = raw_args[i] - raw_args[i - 1];
        let wraps = (diff / two_pi).round().to_f64().unwrap_or(0.0) as i64;
        winding[i] = winding[i - 1] - wraps;
        let corrected = diff - lit::<T>(wraps as f64) * two_pi;
        if corrected.abs() >= limit {
            return Err(Error::GridTooCoarse {
                index: i,
                jump: corrected.abs().to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let mut phase: Vec<T> = raw_args
        .iter()
        .zip(&winding)
        .map(|(&a, &m)| a + lit::<T>(m as f64) * two_pi)
        .collect();

    if let Some(mid) = grid.zero_index() {
        // Remove whole turns accumulated before the zero sample.
        let turns = (phase[mid] / two_pi).round();
        if turns != T::zero() {
            for p in phase.iter_mut() {
                *p -= turns * two_pi;
            }
        }
        // A lossless circuit symmetric about zero has S(0) = 1: any tiny
        // residual at the center is roundoff and is subtracted exactly.
        let residual = phase[mid];
        if residual != T::zero() && residual.abs() < lit::<T>(ANCHOR_SNAP) {
            for p in phase.iter_mut() {
                *p -= residual;
            }
        }
        if phase[mid] == T::zero() {
            let n = phase.len();
            let odd_defect = (0..n)
                .map(|i| (phase[i] + phase[n - 1 - i]).abs())
                .fold(T::zero(), T::max);
            if odd_defect < lit::<T>(ODDNESS_TOL) {
                let half = lit::<T>(0.5);
                let projected: Vec<T> = (0..n)
                    .map(|i| (phase[i] - phase[n - 1 - i]) * half)
                    .collect();
                phase = projected;
            }
        }
    }
    Ok(phase)
}
