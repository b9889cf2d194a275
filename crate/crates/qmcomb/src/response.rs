//! Steady-state transfer functions of resonator circuits.
//!
//! Every resonator network here is linear and lossless, so a monochromatic
//! drive at detuning `nu` produces an output `S(nu) * input` with
//! `|S(nu)| = 1`: the circuit is all-pass and all information lives in the
//! phase of `S`.
//!
//! Conventions: fields carry time dependence `exp(-i nu t)`, so the steady
//! state replaces `d/dt` with `-i nu`. A resonator mode `b` driven by the
//! waveguide field `a` at rate `k` obeys `[d/dt + i d + k/2] b = sqrt(k) a`
//! (detuning `d`), and the waveguide field past the resonator is
//! `a - sqrt(k) b`.
//!
//! The block response is computed by an actual pivoted linear solve of the
//! three-mode steady-state system — not from the closed-form expression that
//! the solve happens to admit. The independent closed-form phase ratio lives
//! in [`closed_form_tan_phase`] so the two routes can be checked against
//! each other.

use num_complex::Complex;

use crate::circuit::{Block, Circuit, Comb, Element};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::phase::unwrap_phase;
use crate::scalar::{lit, Scalar};

/// Condition-number estimate above which the block solve is reported as
/// numerically degenerate.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e12;

/// Distance from the block center below which the response is taken at its
/// exact limit value 1. The steady-state matrix is exactly singular at the
/// center (the symmetric dark mode decouples there), while the response
/// itself is regular with `S -> 1`; the limit is substituted inside this
/// margin instead of solving an arbitrarily ill-conditioned system.
pub const DARK_MODE_MARGIN: f64 = 1e-9;

/// Response of a single waveguide-coupled resonator.
///
/// Returns `S1 = (i(d - nu) - k/2) / (i(d - nu) + k/2)` where `d` is the
/// resonator detuning: unit modulus for every real `nu`, a full `2 pi` of
/// phase winding across the resonance, and `S1 = -1` exactly on resonance.
///
/// # Errors
/// [`Error::InvalidParameter`] if `k < 0` or any argument is not finite.
pub fn single_resonator_response<T: Scalar>(detuning: T, k: T, nu: T) -> Result<Complex<T>> {
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "resonator coupling k must be >= 0 and finite, got {k}"
        )));
    }
    if !detuning.is_finite() || !nu.is_finite() {
        return Err(Error::InvalidParameter(
            "resonator detuning and nu must be finite".into(),
        ));
    }
    let half_k = k / lit::<T>(2.0);
    let x = detuning - nu;
    let denom = Complex::new(half_k, x);
    if denom.norm_sqr() == T::zero() {
        // k = 0 and nu exactly on the resonator frequency: no coupling, so
        // the waveguide never sees the resonator at all.
        return Ok(Complex::new(T::one(), T::zero()));
    }
    Ok(Complex::new(-half_k, x) / denom)
}

/// Builds the steady-state matrix and right-hand side of a centered block at
/// offset frequency `nu` (relative to the block center), with the waveguide
/// relations already substituted so the only unknowns are the three mode
/// amplitudes and the incoming field is 1.
fn block_system<T: Scalar>(block: &Block<T>, nu: T) -> ([[Complex<T>; 3]; 3], [Complex<T>; 3]) {
    let half_k = block.k / lit::<T>(2.0);
    let sqrt_k = block.k.sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    let ig = Complex::new(T::zero(), block.g);
    // Outer resonators at -delta and +delta, central resonator at 0; the
    // third resonator is driven by the field already past the first one.
    let a = [
        [Complex::new(half_k, -block.delta - nu), ig, zero],
        [ig, Complex::new(T::zero(), -nu), ig],
        [Complex::new(block.k, T::zero()), ig, Complex::new(half_k, block.delta - nu)],
    ];
    let rhs = [
        Complex::new(sqrt_k, T::zero()),
        zero,
        Complex::new(sqrt_k, T::zero()),
    ];
    (a, rhs)
}

/// In-place LU factorization with partial pivoting of a 3x3 complex matrix.
/// Returns the pivot row order, or `None` if a pivot column is exactly zero.
// Indexed loops keep the elimination readable as matrix algebra.
#[allow(clippy::needless_range_loop)]
fn lu3_factor<T: Scalar>(a: &mut [[Complex<T>; 3]; 3]) -> Option<[usize; 3]> {
    let mut perm = [0usize, 1, 2];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| {
                a[i][col]
                    .norm_sqr()
                    .partial_cmp(&a[j][col].norm_sqr())
                    .expect("finite pivot magnitudes")
            })
            .expect("nonempty pivot range");
        if a[pivot][col].norm_sqr() == T::zero() {
            return None;
        }
        if pivot != col {
            a.swap(pivot, col);
            perm.swap(pivot, col);
        }
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            a[row][col] = factor;
            for c in col + 1..3 {
                let sub = factor * a[col][c];
                a[row][c] -= sub;
            }
        }
    }
    Some(perm)
}

/// Solves with an existing LU factorization.
fn lu3_solve<T: Scalar>(
    lu: &[[Complex<T>; 3]; 3],
    perm: &[usize; 3],
    b: &[Complex<T>; 3],
) -> [Complex<T>; 3] {
    let mut y = [b[perm[0]], b[perm[1]], b[perm[2]]];
    for row in 1..3 {
        for col in 0..row {
            let sub = lu[row][col] * y[col];
            y[row] -= sub;
        }
    }
    for row in (0..3).rev() {
        for col in row + 1..3 {
            let sub = lu[row][col] * y[col];
            y[row] -= sub;
        }
        y[row] /= lu[row][row];
    }
    y
}

/// Infinity norm of a 3x3 complex matrix.
fn norm_inf<T: Scalar>(a: &[[Complex<T>; 3]; 3]) -> T {
    a.iter()
        .map(|row| row.iter().fold(T::zero(), |acc, z| acc + z.norm()))
        .fold(T::zero(), |acc, s| acc.max(s))
}

/// Condition-number estimate `||A||_inf * ||A^-1||_inf`, with the inverse
/// reconstructed column by column from the factorization.
fn condition_estimate<T: Scalar>(
    a: &[[Complex<T>; 3]; 3],
    lu: &[[Complex<T>; 3]; 3],
    perm: &[usize; 3],
) -> T {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut inv = [[zero; 3]; 3];
    for col in 0..3 {
        let mut e = [zero; 3];
        e[col] = one;
        let x = lu3_solve(lu, perm, &e);
        for row in 0..3 {
            inv[row][col] = x[row];
        }
    }
    norm_inf(a) * norm_inf(&inv)
}

/// Response of one memory block, by direct solution of its three-mode
/// steady-state system.
///
/// The returned value is the ratio of outgoing to incoming waveguide
/// amplitude at absolute frequency `nu`; the block's own `center` shifts
/// where its features sit. `|S| = 1` to near machine precision for every
/// valid block.
///
/// Within [`DARK_MODE_MARGIN`] of the block center the exact limit `S = 1`
/// is returned: the matrix is singular there while the response is regular.
/// A block with `k = 0` never couples to the waveguide and returns `S = 1`
/// identically.
///
/// # Errors
/// - [`Error::InvalidParameter`] if the block is invalid or `nu` is not finite.
/// - [`Error::NearSingular`] if the solve is numerically degenerate
///   (condition estimate above [`NEAR_SINGULAR_CONDITION`]).
pub fn block_response<T: Scalar>(block: &Block<T>, nu: T) -> Result<Complex<T>> {
    block.validate()?;
    if !nu.is_finite() {
        return Err(Error::InvalidParameter(format!("nu must be finite, got {nu}")));
    }
    let one = Complex::new(T::one(), T::zero());
    if block.k == T::zero() {
        return Ok(one);
    }
    let nu_local = nu - block.center;
    if nu_local.abs() <= lit::<T>(DARK_MODE_MARGIN) {
        return Ok(one);
    }
    let (a, rhs) = block_system(block, nu_local);
    let mut lu = a;
    let perm = match lu3_factor(&mut lu) {
        Some(p) => p,
        None => {
            return Err(Error::NearSingular {
                nu: nu.to_f64().unwrap_or(f64::NAN),
                cond: f64::INFINITY,
            })
        }
    };
    let cond = condition_estimate(&a, &lu, &perm);
    if cond > lit::<T>(NEAR_SINGULAR_CONDITION) {
        return Err(Error::NearSingular {
            nu: nu.to_f64().unwrap_or(f64::NAN),
            cond: cond.to_f64().unwrap_or(f64::NAN),
        });
    }
    let b = lu3_solve(&lu, &perm, &rhs);
    let sqrt_k = block.k.sqrt();
    Ok(one - (b[0] + b[2]).scale(sqrt_k))
}

/// Response of a comb: the product of its resonators' individual responses
/// (they share the waveguide but do not couple to each other).
///
/// # Errors
/// [`Error::InvalidParameter`] if the comb is invalid or `nu` is not finite.
pub fn comb_response<T: Scalar>(comb: &Comb<T>, nu: T) -> Result<Complex<T>> {
    comb.validate()?;
    let mut s = Complex::new(T::one(), T::zero());
    for &d in &comb.detunings {
        s *= single_resonator_response(d, comb.k, nu)?;
    }
    Ok(s)
}

/// Response of one cascade element at absolute frequency `nu`.
///
/// # Errors
/// Propagates the wrapped element's errors.
pub fn element_response<T: Scalar>(element: &Element<T>, nu: T) -> Result<Complex<T>> {
    match element {
        Element::Block(b) => block_response(b, nu),
        Element::Comb(c) => comb_response(c, nu),
    }
}

/// Response of a full cascade: the product of its element responses.
///
/// Elements along one waveguide multiply; the half-wavelength placement of
/// the cascade is taken as exact, so no extra propagation phase appears
/// between elements.
///
/// # Errors
/// [`Error::InvalidParameter`] for an invalid circuit; element errors
/// propagate.
pub fn cascade_response<T: Scalar>(circuit: &Circuit<T>, nu: T) -> Result<Complex<T>> {
    circuit.validate()?;
    let mut s = Complex::new(T::one(), T::zero());
    for element in &circuit.elements {
        s *= element_response(element, nu)?;
    }
    Ok(s)
}

/// Tangent of the block's transfer phase folded to half angle, from the
/// closed-form ratio `4 k nu / D(nu)` with `D = 8 g^2 + k^2 + 4 - 4 nu^2`.
///
/// This is an independent algebraic route to the phase of a centered block
/// with unit detuning spread, kept deliberately separate from the linear
/// solve in [`block_response`] so each can vouch for the other. The solver
/// phase `phi` and this ratio are related by `tan(phi / 2) = 4 k nu / D`.
///
/// # Errors
/// - [`Error::InvalidParameter`] for non-finite input or `k < 0`.
/// - [`Error::ClosedFormPole`] at (or within `1e-12` of) the denominator
///   root; callers tracing the phase through the pole must use the
///   unwrapped-phase route instead.
pub fn closed_form_tan_phase<T: Scalar>(k: T, g: T, nu: T) -> Result<T> {
    if !k.is_finite() || !g.is_finite() || !nu.is_finite() || k < T::zero() {
        return Err(Error::InvalidParameter(
            "closed form needs finite k >= 0, g, nu".into(),
        ));
    }
    let four = lit::<T>(4.0);
    let eight = lit::<T>(8.0);
    let d = eight * g * g + k * k + four - four * nu * nu;
    if d.abs() <= lit::<T>(1e-12) {
        return Err(Error::ClosedFormPole {
            denominator: d.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(four * k * nu / d)
}

/// Sampled complex transfer function with its continuous phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResponse<T = f64> {
    /// Frequency axis the response is sampled on.
    pub grid: FrequencyGrid<T>,
    /// Complex response per sample.
    pub s: Vec<Complex<T>>,
    /// Unwrapped transfer phase per sample; on a symmetric grid it is
    /// anchored to zero at `nu = 0` and, for symmetric circuits, exactly odd.
    pub phase: Vec<T>,
}

/// Samples a circuit's response over a grid and unwraps its phase.
///
/// # Errors
/// - [`Error::InvalidParameter`] for an invalid circuit.
/// - [`Error::GridTooCoarse`] if adjacent phase samples alias.
/// - Solver errors propagate from the individual samples.
pub fn spectral_response<T: Scalar>(
    circuit: &Circuit<T>,
    grid: &FrequencyGrid<T>,
) -> Result<SpectralResponse<T>> {
    circuit.validate()?;
    let s: Vec<Complex<T>> = grid
        .values()
        .iter()
        .map(|&nu| cascade_response(circuit, nu))
        .collect::<Result<_>>()?;
    let raw: Vec<T> = s.iter().map(|z| z.arg()).collect();
    let phase = unwrap_phase(&raw, grid)?;
    Ok(SpectralResponse { grid: grid.clone(), s, phase })
}
