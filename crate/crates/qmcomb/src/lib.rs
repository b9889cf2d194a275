//! Frequency-comb resonator memories on a single waveguide: spectral
//! responses, delay flattening, block gluing, and time-domain verification.
//!
//! The physical system is a chain of ring resonators side-coupled to one
//! waveguide. Every circuit here is all-pass — `|S(nu)| = 1` at every real
//! frequency — so all the engineering lives in the phase: the normalized
//! delay `T(nu) = phase(nu) / (2 nu)` measures how long a spectral
//! component dwells in the structure, and a flat `T` over a band means the
//! band is stored and released without distortion.
//!
//! Two circuit elements are modeled:
//!
//! - [`Block`]: three resonators at detunings `{-delta, 0, +delta}` about a
//!   center, the outer two coupled to the waveguide at rate `k` and the
//!   middle one coupled to its neighbors at rate `g`. Its response has the
//!   closed form `S = (P + i k nu') / (P - i k nu')` with
//!   `P = k^2/4 + delta^2 + 2 g^2 - nu'^2` in center-relative frequency.
//! - [`Comb`]: independent single-mode resonators at given detunings, all
//!   coupled to the waveguide at the same rate.
//!
//! The library computes responses three independent ways (direct 3x3
//! steady-state solve, closed-form phase, time-domain integration), which
//! the test suite plays against each other. On top sit the design tools:
//! [`optimize_block`](optimize::optimize_block) flattens the delay of one
//! block, [`glue_delta`](design::glue_delta) joins two flattened blocks
//! into a wider plateau, and [`curvature_flat_k`](design::curvature_flat_k)
//! picks the comb coupling that cancels the delay curvature at band center.
//!
//! Frequencies, detunings, and rates are all expressed in units of the
//! block detuning spread; times are the reciprocal unit. The numeric core
//! is generic over the scalar ([`Scalar`]: `f64` or `f32`) with `f64`
//! defaults everywhere; optimization and time simulation are concrete
//! `f64`.

// Parameter validation negates comparisons (`!(x > 0.0)`) on purpose: unlike
// the de Morgan rewrite (`x <= 0.0`), the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod delay;
pub mod design;
pub mod error;
pub mod grid;
pub mod optimize;
pub mod phase;
pub mod response;
pub mod scalar;
pub mod timesim;

pub use circuit::{Block, Circuit, Comb, Element, Unit};
pub use delay::{
    block_t0, delay_at_band_center, delay_curvature_at_band_center, delay_profile,
    delay_spread, DelayProfile, PHASE_DELAY_CALIBRATION,
};
pub use design::{
    compare_designs, curvature_flat_k, design_equidistant_comb, equidistant_comb_detunings,
    glue_delta, DesignComparison, GlueResult,
};
pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use optimize::{
    flatness_objective, optimize_block, ObjectiveSpec, OptimMode, OptimResult, SearchBounds,
    SearchConfig,
};
pub use phase::unwrap_phase;
pub use response::{
    block_response, cascade_response, closed_form_tan_phase, comb_response, element_response,
    single_resonator_response, spectral_response, SpectralResponse,
};
pub use scalar::Scalar;
pub use timesim::{
    gaussian_pulse, ode_propagate, storage_metrics, tf_propagate, ElementState, OdePropagation,
    StorageMetrics, TimeGrid, Waveform, C64,
};
