//! Frozen cross-checks against an independent implementation.
//!
//! Every expected literal below was produced outside this crate by
//! evaluating the closed-form response algebra (and, for the design
//! quantities, root-finding on it) in high-precision scripts, then pasted
//! here verbatim. The library must reproduce them through its own numerical
//! routes — the 3x3 solver, phase unwrapping, probe-based extrapolation,
//! and scan-plus-bisection searches — so these tests catch any systematic
//! drift in the pipeline, not just local regressions.

use qmcomb::{
    block_response, block_t0, cascade_response, closed_form_tan_phase, comb_response,
    compare_designs, curvature_flat_k, delay_at_band_center, delay_profile, delay_spread,
    design_equidistant_comb, glue_delta, spectral_response, Block, Circuit, Comb, Element,
    FrequencyGrid,
};

/// Direct solver outputs are compared to closed-form literals at full
/// double precision; the routes share no code.
const SOLVER_TOL: f64 = 1e-12;

/// Tolerance for quantities that pass through phase unwrapping and the
/// delay quotient before comparison.
const PIPELINE_TOL: f64 = 1e-9;

fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual:.17}, expected {expected:.17} (tol {tol:e})"
    );
}

#[test]
fn block_solver_matches_frozen_sample() {
    let block = Block { center: 0.3, delta: 1.0, k: 2.5, g: 0.7 };
    let s = block_response(&block, 1.234).unwrap();
    assert_close(s.re, 0.13332205654445325, SOLVER_TOL, "block re");
    assert_close(s.im, 0.9910727668737335, SOLVER_TOL, "block im");
}

#[test]
fn comb_product_matches_frozen_sample() {
    let comb = Comb::new(vec![-1.5, 0.4, 2.2], 1.1);
    let s = comb_response(&comb, 0.77).unwrap();
    assert_close(s.re, -0.127149856073686, SOLVER_TOL, "comb re");
    assert_close(s.im, -0.9918835184135489, SOLVER_TOL, "comb im");
}

#[test]
fn cascade_matches_frozen_sample() {
    let circuit = Circuit::new(vec![
        Element::Block(Block { center: 0.3, delta: 1.0, k: 2.5, g: 0.7 }),
        Element::Comb(Comb::new(vec![-1.5, 0.4, 2.2], 1.1)),
    ]);
    let s = cascade_response(&circuit, 0.77).unwrap();
    assert_close(s.re, 0.5248337438893219, SOLVER_TOL, "cascade re");
    assert_close(s.im, -0.8512047587244315, SOLVER_TOL, "cascade im");
}

#[test]
fn closed_form_tan_phase_matches_frozen_sample() {
    let t = closed_form_tan_phase(3.47, 0.29, 1.0).unwrap();
    assert_close(t, 1.0917356867001737, SOLVER_TOL, "tan(half phase)");
}

#[test]
fn unwrapped_phase_reproduces_closed_form_tangent() {
    // Five coarse samples are enough: the tangent link couples the solver,
    // the unwrap, and the calibration in one identity.
    let circuit = Circuit::single_block(Block::centered(3.47, 0.29));
    let grid: FrequencyGrid = FrequencyGrid::symmetric(1.0, 5).unwrap();
    let response = spectral_response(&circuit, &grid).unwrap();
    let tan_half = (response.phase[4] / 2.0).tan();
    assert_close(tan_half, 1.0917356867001737, PIPELINE_TOL, "tan of solver phase");
}

#[test]
fn analytic_center_delay_matches_frozen_samples() {
    let t0 = block_t0(&Block::centered(3.47, 0.29));
    assert_close(t0, 0.8304564518927587, SOLVER_TOL, "center delay (3.47, 0.29)");
    let t0 = block_t0(&Block::centered(2.5, 0.7));
    assert_close(t0, 0.7057163020465773, SOLVER_TOL, "center delay (2.5, 0.7)");
}

#[test]
fn delay_profile_matches_frozen_samples() {
    let circuit = Circuit::single_block(Block::centered(2.5, 0.7));
    // Halfwidth 7.7 over 2001 points puts nu = 0.77 exactly on node
    // mid + 100 and keeps the extrapolation probes fine.
    let grid: FrequencyGrid = FrequencyGrid::symmetric(7.7, 2001).unwrap();
    let profile = delay_profile(&spectral_response(&circuit, &grid).unwrap()).unwrap();
    let mid = grid.zero_index().unwrap();
    assert_close(profile.t[mid + 100], 0.7509382645330347, PIPELINE_TOL, "delay at 0.77");
    assert_close(profile.t0, 0.7057163020465773, PIPELINE_TOL, "extrapolated center delay");
}

#[test]
fn extrapolated_center_delay_matches_analytic_form() {
    let circuit = Circuit::single_block(Block::centered(3.47, 0.29));
    let t0 = delay_at_band_center(&circuit).unwrap();
    assert_close(t0, 0.8304564518927587, 1e-9, "probe-extrapolated center delay");
}

#[test]
fn comb_center_delay_matches_frozen_sum() {
    let circuit = Circuit::new(vec![Element::Comb(Comb::new(vec![-3.0, -1.0, 1.0, 3.0], 4.26))]);
    let t0 = delay_at_band_center(&circuit).unwrap();
    assert_close(t0, 1.084078978256789, 1e-9, "four-tooth center delay");
}

#[test]
fn curvature_flattened_couplings_match_frozen_roots() {
    let k2 = curvature_flat_k(&Comb::new(vec![-1.0, 1.0], 1.0)).unwrap();
    // The probe stencil carries a small fixed bias, so the match is loose
    // relative to the solver tests but tight against design tolerances.
    assert_close(k2, 3.4641016151377544, 1e-3, "two-tooth flat coupling");
    let k4 = curvature_flat_k(&Comb::new(vec![-3.0, -1.0, 1.0, 3.0], 1.0)).unwrap();
    assert_close(k4, 4.260191623704774, 2e-3, "four-tooth flat coupling");
}

#[test]
fn equidistant_design_matches_frozen_layout() {
    let (comb, k) = design_equidistant_comb(4).unwrap();
    assert_eq!(comb.detunings, vec![-3.0, -1.0, 1.0, 3.0]);
    assert_close(k, 4.260191623704774, 2e-3, "designed coupling");
    assert_close(comb.k, k, 0.0, "comb carries the solved coupling");

    let circuit = Circuit::new(vec![Element::Comb(comb)]);
    let grid: FrequencyGrid = FrequencyGrid::symmetric(6.0, 6001).unwrap();
    let profile = delay_profile(&spectral_response(&circuit, &grid).unwrap()).unwrap();
    let spread = delay_spread(&profile, -3.0, 3.0).unwrap();
    assert_close(spread, 0.05754476690823762, 1e-3, "four-tooth spread");
}

#[test]
fn pair_gluing_matches_frozen_shift_and_spread() {
    let block = Block::centered(3.47, 0.29);
    let glued = glue_delta(&block, 1.0).unwrap();
    assert_close(glued.delta_shift, 2.183012370534093, 5e-3, "gluing shift");
    assert_close(glued.spread_in_band, 0.03856417332610662, 1e-3, "glued spread");
    assert_eq!(glued.composite.elements.len(), 2);
}

#[test]
fn design_comparison_matches_frozen_ratio() {
    let narrow = Circuit::single_block(Block::centered(3.2144, 0.0));
    let full = Circuit::single_block(Block::centered(3.47, 0.29));
    let cmp = compare_designs(&narrow, &full, (-1.0, 1.0)).unwrap();
    assert_close(cmp.spread_a, 0.005411158113947434, 1e-5, "uncoupled-middle spread");
    assert_close(cmp.spread_b, 0.0033428383315763366, 1e-5, "coupled-middle spread");
    assert_close(cmp.ratio, 1.6187316218178485, 1e-3, "spread ratio");
}
