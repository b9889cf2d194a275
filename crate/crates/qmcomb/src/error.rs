//! Error type shared by every module of the crate.
//!
//! Diagnostics are carried as `f64` regardless of the scalar type used for
//! the computation itself; they are informational and never fed back into
//! the numerics.

use crate::optimize::OptimResult;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across modeling, optimization, and
/// time-domain simulation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition (negative coupling,
    /// non-increasing detunings, malformed grid, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The steady-state linear system is numerically degenerate.
    #[error("near-singular steady-state system at nu = {nu} (condition estimate {cond:.3e})")]
    NearSingular { nu: f64, cond: f64 },

    /// Phase unwrapping saw an adjacent step at the aliasing limit; the
    /// frequency grid must be refined before the phase can be trusted.
    #[error("frequency grid too coarse: |phase step| = {jump:.6} rad at sample {index}")]
    GridTooCoarse { index: usize, jump: f64 },

    /// A delay profile was requested from a phase that is not zero at the
    /// band center, violating the anchoring contract.
    #[error("phase not anchored: phase at nu = 0 is {phase:.3e}, expected 0")]
    PhaseNotAnchored { phase: f64 },

    /// The closed-form phase ratio was evaluated at (or too close to) its pole.
    #[error("closed-form phase ratio pole: denominator = {denominator:.3e}")]
    ClosedFormPole { denominator: f64 },

    /// A root-finding routine found no sign change in its search interval.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The optimizer ran out of its evaluation budget; the best point seen
    /// so far is carried along (flagged as non-converged).
    #[error("optimization budget exhausted after {} evaluations (best objective {:.6e})",
            best.n_evaluations, best.objective_value)]
    BudgetExceeded { best: Box<OptimResult> },

    /// The requested integrator step is too large for the stiffest rate in
    /// the circuit.
    #[error("integration step too large: max rate {rate:.3} * dt {dt:.3e} >= 0.1")]
    InvalidStep { rate: f64, dt: f64 },

    /// The simulation window clips the response: output amplitude at the
    /// window edges is not negligible relative to the peak.
    #[error("time window too short: edge/peak amplitude ratio {ratio:.3e} > 1e-4")]
    WindowTooShort { ratio: f64 },
}
