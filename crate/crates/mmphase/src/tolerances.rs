//! Numerical tolerances used across the crate.
//!
//! Every constant is pinned here rather than scattered through call sites so
//! that a tolerance change is a one-line diff with an audit trail.

/// `kappa` counts as an integer (resonant) below this distance.
pub const RESONANCE_KAPPA_TOL: f64 = 1e-9;

/// `kappa` within this distance of an integer flags a near-resonance warning.
pub const NEAR_RESONANCE_WARN: f64 = 1e-4;

/// Absolute `y` slack when deciding whether a point sits on a region boundary.
pub const REGION_BOUNDARY_TOL: f64 = 1e-13;

/// Phase-form integration stops when `|x' (x, y)| < guard * (1 + x)`,
/// i.e. on close approach to the vertical isocline.
pub const V_PROXIMITY_GUARD: f64 = 1e-10;

/// Events along time trajectories are bisected to this width in `t`.
pub const EVENT_TIME_TOL: f64 = 1e-12;

/// Fence margins of a computed slow manifold may dip this far below zero
/// before the check fails (rounding slack).
pub const FENCE_SLACK: f64 = 1e-9;

/// Fraction of grid points allowed to touch a fence (margin <= 0) before the
/// curve counts as lying on the boundary instead of inside it.
pub const FENCE_BOUNDARY_FRACTION: f64 = 0.01;

/// Origin-tail residuals below `TAIL_FLOOR * sigma1 * x` are rounding noise
/// from the series subtraction, not signal.
pub const TAIL_FLOOR: f64 = 1e-13;

/// The origin-tail exponent must sit at least this far from the integers on
/// either side, or the fitted power law just reproduces the neighbouring
/// series term.
pub const TAIL_EXPONENT_GAP: f64 = 0.2;

/// Relative integration tolerances below this are rejected: the embedded
/// pair cannot deliver them in f64.
pub const MIN_REL_TOL: f64 = 1e-13;

/// Steps below `STEP_UNDERFLOW * span` abort integration as a stiffness
/// failure.
pub const STEP_UNDERFLOW: f64 = 1e-15;

/// The slow manifold must satisfy `M = F(x, M')` to this tolerance.
pub const SELF_CONSISTENCY_TOL: f64 = 1e-9;

/// Inflection-locus roots must satisfy `|h| < tol * (1 + |y|)` after
/// back-substitution.
pub const LOCUS_RESIDUAL_TOL: f64 = 1e-9;

/// Antifunnel shooting bisects the seed ordinate to this width.
pub const BISECTION_WIDTH: f64 = 1e-14;

/// A slope `c` counts as the K-pole `-1/eps` below this relative distance.
pub const K_POLE_TOL: f64 = 1e-10;

/// Log-log windows count as straight when the fit RMS is below this (natural
/// log units, so 0.01 is about 1% multiplicative scatter).
pub const STRAIGHT_WINDOW_RMS: f64 = 0.01;

/// Minimum number of samples for any power-law fit.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Time-form integration warns below this `eps`: trajectories become stiff
/// enough that an explicit pair spends most of its budget on stability.
pub const STIFF_EPS_WARN: f64 = 1e-3;
