//! Phase-plane analysis of the planar Michaelis-Menten reduction.
//!
//! The crate studies the nondimensional system
//!
//! ```text
//! x' = -x + (1 - eta) y + x y
//! y' = eps^-1 (x - y - x y)
//! ```
//!
//! obtained from the irreversible mechanism `S + E <=> C -> P + E` by scaling
//! substrate into `x`, complex into `y in [0, 1)`, and time by `k1 e0`. The
//! parameters satisfy `eps > 0` and `0 < eta < 1`.
//!
//! Everything of interest happens between the isoclines: the horizontal
//! isocline `H` and the curve `alpha` bound a narrowing antifunnel that traps
//! a unique distinguished solution, the slow manifold `M`. The modules build
//! up the machinery to compute `M` and interrogate the geometry around it:
//!
//! - [`kinetics`]: rate constants, nondimensionalization, vector field,
//!   linearization at the origin and its spectrum.
//! - [`isoclines`]: the isocline family `x / (K(c) + x)`, the distinguished
//!   members `H`, `V`, `alpha`, and region classification.
//! - [`series`]: power-series expansions of `M` at the origin and at
//!   infinity, plus power-law tail fitting.
//! - [`integrate`]: an adaptive embedded Runge-Kutta pair with dense output
//!   and event location, in both time and phase form.
//! - [`manifold`]: construction of `M`, fence verification, slopes,
//!   curvature, and the behaviour of `M''` at the origin.
//! - [`analysis`]: concavity classification, inflection loci, entry into the
//!   trapping regions, and Fraser-Roussel functional iteration.
//! - [`cli`]: the `mmphase` command-line front end.

pub mod analysis;
pub mod cli;
pub mod integrate;
pub mod isoclines;
pub mod kinetics;
pub mod manifold;
mod numeric;
pub mod series;
pub mod tolerances;

use serde::Serialize;

/// A point of the `(x, y)` phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameter or rate-constant validation failed.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    /// The slope field `y' = f(x, y)` has no value on the vertical isocline.
    #[error("slope field singular at ({x}, {y}): point lies on the vertical isocline")]
    SingularSlope { x: f64, y: f64 },

    /// `K(c)` has a pole at `c = -1/eps`.
    #[error("isocline scale K(c) has a pole at c = {c}")]
    KPole { c: f64 },

    /// An argument fell outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// The step-size controller collapsed; the problem is too stiff for the
    /// explicit pair at the requested tolerance.
    #[error("step size underflow at {at} (h = {h:e}); problem too stiff at this tolerance")]
    StepUnderflow { at: f64, h: f64 },

    /// Slow-manifold construction could not produce a curve inside the
    /// antifunnel.
    #[error("slow-manifold construction failed: {0}")]
    Construction(String),

    /// The origin tail of the slow manifold is not a pure power law when the
    /// eigenvalue ratio is an integer.
    #[error("origin tail unsupported at resonant eigenvalue ratio kappa = {kappa}")]
    ResonantTail { kappa: f64 },

    /// The origin-tail residual sits at or below the floating-point floor of
    /// the series subtraction, so no exponent can be extracted.
    #[error(
        "origin tail residual below the rounding floor of the degree-{subtracted} \
         subtraction; the x^kappa remainder (kappa = {kappa}) is not resolvable in f64"
    )]
    TailBelowPrecision { kappa: f64, subtracted: usize },

    /// A fit or audit was handed fewer samples than it needs.
    #[error("too few samples: need {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    /// A residual changed sign inside a window that must be sign-pure.
    #[error("residual changes sign inside the fit window (index {index})")]
    SignChange { index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Inadmissible(_) => "inadmissible-parameters",
            Error::SingularSlope { .. } => "singular-slope",
            Error::KPole { .. } => "k-pole",
            Error::Domain(_) => "domain",
            Error::StepUnderflow { .. } => "step-underflow",
            Error::Construction(_) => "construction",
            Error::ResonantTail { .. } => "resonant-tail",
            Error::TailBelowPrecision { .. } => "tail-below-precision",
            Error::TooFewSamples { .. } => "too-few-samples",
            Error::SignChange { .. } => "sign-change",
        }
    }
}
