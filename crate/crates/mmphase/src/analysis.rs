//! Geometry of trajectories around the slow manifold: concavity, inflection
//! loci, entry into the trapping strip, and functional iteration toward the
//! manifold.
//!
//! Differentiating the phase equation along a trajectory gives
//!
//! ```text
//! y'' = p(x, y) h(x, y),
//! p = eta / (eps D^2) > 0,        D = -x + (1 - eta + x) y,
//! h = y (y - 1) + x f(x, y),
//! ```
//!
//! so off the vertical isocline the concavity is the sign of `h` alone. The
//! zero set of `h` coincides (off `V`) with the zero set of the polynomial
//!
//! ```text
//! G(x, y) = eps y (y - 1) ((1 - eta + x) y - x) + x (x - (1 + x) y),
//! ```
//!
//! a cubic in `y` with exactly three real roots for every `x > 0`: one
//! negative, one strictly between the manifold and `alpha`, one above 1.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::integrate::{integrate_time, Curve, Event, EventKind, Tol};
use crate::isoclines::{alpha, horizontal, in_gamma1, vertical};
use crate::kinetics::Parameters;
use crate::manifold::SlowManifold;
use crate::numeric;
use crate::tolerances::{K_POLE_TOL, LOCUS_RESIDUAL_TOL};
use crate::{Error, Point, Result};

/// Curvature numerator `h = y (y - 1) + x f(x, y)`; singular on `V` along
/// with the slope field itself.
pub fn h_aux(p: &Parameters, pt: Point) -> Result<f64> {
    Ok(pt.y * (pt.y - 1.0) + pt.x * p.slope_field(pt)?)
}

/// Curvature prefactor `p = eta / (eps D^2)`, strictly positive off `V`.
pub fn p_aux(p: &Parameters, pt: Point) -> Result<f64> {
    let d = p.phase_denominator(pt);
    if d.abs() < 1e-14 * (1.0 + pt.x.abs()) {
        return Err(Error::SingularSlope { x: pt.x, y: pt.y });
    }
    Ok(p.eta() / (p.eps() * d * d))
}

/// The concavity polynomial `G`, equal to `eps D h` off the vertical
/// isocline but defined everywhere.
pub fn concavity_cubic(p: &Parameters, pt: Point) -> f64 {
    let Point { x, y } = pt;
    p.eps() * y * (y - 1.0) * ((1.0 - p.eta() + x) * y - x) + x * (x - (1.0 + x) * y)
}

fn concavity_cubic_dy(p: &Parameters, x: f64, y: f64) -> f64 {
    let w = 1.0 - p.eta() + x;
    p.eps() * ((2.0 * y - 1.0) * (w * y - x) + y * (y - 1.0) * w) - x * (1.0 + x)
}

/// Horizontal bands used by the concavity table. Unlike the isocline
/// regions, these are split at the slow manifold itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcavityBand {
    BelowManifold,
    ManifoldToAlpha,
    AlphaToVertical,
    VerticalToOne,
    AtOrAboveOne,
}

/// What the theory says about each band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableExpectation {
    /// `y'' < 0` throughout.
    Down,
    /// `y'' > 0` throughout.
    Up,
    /// The band contains one branch of the inflection locus; the sign of
    /// `h` decides pointwise.
    FollowsH,
}

/// The concavity table itself.
pub fn expected_concavity(band: ConcavityBand) -> TableExpectation {
    match band {
        ConcavityBand::BelowManifold => TableExpectation::Down,
        ConcavityBand::ManifoldToAlpha => TableExpectation::FollowsH,
        ConcavityBand::AlphaToVertical => TableExpectation::Up,
        ConcavityBand::VerticalToOne => TableExpectation::Down,
        ConcavityBand::AtOrAboveOne => TableExpectation::FollowsH,
    }
}

/// One audited sample point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcavityRow {
    pub point: Point,
    pub band: ConcavityBand,
    pub expected: TableExpectation,
    /// `p h` at the point.
    pub analytic: f64,
    /// Centered difference of `f` along the field direction.
    pub differenced: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub rows: Vec<ConcavityRow>,
    pub n_consistent: usize,
    /// Points skipped as too close to the inflection locus to carry a
    /// trustworthy sign.
    pub n_skipped: usize,
    pub pass: bool,
}

/// Sample every band over the manifold's `x` range and check the concavity
/// table against both the analytic curvature and a finite difference of the
/// slope field.
///
/// Sample ordinates are jittered inside each band by a seeded generator so
/// repeated audits cover different points while staying reproducible.
pub fn concavity_audit(
    p: &Parameters,
    m: &SlowManifold,
    n_x: usize,
    seed: u64,
) -> Result<ConcavityReport> {
    if n_x < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n_x });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = m.curve.x_min().max(1e-2);
    let hi = m.curve.x_max().min(50.0);
    if !(hi > lo) {
        return Err(Error::Domain(
            "manifold range too narrow for a concavity audit".into(),
        ));
    }

    let mut rows = Vec::new();
    let mut n_skipped = 0usize;
    for i in 0..n_x {
        let x = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n_x - 1) as f64).exp();
        let my = m.curve.eval(x);
        let (a, v) = (alpha(p, x), vertical(p, x));
        let jitter = |rng: &mut ChaCha8Rng| 0.2 + 0.6 * rng.random::<f64>();
        let samples = [
            (ConcavityBand::BelowManifold, my * jitter(&mut rng)),
            (ConcavityBand::ManifoldToAlpha, my + (a - my) * jitter(&mut rng)),
            (ConcavityBand::AlphaToVertical, a + (v - a) * jitter(&mut rng)),
            (ConcavityBand::VerticalToOne, v + (1.0 - v) * jitter(&mut rng)),
            (ConcavityBand::AtOrAboveOne, 1.0 + 1.5 * jitter(&mut rng)),
        ];
        for (band, y) in samples {
            let pt = Point::new(x, y);
            let h = h_aux(p, pt)?;
            // Too close to the locus: the differenced sign is meaningless.
            if h.abs() < 1e-6 * (1.0 + y * y) {
                n_skipped += 1;
                continue;
            }
            let analytic = p_aux(p, pt)? * h;
            let f0 = p.slope_field(pt)?;
            // Keep the probe step well inside the current side of V: the
            // slope field changes sign across it, and near V the naive step
            // overshoots the denominator's zero.
            let d_abs = p.phase_denominator(pt).abs();
            let dx = (1e-5 * (1.0 + x)).min(0.02 * d_abs / (f0.abs() * (1.0 - p.eta() + x) + 1.0));
            let fp = p.slope_field(Point::new(x + dx, y + dx * f0))?;
            let fm = p.slope_field(Point::new(x - dx, y - dx * f0))?;
            let differenced = (fp - fm) / (2.0 * dx);
            let expected = expected_concavity(band);
            let consistent = match expected {
                TableExpectation::Down => analytic < 0.0 && differenced < 0.0,
                TableExpectation::Up => analytic > 0.0 && differenced > 0.0,
                TableExpectation::FollowsH => analytic.signum() == differenced.signum(),
            };
            rows.push(ConcavityRow { point: pt, band, expected, analytic, differenced, consistent });
        }
    }
    let n_consistent = rows.iter().filter(|r| r.consistent).count();
    let pass = n_consistent == rows.len();
    Ok(ConcavityReport { rows, n_consistent, n_skipped, pass })
}

/// Which of the three root branches of `G` a locus point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InflectionBranch {
    /// The root below the axis (no trajectory reaches it in the quadrant).
    BelowAxis,
    /// The root between the manifold and `alpha`: the inflection locus that
    /// shapes trajectories inside the strip.
    MidStrip,
    /// The root above `y = 1`.
    AboveOne,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InflectionPoint {
    pub x: f64,
    pub y: f64,
    pub branch: InflectionBranch,
    /// `h` back-substituted at the root; should vanish to rounding.
    pub h_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InflectionLocus {
    pub points: Vec<InflectionPoint>,
    pub warnings: Vec<String>,
}

/// Trace all three branches of the inflection locus over the given
/// abscissae.
///
/// Each root is bracketed by sign (the cubic's structure guarantees the
/// brackets), polished by safeguarded Newton, then validated by
/// back-substitution into `h`; roots too close to the vertical isocline are
/// discarded, since there `G = eps D h` stops witnessing `h`.
pub fn inflection_locus(p: &Parameters, xs: &[f64]) -> Result<InflectionLocus> {
    if xs.is_empty() {
        return Err(Error::Domain("no abscissae given for the inflection locus".into()));
    }
    let mut points = Vec::with_capacity(3 * xs.len());
    let mut warnings = Vec::new();

    for &x in xs {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("locus abscissae must be positive, got {x}")));
        }
        let g = |y: f64| concavity_cubic(p, Point::new(x, y));
        let gy = |y: f64| concavity_cubic_dy(p, x, y);

        // Bracket ends: G(x, 0) = x^2 > 0, G(x, alpha) < 0, G(x, 1) = -x < 0,
        // and the cubic escapes to -inf below and +inf above.
        let mut lo = -1.0;
        while g(lo) >= 0.0 {
            lo *= 2.0;
        }
        let mut hi = 2.0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
        }
        let a = alpha(p, x);
        let brackets = [
            (InflectionBranch::BelowAxis, lo, 0.0),
            (InflectionBranch::MidStrip, 0.0, a),
            (InflectionBranch::AboveOne, 1.0, hi),
        ];
        for (branch, b_lo, b_hi) in brackets {
            let xtol = 1e-13 * (1.0 + b_hi.abs());
            let Some(y) = numeric::newton_bracketed(|y| (g(y), gy(y)), b_lo, b_hi, xtol) else {
                warnings.push(format!("no sign change for the {branch:?} root at x = {x}"));
                continue;
            };
            let pt = Point::new(x, y);
            if p.phase_denominator(pt).abs() < 1e-6 * (1.0 + x) {
                warnings.push(format!(
                    "root at ({x}, {y}) discarded: too close to the vertical isocline"
                ));
                continue;
            }
            let h_residual = h_aux(p, pt)?;
            if h_residual.abs() > LOCUS_RESIDUAL_TOL * (1.0 + y.abs()) {
                warnings.push(format!(
                    "root at ({x}, {y}) back-substitutes poorly: h = {h_residual:e}"
                ));
            }
            points.push(InflectionPoint { x, y, branch, h_residual });
        }
    }
    Ok(InflectionLocus { points, warnings })
}

/// `x` below which every trajectory from the outer strip must already have
/// entered the trapping strip: `1/sigma - (1 - eta)`.
pub fn entry_threshold_x(p: &Parameters) -> f64 {
    1.0 / p.spectrum().sigma - (1.0 - p.eta())
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EntryOutcome {
    /// The trajectory entered the trapping strip, at `x` no smaller than
    /// the threshold if the theory holds.
    Entered { t: f64, point: Point },
    /// `x` fell below the threshold while still outside: a counterexample.
    NotEntered { point: Point },
    /// The horizon ended first.
    Inconclusive { t_end: f64, last: Point },
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub outcome: EntryOutcome,
    pub threshold_x: f64,
    /// The first crossing of the vertical isocline, for trajectories that
    /// start above it.
    pub crossed_vertical: Option<Event>,
    pub events: Vec<Event>,
}

/// Follow a time trajectory and report when it enters the trapping strip,
/// against the threshold `x = 1/sigma - (1 - eta)`.
///
/// Only defined away from resonance, where the eigenslope isocline bounding
/// the strip is cleanly transversal to the flow.
pub fn gamma1_entry(p: &Parameters, start: Point, t_end: f64, tol: Tol) -> Result<EntryReport> {
    let sp = p.spectrum();
    if sp.resonant {
        return Err(Error::Domain(format!(
            "entry analysis is not defined at resonant kappa = {}",
            sp.kappa
        )));
    }
    let threshold = entry_threshold_x(p);
    let traj = integrate_time(p, start, t_end, tol)?;

    let t_entry = traj
        .events
        .iter()
        .find(|e| e.kind == EventKind::EnterGamma1)
        .map(|e| (e.t, e.point));
    let crossed_vertical = traj
        .events
        .iter()
        .find(|e| e.kind == EventKind::CrossVertical)
        .copied();
    // First sample that dipped below the threshold while still outside.
    let t_breach = traj
        .ts
        .iter()
        .zip(&traj.points)
        .find(|&(_, pt)| pt.x < threshold && !in_gamma1(p, *pt))
        .map(|(&t, &pt)| (t, pt));

    let outcome = match (t_entry, t_breach) {
        (Some((t, point)), None) => EntryOutcome::Entered { t, point },
        (Some((t, point)), Some((tb, _))) if t <= tb => EntryOutcome::Entered { t, point },
        (_, Some((_, point))) => EntryOutcome::NotEntered { point },
        (None, None) => EntryOutcome::Inconclusive {
            t_end,
            last: *traj.points.last().unwrap(),
        },
    };
    Ok(EntryReport { outcome, threshold_x: threshold, crossed_vertical, events: traj.events })
}

/// One algebraic update of the functional iteration: given the slope value
/// `c` at `x`, return the new ordinate and whether the slope hit the
/// isocline family's pole level.
pub(crate) fn fraser_step(p: &Parameters, x: f64, c: f64) -> (f64, bool) {
    let (eps, eta) = (p.eps(), p.eta());
    if (1.0 + eps * c).abs() < K_POLE_TOL {
        // K(c) has its pole here and the isocline degenerates to the axis.
        return (0.0, true);
    }
    let den = 1.0 + x + eps * c * (1.0 - eta + x);
    if den.abs() < K_POLE_TOL * (1.0 + x) {
        return (0.0, true);
    }
    (x * (1.0 + eps * c) / den, false)
}

/// Iterates of the slow-manifold functional iteration.
#[derive(Debug, Clone)]
pub struct FraserIterates {
    /// `iterates[0]` is the starting curve `H`; `iterates[k]` is the k-th
    /// update.
    pub iterates: Vec<Curve>,
    /// Node indices where an iterate hit the pole level, per iterate.
    pub pole_flags: Vec<Vec<usize>>,
}

impl FraserIterates {
    /// Sup distance of each iterate from a reference curve over `xs`.
    pub fn sup_distances(&self, reference: &Curve, xs: &[f64]) -> Vec<f64> {
        self.iterates
            .iter()
            .map(|c| {
                xs.iter()
                    .map(|&x| (c.eval(x) - reference.eval(x)).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Run the functional iteration `y_{k+1} = F(x, y_k')` from `y_0 = H`.
///
/// Writing the phase equation as `y = F(x, y')` and feeding the previous
/// iterate's slope into the right side converges rapidly onto the slow
/// manifold from the QSSA curve. Slopes come from the iterate's own spline;
/// the starting curve carries the exact slopes of `H`.
pub fn fraser_iterate(p: &Parameters, xs: &[f64], n_iter: usize) -> Result<FraserIterates> {
    if xs.len() < 4 {
        return Err(Error::TooFewSamples { need: 4, got: xs.len() });
    }
    if xs.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
        return Err(Error::Domain(
            "iteration nodes must be positive and strictly increasing".into(),
        ));
    }

    let ys0: Vec<f64> = xs.iter().map(|&x| horizontal(x)).collect();
    let ds0: Vec<f64> = xs.iter().map(|&x| 1.0 / ((1.0 + x) * (1.0 + x))).collect();
    let mut iterates = vec![Curve::from_slopes(xs.to_vec(), ys0, ds0)?];
    let mut pole_flags = vec![Vec::new()];

    for _ in 0..n_iter {
        let prev = iterates.last().unwrap();
        let mut ys = Vec::with_capacity(xs.len());
        let mut flags = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            let c = prev.slopes()[i];
            let (y, pole) = fraser_step(p, x, c);
            if pole {
                flags.push(i);
            }
            ys.push(y);
        }
        iterates.push(Curve::natural_spline(xs.to_vec(), ys)?);
        pole_flags.push(flags);
    }
    Ok(FraserIterates { iterates, pole_flags })
}
