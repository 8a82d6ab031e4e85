//! Construction and interrogation of the slow manifold.
//!
//! The slow manifold `M` is the unique trajectory that stays inside the
//! narrowing strip between the horizontal isocline `H` and the
//! eigenslope isocline `alpha` for all `x > 0`. Because the strip attracts
//! under decreasing-`x` integration (the phase slope has `df/dy >= 0`
//! there), `M` is computed by seeding far to the right with the
//! inverse-power expansion and integrating down; any seed error contracts
//! like `exp(-(x_seed^2 - x^2) / (2 eps eta))`, which is astronomically
//! small over even a short descent.
//!
//! Far-right grid nodes take their values from the expansion directly: out
//! there the expansion's truncation error undercuts anything integration can
//! deliver, while second derivatives of integrated values lose their sign to
//! rounding (the curvature signal decays like `x^-3`, the noise does not).

use serde::Serialize;

use crate::analysis::{h_aux, p_aux};
use crate::integrate::{phase_run, Curve, Stats, Tol};
use crate::isoclines::{alpha, horizontal};
use crate::kinetics::Parameters;
use crate::series::{
    self, infinity_coefficients, origin_coefficients, straight_window, InfinitySeries, TailFit,
};
use crate::tolerances::{
    BISECTION_WIDTH, FENCE_BOUNDARY_FRACTION, FENCE_SLACK, MIN_FIT_SAMPLES, TAIL_EXPONENT_GAP,
    TAIL_FLOOR,
};
use crate::{Error, Point, Result};

/// Truncation error at which a grid node switches from integration to the
/// inverse-power expansion.
const SERIES_SWITCH_ERROR: f64 = 1e-15;

/// The expansion seed is trusted no closer in than this, whatever the
/// truncation estimate says.
const SERIES_MIN_X: f64 = 50.0;

/// In-flight slack for the descent: leaving the trapping strip by more than
/// this aborts construction. Much looser than the final fence check, which
/// judges the finished nodes.
const DESCENT_SLACK: f64 = 1e-6;

/// How the slow-manifold grid is built.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ManifoldConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of logarithmically spaced grid nodes.
    pub n_points: usize,
    /// Truncation order of the inverse-power seed expansion.
    pub seed_order: usize,
    pub tol: Tol,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            x_min: 1e-3,
            x_max: 1e3,
            n_points: 600,
            seed_order: 5,
            tol: Tol::default(),
        }
    }
}

impl ManifoldConfig {
    fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0) || !self.x_min.is_finite() {
            return Err(Error::Domain(format!("x_min must be positive, got {}", self.x_min)));
        }
        if !(self.x_max > self.x_min) || !self.x_max.is_finite() {
            return Err(Error::Domain(format!(
                "x_max must exceed x_min, got {} <= {}",
                self.x_max, self.x_min
            )));
        }
        if self.x_max < SERIES_MIN_X {
            return Err(Error::Domain(format!(
                "x_max must be at least {SERIES_MIN_X} so the far-field expansion can seed \
                 the descent, got {}",
                self.x_max
            )));
        }
        if self.n_points < 16 {
            return Err(Error::Domain(format!(
                "need at least 16 grid points, got {}",
                self.n_points
            )));
        }
        if !(2..=8).contains(&self.seed_order) {
            return Err(Error::Domain(format!(
                "seed_order must lie in 2..=8, got {}",
                self.seed_order
            )));
        }
        self.tol.validate()
    }
}

/// Fence margins of a computed curve against `H` below and `alpha` above.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FenceReport {
    /// Smallest `y - H(x)` over the nodes.
    pub min_lower_margin: f64,
    /// Smallest `alpha(x) - y` over the nodes.
    pub min_upper_margin: f64,
    /// Fraction of nodes sitting at or below the lower fence.
    pub frac_lower_boundary: f64,
    /// Fraction of nodes sitting at or above the upper fence.
    pub frac_upper_boundary: f64,
    pub n_nodes: usize,
    pub pass: bool,
}

/// The computed slow manifold.
#[derive(Debug, Clone, Serialize)]
pub struct SlowManifold {
    pub params: Parameters,
    pub curve: Curve,
    pub config: ManifoldConfig,
    /// Smallest grid node whose value came from the far-field expansion,
    /// if any did.
    pub series_from: Option<f64>,
    /// Where the descent was seeded.
    pub seed_x: f64,
    pub fences: FenceReport,
    pub stats: Stats,
}

impl SlowManifold {
    pub fn eval(&self, x: f64) -> f64 {
        self.curve.eval(x)
    }
}

/// Compute the slow manifold on a logarithmic grid.
///
/// Seeds at (or beyond) the right edge with the inverse-power expansion,
/// descends in `x` with the adaptive phase integrator, and assembles the
/// grid from whichever source is more accurate at each node. Fails if the
/// descent escapes the trapping strip, which indicates inadmissible numerics
/// rather than inadmissible parameters.
pub fn compute_manifold(p: &Parameters, cfg: &ManifoldConfig) -> Result<SlowManifold> {
    cfg.validate()?;
    let n_seed = cfg.seed_order;
    let with_estimator = infinity_coefficients(p, n_seed + 1);
    let rho_next = with_estimator.coeffs[n_seed + 1];
    let seed_series = InfinitySeries {
        coeffs: with_estimator.coeffs[..=n_seed].to_vec(),
        order: n_seed,
    };

    // Where the truncation error of the expansion drops under the switch
    // threshold. Beyond the grid it only matters that the seed error decays
    // during the descent, so the seed point is pulled in to just past the
    // right edge.
    let x_trunc = if rho_next == 0.0 {
        0.0
    } else {
        (rho_next.abs() / SERIES_SWITCH_ERROR).powf(1.0 / (n_seed as f64 + 1.0))
    };
    let (x_switch, seed_x) = if x_trunc <= cfg.x_max {
        let xs = x_trunc.max(SERIES_MIN_X);
        (Some(xs), xs)
    } else {
        (None, (1.05 * cfg.x_max).max(60.0))
    };

    let grid = log_grid(cfg.x_min, cfg.x_max, cfg.n_points);

    let seed_y = seed_series.eval(seed_x)?;
    let seed = Point::new(seed_x, seed_y);
    let escape = |pt: Point| {
        pt.y < horizontal(pt.x) - DESCENT_SLACK * (1.0 + pt.y.abs())
            || pt.y > alpha(p, pt.x) + DESCENT_SLACK * (1.0 + pt.y.abs())
    };
    // Cap the step: out in the flat far field the controller would take
    // steps tens of units wide, and grid values interpolated inside such a
    // step lose more accuracy than the integration itself.
    let run = phase_run(p, seed, cfg.x_min, &cfg.tol, Some(1.0), escape)?;
    if let Some(at) = run.stopped_early {
        return Err(Error::Construction(format!(
            "descent escaped the trapping strip at {at}"
        )));
    }
    if let Some(at) = run.stopped_at_vertical {
        return Err(Error::Construction(format!(
            "descent ran into the vertical isocline at {at}; the seed was not in the strip"
        )));
    }

    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    let mut ds = Vec::with_capacity(grid.len());
    let mut series_from = None;
    for &x in &grid {
        let from_series = matches!(x_switch, Some(xs) if x >= xs);
        let (y, d) = if from_series {
            if series_from.is_none() {
                series_from = Some(x);
            }
            (seed_series.eval(x)?, seed_series.eval_deriv(x)?)
        } else {
            let y = run.curve.eval(x);
            // The slope field itself is the most accurate slope available.
            (y, p.slope_field(Point::new(x, y))?)
        };
        xs.push(x);
        ys.push(y);
        ds.push(d);
    }
    let curve = Curve::from_slopes(xs, ys, ds)?;
    let fences = verify_fences(p, &curve);

    Ok(SlowManifold {
        params: *p,
        curve,
        config: *cfg,
        series_from,
        seed_x,
        fences,
        stats: run.stats,
    })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut xs: Vec<f64> = (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    xs[0] = lo;
    let last = xs.len() - 1;
    xs[last] = hi;
    xs
}

/// Check a curve against the fences of the trapping strip.
///
/// A sound manifold keeps every node above `H` and below `alpha` up to
/// rounding slack ([`FENCE_SLACK`]), with at most a small fraction of nodes
/// pinned exactly on a fence.
pub fn verify_fences(p: &Parameters, curve: &Curve) -> FenceReport {
    let n = curve.len();
    let mut min_lower = f64::INFINITY;
    let mut min_upper = f64::INFINITY;
    let mut on_lower = 0usize;
    let mut on_upper = 0usize;
    for i in 0..n {
        let (x, y) = (curve.xs()[i], curve.ys()[i]);
        let lower = y - horizontal(x);
        let upper = alpha(p, x) - y;
        min_lower = min_lower.min(lower);
        min_upper = min_upper.min(upper);
        if lower <= 0.0 {
            on_lower += 1;
        }
        if upper <= 0.0 {
            on_upper += 1;
        }
    }
    let frac_lower = on_lower as f64 / n as f64;
    let frac_upper = on_upper as f64 / n as f64;
    FenceReport {
        min_lower_margin: min_lower,
        min_upper_margin: min_upper,
        frac_lower_boundary: frac_lower,
        frac_upper_boundary: frac_upper,
        n_nodes: n,
        pass: min_lower > -FENCE_SLACK
            && min_upper > -FENCE_SLACK
            && frac_lower <= FENCE_BOUNDARY_FRACTION
            && frac_upper <= FENCE_BOUNDARY_FRACTION,
    }
}

/// Analytic slope and curvature of the manifold at `x`.
///
/// The slope is the phase field itself, `M' = f(x, M)`; the curvature comes
/// from differentiating along the curve, `M'' = p(x, M) h(x, M)` with `p`
/// the positive prefactor and `h` the curvature numerator.
pub fn slope_and_curvature(p: &Parameters, curve: &Curve, x: f64) -> Result<(f64, f64)> {
    let pt = Point::new(x, curve.eval(x));
    let slope = p.slope_field(pt)?;
    let curv = p_aux(p, pt)? * h_aux(p, pt)?;
    Ok((slope, curv))
}

/// Power-law fit of the origin remainder `M(x) - sum_{n <= floor(kappa)}
/// sigma_n x^n`, whose exponent recovers `kappa`.
///
/// Fails with [`Error::ResonantTail`] at integer `kappa` (the remainder is
/// not a pure power there) and with [`Error::TailBelowPrecision`] when no
/// exponent can be extracted: either `kappa` lies within
/// [`TAIL_EXPONENT_GAP`] of an integer, so the power law cannot be told
/// apart from the neighbouring series term, or the remainder drowns in the
/// rounding floor of the series subtraction, which happens at large `kappa`:
/// each subtracted term carries relative rounding of order `1e-16`, so
/// remainders below `~1e-13 sigma_1 x` are noise.
pub fn origin_tail(p: &Parameters, m: &SlowManifold) -> Result<TailFit> {
    let sp = p.spectrum();
    if sp.resonant {
        return Err(Error::ResonantTail { kappa: sp.kappa });
    }
    let n_sub = (sp.kappa.floor() as usize).min(20);
    // When kappa sits close to an integer the remainder x^kappa is nearly
    // parallel (in log-log) to the adjacent series powers: just above
    // floor(kappa) the subtracted coefficient comes from a near-vanishing
    // recursion denominator, just below floor(kappa) + 1 the next series
    // term outgrows the tail before it clears the noise floor. Either way
    // the fit returns the neighbouring integer, not kappa, so refuse.
    let frac = sp.kappa - sp.kappa.floor();
    if !(TAIL_EXPONENT_GAP..=1.0 - TAIL_EXPONENT_GAP).contains(&frac) {
        return Err(Error::TailBelowPrecision { kappa: sp.kappa, subtracted: n_sub });
    }
    let series = origin_coefficients(p, n_sub);
    let sigma1 = sp.sigma;

    let mut xs = Vec::new();
    let mut rs = Vec::new();
    for i in 0..m.curve.len() {
        let x = m.curve.xs()[i];
        if x > 0.1 {
            break;
        }
        let r = m.curve.ys()[i] - series.eval(x);
        if r.abs() >= TAIL_FLOOR * sigma1 * x {
            xs.push(x);
            rs.push(r);
        }
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::TailBelowPrecision { kappa: sp.kappa, subtracted: n_sub });
    }

    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let lr: Vec<f64> = rs.iter().map(|r| r.abs().ln()).collect();
    let Some((i, j)) = straight_window(&lx, &lr) else {
        return Err(Error::TailBelowPrecision { kappa: sp.kappa, subtracted: n_sub });
    };
    let fit = match series::fit_tail(&xs[i..j], &rs[i..j]) {
        Ok(fit) => fit,
        // A sign flip inside the straightest window means the remainder is
        // rounding scatter, not a power law.
        Err(Error::SignChange { .. }) => {
            return Err(Error::TailBelowPrecision { kappa: sp.kappa, subtracted: n_sub })
        }
        Err(e) => return Err(e),
    };
    if fit.kappa_fit <= 1.0 {
        // Integration error scales like x itself; a fitted exponent at or
        // below 1 is that noise, not the remainder.
        return Err(Error::TailBelowPrecision { kappa: sp.kappa, subtracted: n_sub });
    }
    Ok(fit)
}

/// Behaviour of `M''` as `x` decreases to 0.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurvatureLimit {
    /// `M''(0+)` exists; the limit is `2 sigma_2` when `kappa > 2`.
    Finite { limit: f64, at: f64 },
    /// `|M''|` grows without bound, the `kappa < 2` regime.
    Divergent { value: f64, at: f64 },
    /// The probes neither stabilized nor blew up.
    Indeterminate { value: f64, at: f64 },
}

/// Probe `M''` along `x_k = 1e-2 * 2^-k` down to the curve's left edge and
/// classify the limit.
///
/// Requires the curve to reach at least `x ~ 1e-4` so there are enough
/// probes to judge; classification uses the last three: stabilized within 2%
/// means finite, monotone growth beyond `1e3` in magnitude means divergent,
/// anything else is indeterminate.
pub fn second_derivative_limit(p: &Parameters, curve: &Curve) -> Result<CurvatureLimit> {
    let mut probes = Vec::new();
    let mut x = 1e-2;
    while x >= curve.x_min() * (1.0 - 1e-12) {
        let pt = Point::new(x, curve.eval(x));
        probes.push((x, p_aux(p, pt)? * h_aux(p, pt)?));
        x *= 0.5;
    }
    if probes.len() < 8 {
        return Err(Error::Domain(format!(
            "curvature probing needs the curve to reach x ~ 1e-4; it stops at {}",
            curve.x_min()
        )));
    }
    let tail = &probes[probes.len() - 3..];
    let (at, value) = tail[2];
    let growing = tail[1].1.abs() > tail[0].1.abs() && tail[2].1.abs() > tail[1].1.abs();
    if growing && tail.iter().all(|&(_, v)| v.abs() > 1e3) {
        return Ok(CurvatureLimit::Divergent { value, at });
    }
    let stable = tail
        .iter()
        .all(|&(_, v)| (v - value).abs() <= 0.02 * value.abs().max(1e-30));
    if stable {
        Ok(CurvatureLimit::Finite { limit: value, at })
    } else {
        Ok(CurvatureLimit::Indeterminate { value, at })
    }
}

/// Result of perturbing the manifold and integrating toward larger `x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniquenessProbe {
    pub x_start: f64,
    pub delta: f64,
    /// Where the upward-perturbed trajectory left the trapping strip.
    pub exit_above: Option<Point>,
    /// Where the downward-perturbed one left.
    pub exit_below: Option<Point>,
}

/// Perturb the manifold by `±delta` at `x_start` and integrate toward
/// larger `x` until the trajectories leave the trapping strip.
///
/// Increasing-`x` integration reverses the contraction that makes the
/// manifold computable, so any neighbour must peel away; both exits
/// existing (well before the right edge) is the uniqueness certificate.
pub fn uniqueness_probe(
    p: &Parameters,
    m: &SlowManifold,
    x_start: f64,
    delta: f64,
) -> Result<UniquenessProbe> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !(x_start >= m.curve.x_min() && x_start < m.curve.x_max()) {
        return Err(Error::Domain(format!(
            "x_start = {x_start} outside the manifold range [{}, {}]",
            m.curve.x_min(),
            m.curve.x_max()
        )));
    }
    let y0 = m.curve.eval(x_start);
    let mut exits = [None, None];
    for (slot, sgn) in [(0usize, 1.0), (1usize, -1.0)] {
        let start = Point::new(x_start, y0 + sgn * delta);
        let outside = |pt: Point| {
            pt.y < horizontal(pt.x) - FENCE_SLACK || pt.y > alpha(p, pt.x) + FENCE_SLACK
        };
        let run = phase_run(p, start, m.curve.x_max(), &m.config.tol, None, outside)?;
        exits[slot] = run.stopped_early;
    }
    Ok(UniquenessProbe {
        x_start,
        delta,
        exit_above: exits[0],
        exit_below: exits[1],
    })
}

/// A manifold point found by antifunnel shooting instead of descent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AntifunnelSeed {
    pub x: f64,
    pub y: f64,
    /// Width of the final seed bracket.
    pub bracket_width: f64,
}

/// Locate `M(x_lo)` by bisecting seed ordinates between the fences.
///
/// Seeds below the manifold exit the strip through `H` under increasing-`x`
/// integration, seeds above exit through `alpha`; the split point is the
/// manifold. This is an independent cross-check on the descent
/// construction: it never integrates in the contracting direction.
pub fn antifunnel_bisect(p: &Parameters, x_lo: f64, x_hi: f64, tol: Tol) -> Result<AntifunnelSeed> {
    if !(x_lo > 0.0 && x_hi > x_lo) {
        return Err(Error::Domain(format!(
            "need 0 < x_lo < x_hi, got {x_lo}, {x_hi}"
        )));
    }
    let (h0, a0) = (horizontal(x_lo), alpha(p, x_lo));
    let classify = |y: f64| -> Result<i8> {
        let mut exited_above = false;
        let mut exited_below = false;
        let outside = |pt: Point| {
            pt.y < horizontal(pt.x) - FENCE_SLACK || pt.y > alpha(p, pt.x) + FENCE_SLACK
        };
        let run = phase_run(p, Point::new(x_lo, y), x_hi, &tol, None, outside)?;
        if let Some(at) = run.stopped_early {
            exited_below = at.y < horizontal(at.x);
            exited_above = !exited_below;
        }
        Ok(if exited_below {
            -1
        } else if exited_above {
            1
        } else {
            // Survived to x_hi inside the strip: decide by which half of the
            // strip it ended in. Only reachable when x_hi is too close.
            let end = run.curve.eval(run.curve.x_max());
            let mid = 0.5 * (horizontal(run.curve.x_max()) + alpha(p, run.curve.x_max()));
            if end > mid {
                1
            } else {
                -1
            }
        })
    };

    let (mut lo, mut hi) = (h0, a0);
    // The fences themselves exit instantly in the expected directions, so
    // they bracket the manifold.
    while hi - lo > BISECTION_WIDTH * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if classify(mid)? < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(AntifunnelSeed { x: x_lo, y: 0.5 * (lo + hi), bracket_width: hi - lo })
}
