//! Adaptive integration of the kinetics in time form and phase form.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with FSAL, a
//! proportional-integral step-size controller, and cubic Hermite dense
//! output used for event location. Time-form integration records crossings
//! of the distinguished isoclines and entries into the invariant strips;
//! phase-form integration treats `x` as the independent variable and stops
//! cleanly when a trajectory runs into the vertical isocline, where the
//! slope field blows up.

use serde::Serialize;

use crate::isoclines::{self, in_gamma0, in_gamma1};
use crate::kinetics::Parameters;
use crate::numeric;
use crate::tolerances::{
    EVENT_TIME_TOL, MIN_REL_TOL, STEP_UNDERFLOW, STIFF_EPS_WARN, V_PROXIMITY_GUARD,
};
use crate::{Error, Point, Result};

/// Hard ceiling on accepted steps per call; a safety net behind the
/// step-underflow stiffness check.
const MAX_STEPS: usize = 20_000_000;

/// Relative and absolute error tolerances for the embedded pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { rel: 1e-10, abs: 1e-12 }
    }
}

impl Tol {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        let t = Tol { rel, abs };
        t.validate()?;
        Ok(t)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.rel >= MIN_REL_TOL) || !self.rel.is_finite() {
            return Err(Error::Domain(format!(
                "relative tolerance must be at least {MIN_REL_TOL:e}, got {:e}",
                self.rel
            )));
        }
        if !(self.abs > 0.0) || !self.abs.is_finite() {
            return Err(Error::Domain(format!(
                "absolute tolerance must be positive, got {:e}",
                self.abs
            )));
        }
        Ok(())
    }
}

/// Work counters for one integration.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Stats {
    pub n_accepted: usize,
    pub n_rejected: usize,
    pub n_rhs: usize,
}

/// One accepted step with enough data for cubic Hermite interpolation.
pub(crate) struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = numeric::hermite(
                self.t0, self.t1, self.y0[i], self.y1[i], self.f0[i], self.f1[i], t,
            );
        }
        out
    }
}

/// What the per-step observer wants done next.
pub(crate) enum StepOutcome {
    Continue,
    /// Finish at the given interior time of the step just taken.
    Stop(f64),
}

/// Final state and work counters of one driver run.
pub(crate) struct IvpEnd<const N: usize> {
    // Library callers rebuild the path from the step observer and only read
    // the counters; the driver tests read the landing state directly.
    #[cfg_attr(not(test), allow(dead_code))]
    pub y: [f64; N],
    pub stats: Stats,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Controller settings, the classic values for this pair.
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_SHRINK_MAX: f64 = 5.0; // step may shrink by at most 1/5 per accept
const FAC_GROW_MAX: f64 = 0.1; // and grow by at most 10x

/// Core driver. `on_step` sees every accepted step and may stop inside one;
/// the final state is then the dense-output value at the stop time.
pub(crate) fn solve_ivp<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t_end: f64,
    y0: [f64; N],
    tol: &Tol,
    max_step: Option<f64>,
    mut on_step: impl FnMut(&DenseStep<N>) -> StepOutcome,
) -> Result<IvpEnd<N>> {
    tol.validate()?;
    let mut stats = Stats::default();
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(IvpEnd { y: y0, stats });
    }
    let dir = span.signum();
    let hmax = max_step.unwrap_or(f64::INFINITY).min(span.abs());

    let mut t = t0;
    let mut y = y0;
    let mut f0 = f(t, &y);
    stats.n_rhs += 1;

    let mut h = initial_step(&mut f, t, &y, &f0, dir, hmax, tol, &mut stats);
    let mut facold: f64 = 1e-4;
    let mut rejected = false;

    loop {
        if (t - t_end) * dir >= 0.0 {
            return Ok(IvpEnd { y, stats });
        }
        if stats.n_accepted > MAX_STEPS {
            return Err(Error::Domain(format!(
                "integration exceeded {MAX_STEPS} accepted steps"
            )));
        }
        if h.abs() < STEP_UNDERFLOW * span.abs() {
            return Err(Error::StepUnderflow { at: t, h });
        }
        // Land exactly on t_end rather than creeping up on it.
        if (t + 1.01 * h - t_end) * dir > 0.0 {
            h = t_end - t;
        }

        let mut k = [[0.0; N]; 7];
        k[0] = f0;
        for s in 1..6 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s - 1][j] * kj[i];
                }
                ys[i] += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y1 = y;
        for i in 0..N {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += A[5][j] * k[j][i];
            }
            y1[i] += h * acc;
        }
        k[6] = f(t + h, &y1);
        stats.n_rhs += 6;

        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            e *= h;
            let sc = tol.abs + tol.rel * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            stats.n_accepted += 1;
            let step = DenseStep { t0: t, t1: t + h, y0: y, y1, f0: k[0], f1: k[6] };
            let outcome = on_step(&step);
            if let StepOutcome::Stop(ts) = outcome {
                let ts = if dir > 0.0 {
                    ts.clamp(step.t0, step.t1)
                } else {
                    ts.clamp(step.t1, step.t0)
                };
                let ys = step.eval(ts);
                return Ok(IvpEnd { y: ys, stats });
            }
            t = step.t1;
            y = y1;
            f0 = k[6];

            let fac11 = err.powf(EXPO1);
            let fac = f64::min(
                FAC_SHRINK_MAX,
                f64::max(FAC_GROW_MAX, fac11 / facold.powf(BETA) / SAFE),
            );
            let mut hnew = h / fac;
            if rejected {
                // No growth immediately after a rejection.
                hnew = if dir > 0.0 { hnew.min(h) } else { hnew.max(h) };
            }
            if hnew.abs() > hmax {
                hnew = dir * hmax;
            }
            h = hnew;
            facold = err.max(1e-4);
            rejected = false;
        } else {
            stats.n_rejected += 1;
            // NaN error (a singular right-hand side inside the trial step)
            // falls through to the maximum shrink factor.
            let fac11 = err.powf(EXPO1);
            h /= f64::min(FAC_SHRINK_MAX, fac11 / SAFE);
            rejected = true;
        }
    }
}

/// Step-size guess from the local scale of `y` and its first two right-hand
/// sides.
fn initial_step<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    hmax: f64,
    tol: &Tol,
    stats: &mut Stats,
) -> f64 {
    let sc: Vec<f64> = (0..N).map(|i| tol.abs + tol.rel * y0[i].abs()).collect();
    let rms = |v: &[f64; N]| -> f64 {
        let s: f64 = (0..N).map(|i| (v[i] / sc[i]) * (v[i] / sc[i])).sum();
        (s / N as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(hmax);

    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += dir * h0 * f0[i];
    }
    let f1 = f(t0 + dir * h0, &y1);
    stats.n_rhs += 1;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms(&diff) / h0;

    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    dir * h1.min(100.0 * h0).min(hmax)
}

/// A `C^1` piecewise-cubic curve `y(x)` on strictly increasing nodes,
/// stored as values and slopes (Hermite data).
#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Curve {
    /// Build from nodes with known slopes.
    pub fn from_slopes(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() != ds.len() {
            return Err(Error::Domain("curve arrays must have equal length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Domain("a curve needs at least two nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("curve nodes must be strictly increasing".into()));
        }
        Ok(Curve { xs, ys, ds })
    }

    /// Build from nodes alone, taking slopes from the natural cubic spline.
    pub fn natural_spline(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Domain("curve arrays must have equal length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Domain("a curve needs at least two nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("curve nodes must be strictly increasing".into()));
        }
        let ds = numeric::natural_spline_slopes(&xs, &ys);
        Ok(Curve { xs, ys, ds })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction at least two nodes
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn segment(&self, x: f64) -> usize {
        // Index i with xs[i] <= x < xs[i+1], clamped to valid segments.
        let n = self.xs.len();
        let pos = self.xs.partition_point(|&v| v <= x);
        pos.clamp(1, n - 1) - 1
    }

    /// Evaluate, clamping `x` into the node range (constant extension).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.x_min(), self.x_max());
        let i = self.segment(x);
        numeric::hermite(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.ds[i],
            self.ds[i + 1],
            x,
        )
    }

    /// Slope of the interpolant, clamped like [`Curve::eval`].
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let x = x.clamp(self.x_min(), self.x_max());
        let i = self.segment(x);
        numeric::hermite_deriv(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.ds[i],
            self.ds[i + 1],
            x,
        )
    }

    /// New curve sampled from this one at the given nodes.
    pub fn resample(&self, xs: &[f64]) -> Result<Curve> {
        let ys = xs.iter().map(|&x| self.eval(x)).collect();
        let ds = xs.iter().map(|&x| self.eval_deriv(x)).collect();
        Curve::from_slopes(xs.to_vec(), ys, ds)
    }
}

/// Things that can happen along a time trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    /// Crossed the horizontal isocline `y' = 0`.
    CrossHorizontal,
    /// Crossed the vertical isocline `x' = 0`.
    CrossVertical,
    /// Crossed the slow-eigenslope isocline `alpha`.
    CrossAlpha,
    /// Crossed the invariant level `y = 1`.
    CrossOne,
    /// Entered the strip between `H` and `V`.
    EnterGamma0,
    /// Entered the strip between `H` and `alpha`.
    EnterGamma1,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EventKind::CrossHorizontal => "cross-horizontal",
            EventKind::CrossVertical => "cross-vertical",
            EventKind::CrossAlpha => "cross-alpha",
            EventKind::CrossOne => "cross-one",
            EventKind::EnterGamma0 => "enter-gamma0",
            EventKind::EnterGamma1 => "enter-gamma1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub point: Point,
}

/// A time-form trajectory with its located events.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub ts: Vec<f64>,
    pub points: Vec<Point>,
    pub events: Vec<Event>,
    pub stats: Stats,
    pub warnings: Vec<String>,
}

/// Integrate the time-form kinetics from `start` to `t_end > 0`, recording
/// isocline crossings and strip entries along the way.
///
/// Entry events also fire at `t = 0` when the start point already lies in
/// the strip. Crossing events are located by bisection on the dense output
/// to a width of [`EVENT_TIME_TOL`] (relative to the horizon).
pub fn integrate_time(p: &Parameters, start: Point, t_end: f64, tol: Tol) -> Result<Trajectory> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    let mut warnings = Vec::new();
    if p.eps() < STIFF_EPS_WARN {
        warnings.push(format!(
            "eps = {} makes the fast variable stiff; an explicit pair will take many steps",
            p.eps()
        ));
    }

    let crossings: [(EventKind, fn(&Parameters, Point) -> f64); 4] = [
        (EventKind::CrossHorizontal, |_, pt| pt.y - isoclines::horizontal(pt.x)),
        (EventKind::CrossVertical, |p, pt| pt.y - isoclines::vertical(p, pt.x)),
        (EventKind::CrossAlpha, |p, pt| pt.y - isoclines::alpha(p, pt.x)),
        (EventKind::CrossOne, |_, pt| pt.y - 1.0),
    ];
    let memberships: [(EventKind, fn(&Parameters, Point) -> bool); 2] = [
        (EventKind::EnterGamma0, in_gamma0),
        (EventKind::EnterGamma1, in_gamma1),
    ];

    let mut ts = vec![0.0];
    let mut points = vec![start];
    let mut events = Vec::new();

    let mut signs = [0i8; 4];
    for (i, (_, g)) in crossings.iter().enumerate() {
        signs[i] = sign_of(g(p, start));
    }
    let mut inside = [false; 2];
    for (i, (kind, m)) in memberships.iter().enumerate() {
        inside[i] = m(p, start);
        if inside[i] {
            events.push(Event { kind: *kind, t: 0.0, point: start });
        }
    }

    let ttol = EVENT_TIME_TOL * (1.0 + t_end);
    let rhs = |_t: f64, y: &[f64; 2]| p.rhs_time(Point::new(y[0], y[1]));
    let end = solve_ivp(rhs, 0.0, t_end, [start.x, start.y], &tol, None, |step| {
        let p1 = Point::new(step.y1[0], step.y1[1]);
        ts.push(step.t1);
        points.push(p1);

        for (i, (kind, g)) in crossings.iter().enumerate() {
            let s_new = sign_of(g(p, p1));
            if s_new != 0 && signs[i] != 0 && s_new != signs[i] {
                let t_star = numeric::bisect_root(
                    |t| {
                        let y = step.eval(t);
                        g(p, Point::new(y[0], y[1]))
                    },
                    step.t0,
                    step.t1,
                    ttol,
                );
                let y = step.eval(t_star);
                events.push(Event { kind: *kind, t: t_star, point: Point::new(y[0], y[1]) });
            }
            if s_new != 0 {
                signs[i] = s_new;
            }
        }
        for (i, (kind, m)) in memberships.iter().enumerate() {
            let now = m(p, p1);
            if now && !inside[i] {
                // Bisect the boolean transition; membership flips once per
                // step at the resolution we integrate at.
                let (mut lo, mut hi) = (step.t0, step.t1);
                while hi - lo > ttol {
                    let mid = 0.5 * (lo + hi);
                    let y = step.eval(mid);
                    if m(p, Point::new(y[0], y[1])) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let y = step.eval(hi);
                events.push(Event { kind: *kind, t: hi, point: Point::new(y[0], y[1]) });
            }
            inside[i] = now;
        }
        StepOutcome::Continue
    })?;

    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(Trajectory { ts, points, events, stats: end.stats, warnings })
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// A phase-form integration result. The curve always runs left to right
/// regardless of the direction of integration.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRun {
    pub curve: Curve,
    /// Where the run stopped against the vertical isocline, if it did; the
    /// curve then covers only part of the requested range.
    pub stopped_at_vertical: Option<Point>,
    /// Where a caller-supplied stop condition fired, if any.
    pub stopped_early: Option<Point>,
    pub stats: Stats,
}

impl PhaseRun {
    pub fn complete(&self) -> bool {
        self.stopped_at_vertical.is_none() && self.stopped_early.is_none()
    }
}

/// Integrate the phase equation `dy/dx = f(x, y)` from `start` to
/// `x = x_end`, in either direction.
///
/// Trajectories that run into the vertical isocline stop there and come
/// back flagged partial rather than failing: the guard triggers when
/// `|x'| < `[`V_PROXIMITY_GUARD`]` * (1 + x)`. Starting on the isocline is
/// an error, since the slope has no value at all there.
pub fn integrate_phase(p: &Parameters, start: Point, x_end: f64, tol: Tol) -> Result<PhaseRun> {
    phase_run(p, start, x_end, &tol, None, |_| false)
}

/// Phase-form driver with a step cap and a caller stop condition, shared by
/// the public wrapper and the slow-manifold construction.
pub(crate) fn phase_run(
    p: &Parameters,
    start: Point,
    x_end: f64,
    tol: &Tol,
    max_step: Option<f64>,
    mut stop_when: impl FnMut(Point) -> bool,
) -> Result<PhaseRun> {
    let guard = |pt: Point| V_PROXIMITY_GUARD * (1.0 + pt.x.abs()) - p.phase_denominator(pt).abs();
    if guard(start) >= 0.0 {
        return Err(Error::SingularSlope { x: start.x, y: start.y });
    }

    let p_clone = *p;
    let rhs = move |x: f64, y: &[f64; 1]| {
        let pt = Point::new(x, y[0]);
        let d = p_clone.phase_denominator(pt);
        [(pt.x - pt.y - pt.x * pt.y) / (p_clone.eps() * d)]
    };

    let mut xs = vec![start.x];
    let mut ys = vec![start.y];
    let mut ds = vec![p.slope_field(start)?];
    let mut v_stop = None;
    let mut early_stop = None;

    let xtol = EVENT_TIME_TOL * (1.0 + (x_end - start.x).abs());
    let result = solve_ivp(rhs, start.x, x_end, [start.y], tol, max_step, |step| {
        let at = |x: f64| {
            let y = step.eval(x);
            Point::new(x, y[0])
        };
        let p1 = at(step.t1);
        if guard(p1) >= 0.0 {
            // Bisect the guard threshold; the start of the step is clear.
            let x_star = numeric::bisect_root(|x| guard(at(x)), step.t0, step.t1, xtol);
            v_stop = Some(at(x_star));
            return StepOutcome::Stop(x_star);
        }
        if stop_when(p1) {
            early_stop = Some(p1);
            return StepOutcome::Stop(step.t1);
        }
        xs.push(step.t1);
        ys.push(step.y1[0]);
        ds.push(step.f1[0]);
        StepOutcome::Continue
    });

    let stats = match result {
        Ok(end) => end.stats,
        // A collapsing step right next to the isocline is the guard firing
        // in slow motion; report it as a vertical stop instead of an error.
        Err(Error::StepUnderflow { at, h }) => {
            let last = Point::new(*xs.last().unwrap(), *ys.last().unwrap());
            if guard(last) > -1e3 * V_PROXIMITY_GUARD * (1.0 + last.x.abs()) {
                v_stop = Some(last);
                Stats::default()
            } else {
                return Err(Error::StepUnderflow { at, h });
            }
        }
        Err(e) => return Err(e),
    };

    if xs.len() < 2 {
        return Err(Error::Construction(format!(
            "phase run from ({}, {}) stopped before its second node",
            start.x, start.y
        )));
    }
    if xs[0] > xs[xs.len() - 1] {
        xs.reverse();
        ys.reverse();
        ds.reverse();
    }
    Ok(PhaseRun {
        curve: Curve::from_slopes(xs, ys, ds)?,
        stopped_at_vertical: v_stop,
        stopped_early: early_stop,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoclines::horizontal;
    use crate::kinetics::RateConstants;
    use crate::series::origin_coefficients;

    fn p(eps: f64, eta: f64) -> Parameters {
        Parameters::new(eps, eta).unwrap()
    }

    #[test]
    fn tolerances_are_validated() {
        assert!(Tol::new(1e-14, 1e-12).is_err());
        assert!(Tol::new(1e-8, 0.0).is_err());
        assert!(Tol::new(1e-8, 1e-10).is_ok());
    }

    #[test]
    fn stepper_hits_reference_decay() {
        // y' = -y, y(5) = e^-5, a pure accuracy check of pair + controller.
        let tol = Tol::default();
        let end = solve_ivp(
            |_t, y: &[f64; 1]| [-y[0]],
            0.0,
            5.0,
            [1.0],
            &tol,
            None,
            |_| StepOutcome::Continue,
        )
        .unwrap();
        assert!((end.y[0] - (-5.0f64).exp()).abs() < 1e-10);
        assert!(end.stats.n_accepted > 10 && end.stats.n_accepted < 2000);
    }

    #[test]
    fn stepper_tracks_oscillation_both_directions() {
        // y'' = -y integrated forward then backward returns to the start.
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let tol = Tol { rel: 1e-11, abs: 1e-13 };
        let fwd = solve_ivp(rhs, 0.0, 10.0, [1.0, 0.0], &tol, None, |_| StepOutcome::Continue)
            .unwrap();
        assert!((fwd.y[0] - (10.0f64).cos()).abs() < 1e-9);
        assert!((fwd.y[1] + (10.0f64).sin()).abs() < 1e-9);
        let back = solve_ivp(rhs, 10.0, 0.0, fwd.y, &tol, None, |_| StepOutcome::Continue)
            .unwrap();
        assert!((back.y[0] - 1.0).abs() < 1e-9);
        assert!(back.y[1].abs() < 1e-9);
    }

    #[test]
    fn mass_action_integration_conserves_enzyme() {
        let rc = RateConstants::new(2.0, 3.0, 1.0, 10.0).unwrap();
        let rhs = |_t: f64, y: &[f64; 4]| rc.mass_action_rhs(y);
        let end = solve_ivp(
            rhs,
            0.0,
            2.0,
            [5.0, 10.0, 0.0, 0.0],
            &Tol::default(),
            None,
            |_| StepOutcome::Continue,
        )
        .unwrap();
        // e + c is a linear invariant; the pair preserves it to rounding.
        assert!((end.y[1] + end.y[2] - 10.0).abs() < 1e-9);
        // s + c + p is conserved too.
        assert!((end.y[0] + end.y[2] + end.y[3] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn trajectory_records_strip_entry() {
        let pa = p(5.0, 0.8);
        let traj = integrate_time(&pa, Point::new(1.0, 0.3), 5.0, Tol::default()).unwrap();

        let of_kind = |k: EventKind| -> Vec<&Event> {
            traj.events.iter().filter(|e| e.kind == k).collect()
        };
        let cross_h = of_kind(EventKind::CrossHorizontal);
        let enter_g0 = of_kind(EventKind::EnterGamma0);
        let enter_g1 = of_kind(EventKind::EnterGamma1);
        assert_eq!(cross_h.len(), 1, "events: {:?}", traj.events);
        assert_eq!(enter_g0.len(), 1);
        assert_eq!(enter_g1.len(), 1);
        // All three happen at the same crossing of H, located on it.
        let e = cross_h[0];
        assert!((e.point.y - horizontal(e.point.x)).abs() < 1e-9);
        assert!((e.t - enter_g0[0].t).abs() < 1e-6);
        assert!((e.t - enter_g1[0].t).abs() < 1e-6);
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn trajectory_entry_events_fire_at_time_zero_when_inside() {
        let pa = p(5.0, 0.8);
        // (1, 0.6) sits between H(1) = 0.5 and alpha(1) = 0.809.
        let traj = integrate_time(&pa, Point::new(1.0, 0.6), 0.5, Tol::default()).unwrap();
        assert!(traj
            .events
            .iter()
            .any(|e| e.kind == EventKind::EnterGamma0 && e.t == 0.0));
        assert!(traj
            .events
            .iter()
            .any(|e| e.kind == EventKind::EnterGamma1 && e.t == 0.0));
    }

    #[test]
    fn stiff_parameters_warn() {
        let pa = p(5e-4, 0.5);
        let traj = integrate_time(&pa, Point::new(0.5, 0.2), 0.01, Tol::default()).unwrap();
        assert!(!traj.warnings.is_empty());
    }

    #[test]
    fn phase_descent_stays_in_the_trapping_strip() {
        let pa = p(5.0, 0.8);
        let start = Point::new(1.0, horizontal(1.0));
        let run = integrate_phase(&pa, start, 0.01, Tol::default()).unwrap();
        assert!(run.complete());
        let c = &run.curve;
        for i in 0..c.len() {
            let (x, y) = (c.xs()[i], c.ys()[i]);
            assert!(y >= horizontal(x) - 1e-12, "below H at x = {x}");
            assert!(y <= isoclines::alpha(&pa, x) + 1e-9, "above alpha at x = {x}");
        }
        // Decreasing-x integration contracts onto the slow manifold; by
        // x = 0.01 the value agrees with the origin series to truncation.
        let s = origin_coefficients(&pa, 5);
        assert!((c.eval(0.01) - s.eval(0.01)).abs() < 1e-6);
    }

    #[test]
    fn phase_run_stops_on_the_vertical_isocline() {
        let pa = p(5.0, 0.8);
        let run = integrate_phase(&pa, Point::new(1.0, 0.9), 5.0, Tol::default()).unwrap();
        let stop = run.stopped_at_vertical.expect("should hit V");
        assert!(!run.complete());
        assert!(stop.x < 5.0);
        let v = isoclines::vertical(&pa, stop.x);
        assert!((stop.y - v).abs() < 1e-6, "stop at {stop}, V = {v}");
        assert!(run.curve.x_max() <= stop.x + 1e-9);
    }

    #[test]
    fn phase_run_rejects_starting_on_the_isocline() {
        let pa = p(5.0, 0.8);
        let start = Point::new(1.0, isoclines::vertical(&pa, 1.0));
        assert!(matches!(
            integrate_phase(&pa, start, 2.0, Tol::default()),
            Err(Error::SingularSlope { .. })
        ));
    }

    #[test]
    fn curve_interpolation_and_clamping() {
        let xs: Vec<f64> = (0..=80).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
        let c = Curve::natural_spline(xs, ys).unwrap();
        // Interior accuracy; the free-end condition costs accuracy in the
        // one or two intervals next to each boundary, where sin does not
        // have the zero second derivative the spline assumes.
        for i in 0..=40 {
            let x = 0.3 + i as f64 * 0.08;
            assert!((c.eval(x) - x.sin()).abs() < 2e-5, "value at {x}");
            assert!((c.eval_deriv(x) - x.cos()).abs() < 2e-3, "slope at {x}");
        }
        assert!((c.eval(3.975) - 3.975f64.sin()).abs() < 2e-3);
        // Constant extension outside the node range.
        assert_eq!(c.eval(-1.0), c.eval(0.0));
        assert_eq!(c.eval(9.0), c.eval(4.0));

        let r = c.resample(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((r.eval(1.0) - 1.0f64.sin()).abs() < 2e-5);
        assert!(Curve::from_slopes(vec![0.0, 0.0], vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
    }
}
