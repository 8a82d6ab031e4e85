//! Rate constants, nondimensionalization, the planar vector field, and the
//! spectrum of its linearization at the origin.
//!
//! The dimensional mechanism `S + E <=> C -> P + E` with rates
//! `k1, k_minus1, k2` and total enzyme `e0` reduces to the planar system
//!
//! ```text
//! x' = -x + (1 - eta) y + x y
//! y' = eps^-1 (x - y - x y)
//! ```
//!
//! under `x = k1 s / (k_minus1 + k2)`, `y = c / e0`, `t = k1 e0 tau`, with
//! `eps = k1 e0 / (k_minus1 + k2)` and `eta = k2 / (k_minus1 + k2)`.

use serde::Serialize;

use crate::integrate::{solve_ivp, Stats, StepOutcome, Tol};
use crate::tolerances::{NEAR_RESONANCE_WARN, RESONANCE_KAPPA_TOL};
use crate::{Error, Point, Result};

/// `|x'| < SLOPE_SINGULAR_TOL * (1 + x)` counts as "on the vertical
/// isocline" when evaluating the slope field. Deliberately much tighter than
/// the integration guard, so that integration stops before evaluation fails.
const SLOPE_SINGULAR_TOL: f64 = 1e-14;

/// Dimensional rate constants of the irreversible mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateConstants {
    pub k1: f64,
    pub k_minus1: f64,
    pub k2: f64,
    pub e0: f64,
    /// Initial substrate concentration, if the problem specifies one.
    pub s0: Option<f64>,
}

impl RateConstants {
    pub fn new(k1: f64, k_minus1: f64, k2: f64, e0: f64) -> Result<Self> {
        if !(k1 > 0.0) || !k1.is_finite() {
            return Err(Error::Inadmissible(format!("k1 must be positive, got {k1}")));
        }
        if !(k2 > 0.0) || !k2.is_finite() {
            return Err(Error::Inadmissible(format!("k2 must be positive, got {k2}")));
        }
        if !(k_minus1 >= 0.0) || !k_minus1.is_finite() {
            return Err(Error::Inadmissible(format!(
                "k_minus1 must be nonnegative, got {k_minus1}"
            )));
        }
        if !(e0 > 0.0) || !e0.is_finite() {
            return Err(Error::Inadmissible(format!("e0 must be positive, got {e0}")));
        }
        Ok(RateConstants { k1, k_minus1, k2, e0, s0: None })
    }

    pub fn with_s0(mut self, s0: f64) -> Result<Self> {
        if !(s0 >= 0.0) || !s0.is_finite() {
            return Err(Error::Inadmissible(format!("s0 must be nonnegative, got {s0}")));
        }
        self.s0 = Some(s0);
        Ok(self)
    }

    /// Michaelis constant `(k_minus1 + k2) / k1`.
    pub fn km(&self) -> f64 {
        (self.k_minus1 + self.k2) / self.k1
    }

    /// Dissociation constant `k_minus1 / k1`.
    pub fn ks(&self) -> f64 {
        self.k_minus1 / self.k1
    }

    /// Reduce to `(eps, eta)` plus the scale factors of the reduction.
    ///
    /// Fails when `k_minus1 = 0`: that limit gives `eta = 1`, where the
    /// isocline geometry degenerates (`V` and `y = 1` merge at infinity).
    pub fn nondimensionalize(&self) -> Result<(Parameters, Scales)> {
        if self.k_minus1 == 0.0 {
            return Err(Error::Inadmissible(
                "k_minus1 = 0 gives eta = 1, outside the admissible open interval".into(),
            ));
        }
        let denom = self.k_minus1 + self.k2;
        let p = Parameters::new(self.k1 * self.e0 / denom, self.k2 / denom)?;
        let scales = Scales {
            x_per_s: self.k1 / denom,
            y_per_c: 1.0 / self.e0,
            t_per_tau: self.k1 * self.e0,
        };
        Ok((p, scales))
    }

    /// Right-hand side of the full dimensional mass-action system in the
    /// state order `(s, e, c, p)`.
    pub fn mass_action_rhs(&self, state: &[f64; 4]) -> [f64; 4] {
        let [s, e, c, _p] = *state;
        let bind = self.k1 * s * e;
        let unbind = self.k_minus1 * c;
        let convert = self.k2 * c;
        // The enzyme rate is the exact negation of the complex rate, so
        // e + c is conserved bitwise, not just to rounding.
        let c_rate = bind - unbind - convert;
        [unbind - bind, -c_rate, c_rate, convert]
    }
}

/// Scale factors mapping dimensional concentrations and time onto the
/// nondimensional phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scales {
    /// `x = x_per_s * s`
    pub x_per_s: f64,
    /// `y = y_per_c * c`
    pub y_per_c: f64,
    /// `t = t_per_tau * tau`
    pub t_per_tau: f64,
}

impl Scales {
    pub fn map_concentrations(&self, s: f64, c: f64) -> Point {
        Point::new(self.x_per_s * s, self.y_per_c * c)
    }

    pub fn map_time(&self, tau: f64) -> f64 {
        self.t_per_tau * tau
    }
}

/// A dimensional mass-action integration sampled at caller-chosen times.
#[derive(Debug, Clone, Serialize)]
pub struct MassActionRun {
    /// The requested sample times.
    pub ts: Vec<f64>,
    /// States `(s, e, c, p)` at those times.
    pub states: Vec<[f64; 4]>,
    pub stats: Stats,
}

/// Integrate the four-species system from `initial = (s, e, c, p)` at
/// `tau = 0` and report the states at the requested times.
///
/// Sample times must be finite, nonnegative, and strictly increasing;
/// interior samples come from the integrator's dense output. The image of
/// `(s, c)` under [`Scales::map_concentrations`] follows the planar system
/// to integrator accuracy, which is the reduction this module implements.
pub fn simulate_mass_action(
    rc: &RateConstants,
    initial: [f64; 4],
    ts: &[f64],
    tol: Tol,
) -> Result<MassActionRun> {
    if ts.is_empty() {
        return Err(Error::Domain("need at least one sample time".into()));
    }
    for (i, &t) in ts.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("sample times must be nonnegative, got {t}")));
        }
        if i > 0 && t <= ts[i - 1] {
            return Err(Error::Domain(format!(
                "sample times must be strictly increasing, got {} after {}",
                t,
                ts[i - 1]
            )));
        }
    }
    if initial.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain(format!(
            "concentrations must be nonnegative, got {initial:?}"
        )));
    }
    let t_end = *ts.last().expect("nonempty");
    let mut states = Vec::with_capacity(ts.len());
    let mut next = 0usize;
    if ts[0] == 0.0 {
        states.push(initial);
        next = 1;
    }
    if t_end == 0.0 {
        return Ok(MassActionRun { ts: ts.to_vec(), states, stats: Stats::default() });
    }
    let end = solve_ivp(
        |_t, y| rc.mass_action_rhs(y),
        0.0,
        t_end,
        initial,
        &tol,
        None,
        |step| {
            while next < ts.len() && ts[next] <= step.t1 {
                states.push(step.eval(ts[next]));
                next += 1;
            }
            StepOutcome::Continue
        },
    )?;
    // The driver lands on t_end only up to rounding; backfill a final sample
    // the step loop may have missed by an ulp.
    while next < ts.len() {
        debug_assert!(ts[next] >= t_end * (1.0 - 1e-12));
        states.push(end.y);
        next += 1;
    }
    Ok(MassActionRun { ts: ts.to_vec(), states, stats: end.stats })
}

/// Validated nondimensional parameters `eps > 0`, `0 < eta < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Parameters {
    eps: f64,
    eta: f64,
}

impl Parameters {
    pub fn new(eps: f64, eta: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Inadmissible(format!("eps must be positive, got {eps}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Inadmissible(format!("eta must lie in (0, 1), got {eta}")));
        }
        Ok(Parameters { eps, eta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Time-form vector field `(x', y')`.
    pub fn rhs_time(&self, pt: Point) -> [f64; 2] {
        let Point { x, y } = pt;
        let xdot = -x + (1.0 - self.eta) * y + x * y;
        let ydot = (x - y - x * y) / self.eps;
        [xdot, ydot]
    }

    /// The `x'` expression `-x + (1 - eta) y + x y`; its zero set is the
    /// vertical isocline, and every phase-form formula divides by it.
    pub fn phase_denominator(&self, pt: Point) -> f64 {
        -pt.x + (1.0 - self.eta + pt.x) * pt.y
    }

    /// Phase-form slope `f(x, y) = y' / x'`.
    ///
    /// Errors on (a numerical neighbourhood of) the vertical isocline, where
    /// the slope is unbounded.
    pub fn slope_field(&self, pt: Point) -> Result<f64> {
        let d = self.phase_denominator(pt);
        if d.abs() < SLOPE_SINGULAR_TOL * (1.0 + pt.x.abs()) {
            return Err(Error::SingularSlope { x: pt.x, y: pt.y });
        }
        Ok((pt.x - pt.y - pt.x * pt.y) / (self.eps * d))
    }

    /// Jacobian of the time-form field at the origin.
    pub fn linearization(&self) -> [[f64; 2]; 2] {
        let inv_eps = 1.0 / self.eps;
        [[-1.0, 1.0 - self.eta], [inv_eps, -inv_eps]]
    }

    /// Eigenstructure of the linearization.
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(self)
    }

    /// Solution of the linearized system through `x0`.
    pub fn linear_solution(&self, x0: Point) -> LinearSolution {
        let sp = self.spectrum();
        // c_pm = <vhat_pm, x0> / <vhat_pm, v_pm>; the left eigenvectors are
        // orthogonal to the opposite right eigenvectors, which makes this the
        // coefficient extraction for x0 = c- v- + c+ v+.
        let proj = |vhat: [f64; 2], v: [f64; 2]| {
            (vhat[0] * x0.x + vhat[1] * x0.y) / (vhat[0] * v[0] + vhat[1] * v[1])
        };
        LinearSolution {
            c_plus: proj(sp.vhat_plus, sp.v_plus),
            c_minus: proj(sp.vhat_minus, sp.v_minus),
            spectrum: sp,
        }
    }
}

/// Eigenstructure of the linearization at the origin.
///
/// Both eigenvalues are real and negative with `lambda_minus < -1 <
/// lambda_plus < 0`; the slow direction `v_plus` has slope `sigma =
/// (lambda_plus + 1) / (1 - eta)`, and `kappa = lambda_minus / lambda_plus >
/// 1` controls the origin asymptotics of the slow manifold.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Eigenvalue ratio `lambda_minus / lambda_plus`.
    pub kappa: f64,
    /// Slope of the slow eigendirection.
    pub sigma: f64,
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
    /// Left eigenvectors, `vhat_pm = (eps^-1, lambda_pm + 1)`.
    pub vhat_plus: [f64; 2],
    pub vhat_minus: [f64; 2],
    /// `kappa` is an integer `>= 2` to within [`RESONANCE_KAPPA_TOL`].
    pub resonant: bool,
    /// Integer nearest to `kappa`.
    pub nearest_integer: i64,
    /// `|kappa - nearest_integer|`.
    pub resonance_distance: f64,
    /// Set when `kappa` is within [`NEAR_RESONANCE_WARN`] of an integer:
    /// origin-series denominators are poorly conditioned.
    pub near_resonance: bool,
}

impl Spectrum {
    fn of(p: &Parameters) -> Spectrum {
        let (eps, eta) = (p.eps, p.eta);
        let disc = (eps + 1.0) * (eps + 1.0) - 4.0 * eps * eta;
        let sq = disc.sqrt();
        let lambda_minus = (-(eps + 1.0) - sq) / (2.0 * eps);
        // The direct formula for lambda_plus cancels when (eps+1)^2 >> 4 eps
        // eta; multiplying through by the conjugate is exact and stable.
        let lambda_plus = -2.0 * eta / ((eps + 1.0) + sq);
        let kappa = lambda_minus / lambda_plus;
        let sigma = (lambda_plus + 1.0) / (1.0 - eta);

        let nearest = kappa.round();
        let distance = (kappa - nearest).abs();
        let resonant = nearest >= 2.0 && distance < RESONANCE_KAPPA_TOL;
        let near_resonance = nearest >= 2.0 && distance < NEAR_RESONANCE_WARN;

        let inv_eps = 1.0 / eps;
        Spectrum {
            lambda_plus,
            lambda_minus,
            kappa,
            sigma,
            v_plus: [1.0 - eta, lambda_plus + 1.0],
            v_minus: [1.0 - eta, lambda_minus + 1.0],
            vhat_plus: [inv_eps, lambda_plus + 1.0],
            vhat_minus: [inv_eps, lambda_minus + 1.0],
            resonant,
            nearest_integer: nearest as i64,
            resonance_distance: distance,
            near_resonance,
        }
    }
}

/// Invert `kappa(eps, eta)` for `eta` at fixed `eps`.
///
/// `eta = kappa (eps + 1)^2 / (eps (kappa + 1)^2)`; the result must land in
/// `(0, 1)` to be admissible. `kappa = 1` always maps to the boundary
/// `eta = (eps + 1)^2 / (4 eps) >= 1` and is rejected.
pub fn eta_from_kappa(eps: f64, kappa: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Inadmissible(format!("eps must be positive, got {eps}")));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::Inadmissible(format!("kappa must be >= 1, got {kappa}")));
    }
    let eta = kappa * (eps + 1.0) * (eps + 1.0) / (eps * (kappa + 1.0) * (kappa + 1.0));
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Inadmissible(format!(
            "kappa = {kappa} at eps = {eps} requires eta = {eta}, outside (0, 1)"
        )));
    }
    Ok(eta)
}

/// Closed-form solution `c- e^(lambda- t) v- + c+ e^(lambda+ t) v+` of the
/// linearized system.
#[derive(Debug, Clone, Serialize)]
pub struct LinearSolution {
    pub c_plus: f64,
    pub c_minus: f64,
    pub spectrum: Spectrum,
}

impl LinearSolution {
    pub fn eval(&self, t: f64) -> Point {
        let sp = &self.spectrum;
        let ep = self.c_plus * (sp.lambda_plus * t).exp();
        let em = self.c_minus * (sp.lambda_minus * t).exp();
        Point::new(
            em * sp.v_minus[0] + ep * sp.v_plus[0],
            em * sp.v_minus[1] + ep * sp.v_plus[1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(eps: f64, eta: f64) -> Parameters {
        Parameters::new(eps, eta).unwrap()
    }

    #[test]
    fn nondimensionalization_examples() {
        let (pa, sc) = RateConstants::new(1.0, 1.0, 1.0, 2.0)
            .unwrap()
            .nondimensionalize()
            .unwrap();
        assert_eq!(pa.eps(), 1.0);
        assert_eq!(pa.eta(), 0.5);
        assert_eq!(sc.x_per_s, 0.5);
        assert_eq!(sc.t_per_tau, 2.0);

        let (pb, _) = RateConstants::new(2.0, 3.0, 1.0, 10.0)
            .unwrap()
            .nondimensionalize()
            .unwrap();
        assert_eq!(pb.eps(), 5.0);
        assert_eq!(pb.eta(), 0.25);
    }

    #[test]
    fn irreversible_binding_is_rejected() {
        let rc = RateConstants::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(rc.nondimensionalize(), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn michaelis_and_dissociation_constants() {
        let rc = RateConstants::new(2.0, 3.0, 1.0, 10.0).unwrap();
        assert_eq!(rc.km(), 2.0);
        assert_eq!(rc.ks(), 1.5);
        // Km = Ks + k2/k1 always.
        assert_eq!(rc.km(), rc.ks() + rc.k2 / rc.k1);
    }

    #[test]
    fn rhs_spot_values() {
        let pa = p(5.0, 0.8);
        assert_eq!(pa.rhs_time(Point::new(0.0, 0.0)), [0.0, 0.0]);
        let [xd, yd] = pa.rhs_time(Point::new(1.0, 0.5));
        assert!((xd + 0.4).abs() < 1e-15, "xdot = {xd}");
        assert_eq!(yd, 0.0); // (1, 0.5) lies on the horizontal isocline
    }

    #[test]
    fn slope_field_distinguished_values() {
        let pa = p(5.0, 0.8);
        // On H the numerator of f vanishes.
        assert_eq!(pa.slope_field(Point::new(1.0, 0.5)).unwrap(), 0.0);
        // On alpha the slope equals sigma: alpha(1) = sigma / (1 + sigma).
        let sigma = pa.spectrum().sigma;
        let f = pa.slope_field(Point::new(1.0, sigma / (1.0 + sigma))).unwrap();
        assert!((f - sigma).abs() < 1e-12, "f = {f}, sigma = {sigma}");
        // On V the slope is singular. V(1) = 1 / (1 - eta + 1).
        let v1 = 1.0 / (1.2);
        assert!(matches!(
            pa.slope_field(Point::new(1.0, v1)),
            Err(Error::SingularSlope { .. })
        ));
    }

    #[test]
    fn linearization_matrix() {
        assert_eq!(p(1.0, 0.5).linearization(), [[-1.0, 0.5], [1.0, -1.0]]);
        // 1 - 0.8 reproduces the same rounding as the implementation; 0.2
        // itself is a different double.
        assert_eq!(p(5.0, 0.8).linearization(), [[-1.0, 1.0 - 0.8], [0.2, -0.2]]);
    }

    #[test]
    fn spectrum_frozen_values() {
        // Reference values from 40-digit evaluation of the closed forms.
        let sp = p(5.0, 0.8).spectrum();
        assert!((sp.lambda_plus - -0.15278640450004206).abs() < 1e-15);
        assert!((sp.lambda_minus - -1.0472135954999579).abs() < 1e-15);
        assert!((sp.kappa - 6.8541019662496845).abs() < 1e-12);
        assert!((sp.sigma - 4.2360679774997897).abs() < 1e-13);

        let sp = p(0.6, 0.9).spectrum();
        assert!((sp.lambda_plus - -0.80628705663860344).abs() < 1e-15);
        assert!((sp.lambda_minus - -1.8603796100280632).abs() < 1e-15);
        assert!((sp.kappa - 2.3073415289387791).abs() < 1e-12);
        assert!((sp.sigma - 1.9371294336139656).abs() < 1e-13);
    }

    #[test]
    fn spectrum_identities() {
        for &(eps, eta) in &[(5.0, 0.8), (0.6, 0.9), (1.0, 0.95), (0.1, 0.5), (10.0, 0.05)] {
            let pa = p(eps, eta);
            let sp = pa.spectrum();
            let a = pa.linearization();
            for (lam, v) in [(sp.lambda_plus, sp.v_plus), (sp.lambda_minus, sp.v_minus)] {
                // Characteristic polynomial: eps l^2 + (eps+1) l + eta = 0.
                let chi = eps * lam * lam + (eps + 1.0) * lam + eta;
                assert!(chi.abs() < 1e-12, "chi({lam}) = {chi} at ({eps}, {eta})");
                // Right eigenvector residual.
                for i in 0..2 {
                    let r = a[i][0] * v[0] + a[i][1] * v[1] - lam * v[i];
                    assert!(r.abs() < 1e-12, "Av - lv = {r}");
                }
            }
            // Left/right biorthogonality across branches.
            let dot = sp.vhat_plus[0] * sp.v_minus[0] + sp.vhat_plus[1] * sp.v_minus[1];
            assert!(dot.abs() < 1e-15, "vhat+ . v- = {dot}");
            // Ordering and sigma bounds.
            assert!(sp.lambda_minus < -1.0 && -1.0 < sp.lambda_plus && sp.lambda_plus < 0.0);
            assert!(1.0 < sp.sigma && sp.sigma < 1.0 / (1.0 - eta));
            assert!(sp.kappa > 1.0);
        }
    }

    #[test]
    fn resonance_detection() {
        // eta_from_kappa(1, 3) = 0.75 and the discriminant is exactly 1, so
        // kappa = 3 in exact arithmetic.
        let eta = eta_from_kappa(1.0, 3.0).unwrap();
        assert_eq!(eta, 0.75);
        let sp = p(1.0, eta).spectrum();
        assert!(sp.resonant);
        assert_eq!(sp.nearest_integer, 3);
        assert!(sp.resonance_distance < 1e-12);

        let sp = p(5.0, 0.8).spectrum();
        assert!(!sp.resonant && !sp.near_resonance);
    }

    #[test]
    fn eta_kappa_round_trip() {
        for &(eps, eta) in &[(5.0, 0.8), (0.6, 0.9), (1.0, 0.95), (0.01, 0.05), (10.0, 0.95)] {
            let kappa = p(eps, eta).spectrum().kappa;
            let back = eta_from_kappa(eps, kappa).unwrap();
            assert!((back - eta).abs() < 1e-13, "round trip ({eps}, {eta}) -> {back}");
        }
        // Rounded published ratio still lands within 1e-4 of eta.
        assert!((eta_from_kappa(0.6, 2.3073).unwrap() - 0.9).abs() < 1e-4);
        // kappa = 1 maps to eta >= 1.
        assert!(matches!(eta_from_kappa(1.0, 1.0), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn linear_solution_eigenline_and_origin() {
        let pa = p(5.0, 0.8);
        let sp = pa.spectrum();
        let sol = pa.linear_solution(Point::new(sp.v_plus[0], sp.v_plus[1]));
        assert!((sol.c_plus - 1.0).abs() < 1e-14);
        assert!(sol.c_minus.abs() < 1e-14);
        let at1 = sol.eval(1.0);
        let decay = sp.lambda_plus.exp();
        assert!((at1.x - decay * sp.v_plus[0]).abs() < 1e-14);
        assert!((at1.y - decay * sp.v_plus[1]).abs() < 1e-14);

        let sol = pa.linear_solution(Point::new(0.3, 0.7));
        let at0 = sol.eval(0.0);
        assert!((at0.x - 0.3).abs() < 1e-14 && (at0.y - 0.7).abs() < 1e-14);
    }

    #[test]
    fn mass_action_conserves_enzyme() {
        let rc = RateConstants::new(2.0, 3.0, 1.0, 10.0).unwrap();
        let rhs = rc.mass_action_rhs(&[5.0, 10.0, 0.0, 0.0]);
        assert_eq!(rhs[1] + rhs[2], 0.0);
        let rhs = rc.mass_action_rhs(&[1.3, 7.2, 2.8, 0.9]);
        assert_eq!(rhs[1] + rhs[2], 0.0);
    }

    #[test]
    fn simulation_samples_requested_times() {
        let rc = RateConstants::new(2.0, 3.0, 1.0, 10.0).unwrap();
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let run = simulate_mass_action(&rc, [5.0, 10.0, 0.0, 0.0], &ts, Tol::default()).unwrap();
        assert_eq!(run.states.len(), ts.len());
        assert_eq!(run.states[0], [5.0, 10.0, 0.0, 0.0]);
        for w in run.states.windows(2) {
            // Substrate only drops and product only accumulates.
            assert!(w[1][0] <= w[0][0]);
            assert!(w[1][3] >= w[0][3]);
        }
        for st in &run.states {
            assert!((st[1] + st[2] - 10.0).abs() < 1e-12);
            // s + c + p is the other conserved pool.
            assert!((st[0] + st[2] + st[3] - 5.0).abs() < 1e-9);
        }

        // Sample times must increase.
        assert!(simulate_mass_action(&rc, [5.0, 10.0, 0.0, 0.0], &[0.3, 0.3], Tol::default())
            .is_err());
    }
}
