//! Power-series expansions of the slow manifold at its two ends, and
//! power-law fitting of remainders.
//!
//! Near the origin the manifold is `y = sigma_1 x + sigma_2 x^2 + ...`
//! where the coefficients satisfy a linear recursion whose step-`n`
//! denominator is proportional to `kappa - n`. When `kappa` is an integer
//! the recursion breaks at that index: only the coefficients below it are
//! defined, and the manifold picks up a genuine `x^kappa` term that no
//! power series sees.
//!
//! Near infinity the manifold expands in inverse powers,
//! `y = 1 - 1/x + 1/x^2 + (eps eta - 1)/x^3 + ...`, with polynomial
//! coefficients in `(eps, eta)` and no resonance obstruction.

use serde::Serialize;

use crate::kinetics::Parameters;
use crate::tolerances::{MIN_FIT_SAMPLES, NEAR_RESONANCE_WARN, STRAIGHT_WINDOW_RMS};
use crate::{numeric, Error, Result};

/// Tolerance for declaring the recursion denominator vanished, relative to
/// the size of the terms that form it.
const DENOMINATOR_TOL: f64 = 1e-10;

/// Truncated origin expansion of the slow manifold.
#[derive(Debug, Clone, Serialize)]
pub struct OriginSeries {
    /// Defined coefficients `sigma_0 .. sigma_{valid_terms - 1}`.
    pub coeffs: Vec<f64>,
    /// Highest power requested.
    pub order: usize,
    pub kappa: f64,
    /// The recursion hit a vanishing denominator before reaching `order`.
    pub resonant: bool,
    /// Index at which the denominator vanished, if any.
    pub resonant_index: Option<usize>,
    /// Smallest normalized denominator met during the recursion; small
    /// values mean the late coefficients lost accuracy.
    pub min_denominator: f64,
    /// Set when `min_denominator` drops below the near-resonance threshold.
    pub conditioning_warning: bool,
}

impl OriginSeries {
    /// Number of defined coefficients (counting `sigma_0 = 0`).
    pub fn valid_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Evaluate the truncated series by Horner's rule.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Derivative of the truncated series.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (n, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + n as f64 * c;
        }
        acc
    }
}

/// Coefficients of the origin expansion up to `x^order`.
///
/// The recursion divides by `D(n) = 1/eps + (1 - eta)(n + 1) sigma_1 - n`,
/// which equals `|lambda_plus| (kappa - n)`; at a resonance (`kappa` integer
/// `>= 2`) it stops early with the surviving coefficients.
pub fn origin_coefficients(p: &Parameters, order: usize) -> OriginSeries {
    let sp = p.spectrum();
    let inv_eps = 1.0 / p.eps();
    let one_m_eta = 1.0 - p.eta();
    let sigma1 = sp.sigma;

    let mut coeffs = vec![0.0, sigma1];
    coeffs.truncate(order + 1);
    let mut resonant_index = None;
    let mut min_denominator = f64::INFINITY;

    for n in 2..=order {
        let scale = inv_eps + n as f64;
        let d = inv_eps + one_m_eta * (n as f64 + 1.0) * sigma1 - n as f64;
        min_denominator = min_denominator.min(d.abs() / scale);
        if d.abs() < DENOMINATOR_TOL * scale {
            resonant_index = Some(n);
            break;
        }
        // sigma_n D(n) = -(1/eps + sigma_1) sigma_{n-1}
        //   - sum_{k=2}^{n-1} (n - k + 1) sigma_{n-k+1}
        //                     ((1 - eta) sigma_k + sigma_{k-1})
        let mut num = -(inv_eps + sigma1) * coeffs[n - 1];
        for k in 2..n {
            num -= (n - k + 1) as f64
                * coeffs[n - k + 1]
                * (one_m_eta * coeffs[k] + coeffs[k - 1]);
        }
        coeffs.push(num / d);
    }

    OriginSeries {
        coeffs,
        order,
        kappa: sp.kappa,
        resonant: resonant_index.is_some(),
        resonant_index,
        min_denominator,
        conditioning_warning: min_denominator < NEAR_RESONANCE_WARN,
    }
}

/// Truncated expansion of the slow manifold in inverse powers of `x`.
#[derive(Debug, Clone, Serialize)]
pub struct InfinitySeries {
    /// Coefficients `rho_0 .. rho_order` of `x^0, x^-1, ..`.
    pub coeffs: Vec<f64>,
    pub order: usize,
}

impl InfinitySeries {
    /// Evaluate at `x > 0` by Horner's rule in `1/x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "the inverse-power expansion requires x > 0, got {x}"
            )));
        }
        let u = 1.0 / x;
        Ok(self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c))
    }

    /// Derivative of the truncated expansion at `x > 0`.
    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "the inverse-power expansion requires x > 0, got {x}"
            )));
        }
        let u = 1.0 / x;
        let mut acc = 0.0;
        for (n, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * u - n as f64 * c;
        }
        Ok(acc * u * u)
    }
}

/// Coefficients of the inverse-power expansion up to `x^-order`.
///
/// `rho_0 = 1, rho_1 = -1, rho_2 = 1`, and for `n >= 3`
///
/// ```text
/// rho_n = -rho_{n-1}
///       + eps * sum_{i=1}^{n-2} i rho_i (rho_{n-1-i} + (1 - eta) rho_{n-2-i})
/// ```
///
/// Every coefficient is a polynomial in `(eps, eta)`; there is no resonance.
pub fn infinity_coefficients(p: &Parameters, order: usize) -> InfinitySeries {
    let (eps, eta) = (p.eps(), p.eta());
    let mut rho = vec![1.0, -1.0, 1.0];
    rho.truncate(order + 1);
    for n in 3..=order {
        let mut sum = 0.0;
        for i in 1..=n - 2 {
            sum += i as f64 * rho[i] * (rho[n - 1 - i] + (1.0 - eta) * rho[n - 2 - i]);
        }
        rho.push(-rho[n - 1] + eps * sum);
    }
    InfinitySeries { coeffs: rho, order }
}

/// Result of fitting `r = c x^kappa` to positive-`x` samples.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    /// Fitted prefactor, carrying the common sign of the samples.
    pub c: f64,
    /// Fitted exponent.
    pub kappa_fit: f64,
    /// `x` range of the samples used.
    pub window: (f64, f64),
    /// Root-mean-square residual of the log-log fit, in log units.
    pub residual_rms: f64,
    pub n_points: usize,
}

/// Least-squares power-law fit through `(xs, rs)` in log-log coordinates.
///
/// Requires at least [`MIN_FIT_SAMPLES`] samples, strictly positive and
/// increasing `xs`, and residuals of one strict sign: a sign flip means the
/// data are not in a power-law regime, and the first offending index is
/// reported rather than averaged over.
pub fn fit_tail(xs: &[f64], rs: &[f64]) -> Result<TailFit> {
    if xs.len() != rs.len() {
        return Err(Error::Domain(format!(
            "mismatched sample lengths: {} xs vs {} rs",
            xs.len(),
            rs.len()
        )));
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples { need: MIN_FIT_SAMPLES, got: xs.len() });
    }
    for w in xs.windows(2) {
        if !(w[0] > 0.0 && w[1] > w[0]) {
            return Err(Error::Domain(
                "fit abscissae must be positive and strictly increasing".into(),
            ));
        }
    }
    let sign = rs[0].signum();
    for (i, &r) in rs.iter().enumerate() {
        if r == 0.0 || r.signum() != sign {
            return Err(Error::SignChange { index: i });
        }
    }

    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let lr: Vec<f64> = rs.iter().map(|r| r.abs().ln()).collect();
    let (slope, intercept) = numeric::linear_fit(&lx, &lr);
    let sse: f64 = lx
        .iter()
        .zip(&lr)
        .map(|(&x, &y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    Ok(TailFit {
        c: sign * intercept.exp(),
        kappa_fit: slope,
        window: (xs[0], xs[xs.len() - 1]),
        residual_rms: (sse / xs.len() as f64).sqrt(),
        n_points: xs.len(),
    })
}

/// Longest window of `(lx, lr)` (already in log coordinates) on which a line
/// fits with RMS at most [`STRAIGHT_WINDOW_RMS`]. Ties go to the smaller
/// residual. Returns half-open index bounds.
pub(crate) fn straight_window(lx: &[f64], lr: &[f64]) -> Option<(usize, usize)> {
    let n = lx.len();
    if n < MIN_FIT_SAMPLES {
        return None;
    }
    // Prefix sums make any window's least-squares residual O(1).
    let mut s = vec![[0.0; 5]; n + 1];
    for i in 0..n {
        let (x, y) = (lx[i], lr[i]);
        let prev = s[i];
        s[i + 1] = [
            prev[0] + x,
            prev[1] + y,
            prev[2] + x * x,
            prev[3] + x * y,
            prev[4] + y * y,
        ];
    }
    let window_rms = |i: usize, j: usize| -> f64 {
        let m = (j - i) as f64;
        let sx = s[j][0] - s[i][0];
        let sy = s[j][1] - s[i][1];
        let sxx = s[j][2] - s[i][2];
        let sxy = s[j][3] - s[i][3];
        let syy = s[j][4] - s[i][4];
        let denom = m * sxx - sx * sx;
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        let a = (m * sxy - sx * sy) / denom;
        let b = (sy - a * sx) / m;
        let sse =
            syy + m * b * b + a * a * sxx - 2.0 * b * sy - 2.0 * a * sxy + 2.0 * a * b * sx;
        (sse.max(0.0) / m).sqrt()
    };

    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..=n - MIN_FIT_SAMPLES {
        for j in i + MIN_FIT_SAMPLES..=n {
            let rms = window_rms(i, j);
            if rms <= STRAIGHT_WINDOW_RMS {
                let better = match best {
                    None => true,
                    Some((bi, bj, brms)) => {
                        (j - i) > (bj - bi) || ((j - i) == (bj - bi) && rms < brms)
                    }
                };
                if better {
                    best = Some((i, j, rms));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    fn p(eps: f64, eta: f64) -> Parameters {
        Parameters::new(eps, eta).unwrap()
    }

    #[test]
    fn origin_coefficients_frozen_values() {
        // Reference values from exact evaluation of the recursion.
        let s = origin_coefficients(&p(5.0, 0.8), 4);
        assert_eq!(s.coeffs[0], 0.0);
        assert!((s.coeffs[1] - 4.2360679774997897).abs() < 1e-13);
        assert!((s.coeffs[2] - -25.337718539165475).abs() < 1e-9);
        assert!((s.coeffs[3] - 119.32397537945146).abs() < 1e-8);
        assert!((s.coeffs[4] - -702.47152621656629).abs() < 1e-7);
        assert_eq!(s.valid_terms(), 5);
        assert!(!s.resonant);

        let s = origin_coefficients(&p(0.6, 0.9), 3);
        assert!((s.coeffs[2] - -28.171366616679841).abs() < 1e-9);
        assert!((s.coeffs[3] - -93.005485569713439).abs() < 1e-8);
    }

    #[test]
    fn leading_coefficient_satisfies_eigen_quadratic() {
        // sigma_1 solves eps (1 - eta) s^2 + (1 - eps) s - 1 = 0.
        for &(eps, eta) in &[(5.0, 0.8), (0.6, 0.9), (1.0, 0.95), (0.1, 0.5)] {
            let s1 = origin_coefficients(&p(eps, eta), 1).coeffs[1];
            let q = eps * (1.0 - eta) * s1 * s1 + (1.0 - eps) * s1 - 1.0;
            assert!(q.abs() < 1e-12, "quadratic residual {q} at ({eps}, {eta})");
        }
    }

    #[test]
    fn quadratic_term_sign_follows_kappa() {
        // kappa < 2 forces sigma_2 > 0, kappa > 2 forces sigma_2 < 0.
        let s = origin_coefficients(&p(1.0, 0.95), 2);
        assert!(s.kappa < 2.0 && s.coeffs[2] > 0.0);
        assert!((s.coeffs[2] - 74.342806945451486).abs() < 1e-8);
        let s = origin_coefficients(&p(5.0, 0.8), 2);
        assert!(s.kappa > 2.0 && s.coeffs[2] < 0.0);
    }

    #[test]
    fn resonant_recursion_stops_at_integer_kappa() {
        // eps = 1, eta = 3/4 puts kappa exactly at 3.
        let s = origin_coefficients(&p(1.0, 0.75), 5);
        assert!(s.resonant);
        assert_eq!(s.resonant_index, Some(3));
        assert_eq!(s.valid_terms(), 3);
        assert_eq!(s.order, 5);
        assert!(s.conditioning_warning);
        // sigma_2 is still well defined before the blockage.
        assert!(s.coeffs[2].is_finite() && s.coeffs[2] < 0.0);
    }

    #[test]
    fn recursion_denominator_matches_spectral_form() {
        // D(n) = |lambda_plus| (kappa - n), computed two independent ways.
        for &(eps, eta) in &[(5.0, 0.8), (0.6, 0.9), (0.1, 0.5)] {
            let pa = p(eps, eta);
            let sp = pa.spectrum();
            for n in 2..10 {
                let direct = 1.0 / eps + (1.0 - eta) * (n as f64 + 1.0) * sp.sigma - n as f64;
                let spectral = sp.lambda_plus.abs() * (sp.kappa - n as f64);
                assert!(
                    (direct - spectral).abs() < 1e-12 * (1.0 + spectral.abs()),
                    "D({n}) = {direct} vs {spectral} at ({eps}, {eta})"
                );
            }
        }
    }

    #[test]
    fn origin_eval_and_truncation_error_scale() {
        let pa = p(5.0, 0.8);
        let s = origin_coefficients(&pa, 2);
        let got = s.eval(0.01);
        assert!((got - 0.0398269079211).abs() < 1e-12, "eval = {got}");

        // The phase-equation residual of the order-N truncation must shrink
        // like x^(N+1): halving x divides it by about 2^(N+1).
        let s = origin_coefficients(&pa, 5);
        let residual = |x: f64| {
            let m = s.eval(x);
            let mp = s.eval_deriv(x);
            pa.eps() * mp * pa.phase_denominator(Point::new(x, m)) - (x - m - x * m)
        };
        let (r1, r2) = (residual(1e-3), residual(5e-4));
        assert!(r1 != 0.0);
        let ratio = (r2 / r1).abs();
        assert!(ratio < 1.0 / 32.0, "residual ratio {ratio} too large");
    }

    #[test]
    fn infinity_coefficients_frozen_values() {
        // At (5, 0.8) every rho_n through n = 9 is a small integer, reached
        // here up to the rounding of eta = 0.8 itself.
        let s = infinity_coefficients(&p(5.0, 0.8), 9);
        let expect = [1.0, -1.0, 1.0, 3.0, -15.0, -29.0, 409.0, 91.0, -14431.0, 25427.0];
        for (n, &e) in expect.iter().enumerate() {
            assert!(
                (s.coeffs[n] - e).abs() <= 1e-12 * (1.0 + e.abs()),
                "rho_{n} = {}",
                s.coeffs[n]
            );
        }
        // rho_3 = eps eta - 1 in general.
        let s = infinity_coefficients(&p(0.6, 0.9), 9);
        assert!((s.coeffs[3] - -0.46).abs() < 1e-15);
        let expect = [3.2012, -1.1492, -12.99988, 31.567024, 18.0687608];
        for (k, &e) in expect.iter().enumerate() {
            let got = s.coeffs[5 + k];
            assert!((got - e).abs() < 1e-10 * e.abs(), "rho_{} = {got}", 5 + k);
        }
    }

    #[test]
    fn infinity_eval_guards_and_residual_scale() {
        let pa = p(5.0, 0.8);
        let s = infinity_coefficients(&pa, 9);
        assert!(s.eval(0.0).is_err());
        assert!(s.eval(-3.0).is_err());

        let residual = |x: f64| {
            let y = s.eval(x).unwrap();
            let yp = s.eval_deriv(x).unwrap();
            pa.eps() * yp * pa.phase_denominator(Point::new(x, y)) - (x - y - x * y)
        };
        // Matching holds through x^-(order - 1); doubling x should shrink the
        // residual by at least 2^(order - 2).
        let (r1, r2) = (residual(50.0), residual(100.0));
        assert!(r1 != 0.0);
        let ratio = (r2 / r1).abs();
        assert!(ratio < 1.0 / 128.0, "residual ratio {ratio} too large");
    }

    #[test]
    fn tail_fit_recovers_synthetic_power_law() {
        let xs: Vec<f64> = (0..20).map(|i| 1e-4 * 1.5f64.powi(i)).collect();
        let rs: Vec<f64> = xs.iter().map(|&x| 3.2 * x.powf(2.5)).collect();
        let fit = fit_tail(&xs, &rs).unwrap();
        assert!((fit.kappa_fit - 2.5).abs() < 1e-10);
        assert!((fit.c - 3.2).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-12);

        let neg: Vec<f64> = rs.iter().map(|r| -r).collect();
        let fit = fit_tail(&xs, &neg).unwrap();
        assert!(fit.c < 0.0 && (fit.kappa_fit - 2.5).abs() < 1e-10);
    }

    #[test]
    fn tail_fit_rejects_bad_samples() {
        let xs: Vec<f64> = (0..7).map(|i| 1.0 + i as f64).collect();
        let rs = vec![1.0; 7];
        assert!(matches!(
            fit_tail(&xs, &rs),
            Err(Error::TooFewSamples { need: 8, got: 7 })
        ));

        let xs: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let mut rs = vec![1.0; 10];
        rs[4] = -1.0;
        assert!(matches!(fit_tail(&xs, &rs), Err(Error::SignChange { index: 4 })));
    }

    #[test]
    fn straight_window_finds_the_power_law_stretch() {
        // Power law for 25 points, then a noise floor that bends the curve.
        let xs: Vec<f64> = (0..40).map(|i| 1e-5 * 1.6f64.powi(i)).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let lr: Vec<f64> = xs
            .iter()
            .map(|&x| (2.0 * x.powf(1.7)).max(3e-4).ln())
            .collect();
        let (i, j) = straight_window(&lx, &lr).unwrap();
        assert!(j - i >= 20, "window too short: {i}..{j}");
        let fit = fit_tail(&xs[i..j], &xs[i..j].iter().map(|&x| 2.0 * x.powf(1.7)).collect::<Vec<_>>())
            .unwrap();
        assert!((fit.kappa_fit - 1.7).abs() < 1e-6);
    }
}
