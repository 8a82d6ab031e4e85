//! Isoclines of the phase-plane slope field and the regions they bound.
//!
//! For every slope level `c` the set `{ f(x, y) = c }` is the graph of
//!
//! ```text
//! F(x, c) = x / (K(c) + x),   K(c) = (1 + eps (1 - eta) c) / (1 + eps c)
//! ```
//!
//! so the slope isoclines form a one-parameter family of saturation curves
//! distinguished only by their half-saturation scale `K(c)`. Three members
//! matter constantly:
//!
//! * `H = F(., 0)`: the horizontal isocline `y' = 0`, `K = 1`;
//! * `V = F(., inf)`: the vertical isocline `x' = 0`, `K = 1 - eta`;
//! * `alpha = F(., sigma)`: the isocline of the slow eigenslope, `K = 1/sigma`.
//!
//! `H < alpha < V < 1` for all `x > 0`. The closed strip between `H` and `V`
//! is positively invariant, as is the narrower strip between `H` and `alpha`
//! that traps the slow manifold.

use serde::Serialize;

use crate::kinetics::Parameters;
use crate::tolerances::{K_POLE_TOL, REGION_BOUNDARY_TOL};
use crate::{Error, Point, Result};

/// Half-saturation scale `K(c)` of the slope-`c` isocline.
///
/// Decreases from `K(0) = 1` to `K(inf) = 1 - eta` over `c >= 0`; has a pole
/// at `c = -1/eps`, which is rejected here (the isocline itself degenerates
/// to the x-axis at that level, see [`slope_isocline`]).
pub fn michaelis_scale(p: &Parameters, c: f64) -> Result<f64> {
    let den = 1.0 + p.eps() * c;
    if den.abs() < K_POLE_TOL {
        return Err(Error::KPole { c });
    }
    Ok((1.0 + p.eps() * (1.0 - p.eta()) * c) / den)
}

/// Height of the slope-`c` isocline at `x`: the solution `y` of
/// `f(x, y) = c`.
///
/// At the pole level `c = -1/eps` the isocline is the x-axis itself
/// (`f(x, 0) = -1/eps` identically), so `F(x, -1/eps) = 0` by continuity.
/// Errors when `K(c) = -x`, where the graph form blows up.
pub fn slope_isocline(p: &Parameters, x: f64, c: f64) -> Result<f64> {
    let k = match michaelis_scale(p, c) {
        Ok(k) => k,
        Err(Error::KPole { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let den = k + x;
    if den.abs() < K_POLE_TOL * (1.0 + x.abs()) {
        return Err(Error::Domain(format!(
            "slope isocline for c = {c} is singular at x = {x} (K(c) = {k})"
        )));
    }
    Ok(x / den)
}

/// The horizontal isocline `H(x) = x / (1 + x)`.
pub fn horizontal(x: f64) -> f64 {
    x / (1.0 + x)
}

/// The vertical isocline `V(x) = x / (1 - eta + x)`.
pub fn vertical(p: &Parameters, x: f64) -> f64 {
    x / (1.0 - p.eta() + x)
}

/// The slow-eigenslope isocline `alpha(x) = x / (1/sigma + x)`.
///
/// Tangent to the slow eigendirection at the origin; together with `H` it
/// bounds the trapping strip for the slow manifold.
pub fn alpha(p: &Parameters, x: f64) -> f64 {
    let sigma = p.spectrum().sigma;
    x / (1.0 / sigma + x)
}

/// `u(c) = c K(c)`, strictly increasing for `c > 0`.
///
/// Used to order isocline crossings in monotonicity arguments; only the
/// positive branch is meaningful, so `c <= 0` is a domain error.
pub fn u(p: &Parameters, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("u(c) requires c > 0, got {c}")));
    }
    Ok(c * michaelis_scale(p, c)?)
}

/// Residual of the differential equation satisfied by every member of the
/// isocline family: `w (w - 1) + x w' = 0` for `w = F(., c)`, any `c`.
///
/// Vanishing of this expression characterizes saturation curves through the
/// origin with unit shape, independent of parameters.
pub fn isocline_residual(x: f64, w: f64, wp: f64) -> f64 {
    w * (w - 1.0) + x * wp
}

/// Horizontal bands of the right half-plane cut out by `H`, `alpha`, `V`,
/// and the line `y = 1`.
///
/// The bands through `H..=alpha` and `alpha..V` are reported separately
/// because the slow manifold lives in the first while trajectories cross the
/// second transversally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Strictly below the horizontal isocline.
    BelowHorizontal,
    /// The closed strip `H <= y <= alpha` containing the slow manifold.
    Gamma1,
    /// Strictly between `alpha` and the vertical isocline.
    AlphaToVertical,
    /// On the vertical isocline, within the boundary tolerance.
    OnVertical,
    /// Strictly between the vertical isocline and `y = 1`.
    VerticalToOne,
    /// At or above the invariant level `y = 1`.
    AtOrAboveOne,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::BelowHorizontal => "below-H",
            Region::Gamma1 => "gamma1",
            Region::AlphaToVertical => "alpha-to-V",
            Region::OnVertical => "on-V",
            Region::VerticalToOne => "V-to-one",
            Region::AtOrAboveOne => "at-or-above-one",
        };
        f.write_str(s)
    }
}

/// Classify a point into one of the isocline bands.
///
/// Boundaries are resolved with an absolute tolerance of
/// [`REGION_BOUNDARY_TOL`]; the closed strips keep their boundary points.
/// Only the closed right half-plane is classified.
pub fn classify_region(p: &Parameters, pt: Point) -> Result<Region> {
    if !(pt.x >= 0.0) {
        return Err(Error::Domain(format!(
            "region classification requires x >= 0, got x = {}",
            pt.x
        )));
    }
    let tol = REGION_BOUNDARY_TOL;
    let h = horizontal(pt.x);
    let a = alpha(p, pt.x);
    let v = vertical(p, pt.x);
    let y = pt.y;
    Ok(if y < h - tol {
        Region::BelowHorizontal
    } else if y <= a + tol {
        Region::Gamma1
    } else if y < v - tol {
        Region::AlphaToVertical
    } else if y <= v + tol {
        Region::OnVertical
    } else if y < 1.0 - tol {
        Region::VerticalToOne
    } else {
        Region::AtOrAboveOne
    })
}

/// Membership in the closed invariant strip `H <= y <= V`.
pub fn in_gamma0(p: &Parameters, pt: Point) -> bool {
    pt.x >= 0.0
        && pt.y >= horizontal(pt.x) - REGION_BOUNDARY_TOL
        && pt.y <= vertical(p, pt.x) + REGION_BOUNDARY_TOL
}

/// Membership in the closed trapping strip `H <= y <= alpha`.
pub fn in_gamma1(p: &Parameters, pt: Point) -> bool {
    pt.x >= 0.0
        && pt.y >= horizontal(pt.x) - REGION_BOUNDARY_TOL
        && pt.y <= alpha(p, pt.x) + REGION_BOUNDARY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(eps: f64, eta: f64) -> Parameters {
        Parameters::new(eps, eta).unwrap()
    }

    #[test]
    fn michaelis_scale_distinguished_levels() {
        let pa = p(5.0, 0.8);
        assert_eq!(michaelis_scale(&pa, 0.0).unwrap(), 1.0);
        // K(sigma) = 1/sigma: the slow eigendirection is self-consistent.
        let sigma = pa.spectrum().sigma;
        let k = michaelis_scale(&pa, sigma).unwrap();
        assert!((k - 1.0 / sigma).abs() < 1e-15, "K(sigma) = {k}");
        // K(1/4) = 5/9 at these parameters.
        assert_eq!(michaelis_scale(&pa, 0.25).unwrap(), 5.0 / 9.0);
        // Large-c limit is 1 - eta.
        assert!((michaelis_scale(&pa, 1e12).unwrap() - 0.2).abs() < 1e-11);
        // Pole at c = -1/eps.
        assert!(matches!(
            michaelis_scale(&pa, -0.2),
            Err(Error::KPole { .. })
        ));
    }

    #[test]
    fn michaelis_scale_decreases_on_positive_levels() {
        let pa = p(0.6, 0.9);
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let c = 1e-3 * 1.3f64.powi(i);
            let k = michaelis_scale(&pa, c).unwrap();
            assert!(k < prev && k > 1.0 - pa.eta());
            prev = k;
        }
    }

    #[test]
    fn slope_isocline_matches_slope_field() {
        // y = F(x, c) is exactly the level set f(x, y) = c.
        for &(eps, eta) in &[(5.0, 0.8), (0.6, 0.9), (0.1, 0.5)] {
            let pa = p(eps, eta);
            for &c in &[-0.1, 0.0, 0.3, 1.0, 7.5] {
                if 1.0 + eps * c == 0.0 {
                    continue;
                }
                for &x in &[0.05, 0.7, 3.0, 40.0] {
                    let y = slope_isocline(&pa, x, c).unwrap();
                    let f = pa.slope_field(Point::new(x, y)).unwrap();
                    // The identity is exact; the denominator cancellation in
                    // f costs a few ulps at large x.
                    assert!((f - c).abs() < 1e-12 * (1.0 + x) * (1.0 + c.abs()), "f(x, F(x, {c})) = {f}");
                }
            }
        }
    }

    #[test]
    fn slope_isocline_pole_level_is_the_axis() {
        let pa = p(5.0, 0.8);
        assert_eq!(slope_isocline(&pa, 3.0, -0.2).unwrap(), 0.0);
        // And the slope field is indeed -1/eps on the axis.
        assert_eq!(pa.slope_field(Point::new(3.0, 0.0)).unwrap(), -0.2);
    }

    #[test]
    fn slope_isocline_rejects_matching_negative_scale() {
        // Just past the pole K(c) is large and negative; x = -K(c) blows up.
        let pa = p(5.0, 0.8);
        let k = michaelis_scale(&pa, -0.21).unwrap();
        assert!(k < 0.0);
        assert!(slope_isocline(&pa, -k, -0.21).is_err());
    }

    #[test]
    fn ordering_of_distinguished_isoclines() {
        for &(eps, eta) in &[(5.0, 0.8), (0.6, 0.9), (1.0, 0.95), (0.1, 0.5)] {
            let pa = p(eps, eta);
            for i in -30..=30 {
                let x = 10f64.powf(i as f64 / 10.0);
                let (h, a, v) = (horizontal(x), alpha(&pa, x), vertical(&pa, x));
                assert!(h < a && a < v && v < 1.0, "ordering fails at x = {x}");
            }
        }
    }

    #[test]
    fn alpha_frozen_value() {
        // alpha(1) = sigma / (1 + sigma) at (5, 0.8).
        let a = alpha(&p(5.0, 0.8), 1.0);
        assert!((a - 0.80901699437494742).abs() < 1e-15, "alpha(1) = {a}");
    }

    #[test]
    fn u_is_monotone_and_guarded() {
        let pa = p(5.0, 0.8);
        let got = u(&pa, 10.0).unwrap();
        assert!((got - 110.0 / 51.0).abs() < 1e-15, "u(10) = {got}");
        let mut prev = 0.0;
        for i in 1..=50 {
            let c = 0.1 * i as f64;
            let val = u(&pa, c).unwrap();
            assert!(val > prev);
            prev = val;
        }
        assert!(matches!(u(&pa, 0.0), Err(Error::Domain(_))));
        assert!(matches!(u(&pa, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn family_satisfies_shape_ode() {
        let pa = p(0.6, 0.9);
        for &c in &[0.0, 0.5, 2.0, 11.0] {
            let k = michaelis_scale(&pa, c).unwrap();
            for &x in &[0.01, 0.4, 2.5, 90.0] {
                let w = x / (k + x);
                let wp = k / ((k + x) * (k + x));
                let r = isocline_residual(x, w, wp);
                assert!(r.abs() < 1e-15, "residual {r} at c = {c}, x = {x}");
            }
        }
    }

    #[test]
    fn region_classification_bands() {
        let pa = p(5.0, 0.8);
        let x = 1.0;
        let v = vertical(&pa, x);
        let cases = [
            (0.3, Region::BelowHorizontal),
            (0.5, Region::Gamma1), // on H itself: closed strip
            (0.65, Region::Gamma1),
            (0.80901699437494742, Region::Gamma1), // on alpha: still closed
            (0.82, Region::AlphaToVertical),
            (v, Region::OnVertical),
            (0.9, Region::VerticalToOne),
            (1.0, Region::AtOrAboveOne),
            (1.5, Region::AtOrAboveOne),
        ];
        for (y, want) in cases {
            let got = classify_region(&pa, Point::new(x, y)).unwrap();
            assert_eq!(got, want, "y = {y}");
        }
        // The origin is the corner of the trapping strip.
        assert_eq!(
            classify_region(&pa, Point::new(0.0, 0.0)).unwrap(),
            Region::Gamma1
        );
        assert!(classify_region(&pa, Point::new(-0.1, 0.5)).is_err());
    }

    #[test]
    fn strip_membership_helpers() {
        let pa = p(0.6, 0.9);
        let x = 2.0;
        let mid_gamma1 = 0.5 * (horizontal(x) + alpha(&pa, x));
        let mid_outer = 0.5 * (alpha(&pa, x) + vertical(&pa, x));
        assert!(in_gamma1(&pa, Point::new(x, mid_gamma1)));
        assert!(in_gamma0(&pa, Point::new(x, mid_gamma1)));
        assert!(!in_gamma1(&pa, Point::new(x, mid_outer)));
        assert!(in_gamma0(&pa, Point::new(x, mid_outer)));
        assert!(!in_gamma0(&pa, Point::new(x, 0.999)));
    }
}
