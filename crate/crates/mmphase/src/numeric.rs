//! Small numerical kernels shared across modules: least squares lines,
//! cubic Hermite pieces, natural-spline slopes, and bracketed root finding.

/// Least-squares line through `(xs, ys)`, returned as `(slope, intercept)`.
///
/// Uses centered sums; `xs` must contain at least two distinct values.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Cubic Hermite value on `[x0, x1]` with endpoint values and slopes.
pub(crate) fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + h * d0 * (t3 - 2.0 * t2 + t)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + h * d1 * (t3 - t2)
}

/// Derivative of [`hermite`] with respect to `x`.
pub(crate) fn hermite_deriv(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    y0 * (6.0 * t2 - 6.0 * t) / h
        + d0 * (3.0 * t2 - 4.0 * t + 1.0)
        + y1 * (-6.0 * t2 + 6.0 * t) / h
        + d1 * (3.0 * t2 - 2.0 * t)
}

/// Node slopes of the natural cubic spline through `(xs, ys)`.
///
/// Solves the tridiagonal moment system with zero end moments, then converts
/// moments to first derivatives at the nodes. `xs` must be strictly
/// increasing with at least two entries.
pub(crate) fn natural_spline_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    debug_assert!(n >= 2 && n == ys.len());
    if n == 2 {
        let d = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return vec![d, d];
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let div: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

    // Thomas sweep for the interior moments m[1..n-1]; m[0] = m[n-1] = 0.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let a = h[i - 1];
        let b = 2.0 * (h[i - 1] + h[i]);
        let c = h[i];
        let rhs = 6.0 * (div[i] - div[i - 1]);
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (rhs - a * d_prime[i - 1]) / denom;
    }
    let mut m = vec![0.0; n];
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }

    let mut slopes = vec![0.0; n];
    for i in 0..n - 1 {
        slopes[i] = div[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    }
    slopes[n - 1] = div[n - 2] + h[n - 2] * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
    slopes
}

/// Bisection on a bracketing interval; `f(a)` and `f(b)` must have opposite
/// signs. Returns the midpoint of the final interval of width `<= xtol`.
pub(crate) fn bisect_root(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, xtol: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0, "bisect_root needs a sign change");
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Newton iteration safeguarded by a bracket: steps that leave the interval
/// fall back to bisection, and the bracket shrinks monotonically either way.
///
/// `f` returns `(value, derivative)`. Requires a sign change over `[a, b]`;
/// returns `None` if there is none.
pub(crate) fn newton_bracketed(
    mut f: impl FnMut(f64) -> (f64, f64),
    a: f64,
    b: f64,
    xtol: f64,
) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let (mut flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if flo * fx < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        if (hi - lo).abs() <= xtol {
            return Some(0.5 * (lo + hi));
        }
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Some(0.5 * (lo + hi))
}
