//! Shared helpers for the integration tests: exact-rational recursions for
//! the far-field coefficients and a small least-squares slope fit.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = Ratio<BigInt>;

pub fn q(num: i64, den: i64) -> Q {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_to_f64(v: &Q) -> f64 {
    v.to_f64().expect("rational fits in f64 range")
}

/// Far-field coefficients `rho_0..rho_n` from the published recursion,
/// evaluated in exact arithmetic:
///
/// ```text
/// rho_0 = 1, rho_1 = -1, rho_2 = 1,
/// rho_n = -rho_{n-1} + eps * sum_{i=1}^{n-2} i rho_i (rho_{n-1-i} + (1-eta) rho_{n-2-i})
/// ```
pub fn rho_exact(eps: &Q, eta: &Q, n_max: usize) -> Vec<Q> {
    let one_m_eta = Q::one() - eta;
    let mut rho = vec![Q::one(), -Q::one(), Q::one()];
    rho.truncate(n_max + 1);
    for n in 3..=n_max {
        let mut sum = Q::zero();
        for i in 1..=n - 2 {
            let inner = &rho[n - 1 - i] + &one_m_eta * &rho[n - 2 - i];
            sum += Q::from(BigInt::from(i)) * &rho[i] * inner;
        }
        let next = -&rho[n - 1] + eps * sum;
        rho.push(next);
    }
    rho
}

/// The same coefficients derived a second way: as the centre-manifold
/// expansion of the fixed point at infinity.
///
/// Under `X = 1/x`, `Y = y - (1 - 1/x)` the flow becomes `X' = -A`,
/// `Y' = -A + B` with
///
/// ```text
/// A(X, Y) = -eta X^3 - (1-eta) X^4 + X^2 Y + (1-eta) X^3 Y
/// B(X, Y) = eps^-1 (X^2 - X Y - Y)
/// ```
///
/// and the invariance of `Y = W(X) = sum_{i>=2} w_i X^i` reads
/// `B = A (1 - W')`. Matching powers of `X` gives, order by order,
///
/// ```text
/// [A]_i    = -eta d_{i,3} - (1-eta) d_{i,4} + w_{i-2} + (1-eta) w_{i-3}
/// [A W']_i = sum_{m=1}^{i-3} (m+1) w_{m+1} [A]_{i-m}
/// w_i      = d_{i,2} - w_{i-1} - eps ([A]_i - [A W']_i)
/// ```
///
/// Back in the original coordinates the series is
/// `1 - 1/x + sum_{i>=2} w_i x^-i`, so the returned vector starts `1, -1`.
pub fn rho_centre_manifold(eps: &Q, eta: &Q, n_max: usize) -> Vec<Q> {
    assert!(n_max >= 2);
    let one_m_eta = Q::one() - eta;
    // w[0] and w[1] stay zero; the expansion starts at X^2.
    let mut w = vec![Q::zero(); n_max + 1];
    // Coefficients [A]_i of A(X, W(X)), filled as w becomes known.
    let mut a = vec![Q::zero(); n_max + 1];
    for i in 2..=n_max {
        // [A]_i depends on w up to index i - 2, all known by now.
        let mut ai = &w[i - 2] + if i >= 3 { &one_m_eta * &w[i - 3] } else { Q::zero() };
        if i == 3 {
            ai -= eta;
        }
        if i == 4 {
            ai -= &one_m_eta;
        }
        a[i] = ai;

        let mut awp = Q::zero();
        for m in 1..=i.saturating_sub(3) {
            awp += Q::from(BigInt::from(m + 1)) * &w[m + 1] * &a[i - m];
        }

        let delta = if i == 2 { Q::one() } else { Q::zero() };
        w[i] = delta - &w[i - 1] - eps * (&a[i] - awp);
    }
    let mut out = vec![Q::one(), -Q::one()];
    out.extend_from_slice(&w[2..]);
    out
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

/// `eps * eta - 1` in exact arithmetic, the closed form of the second
/// centre-manifold coefficient.
pub fn third_coefficient(eps: &Q, eta: &Q) -> Q {
    eps * eta - Q::one()
}

pub fn is_positive(v: &Q) -> bool {
    v.is_positive()
}
