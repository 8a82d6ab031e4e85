//! Far-field coefficients against an exact-rational evaluation of the same
//! recursion. The float recursion multiplies and folds in a fixed order, so
//! the only daylight between the two is accumulated rounding plus the
//! rounding of `eta` itself.

mod common;

use common::{q, q_to_f64, rho_exact};
use mmphase::kinetics::Parameters;
use mmphase::series::infinity_coefficients;

fn check_params(eps_q: (i64, i64), eta_q: (i64, i64), n_max: usize) {
    let eps = q(eps_q.0, eps_q.1);
    let eta = q(eta_q.0, eta_q.1);
    let exact = rho_exact(&eps, &eta, n_max);

    let p = Parameters::new(q_to_f64(&eps), q_to_f64(&eta)).unwrap();
    let s = infinity_coefficients(&p, n_max);
    assert_eq!(s.coeffs.len(), n_max + 1);

    for (n, (got, want_q)) in s.coeffs.iter().zip(&exact).enumerate() {
        let want = q_to_f64(want_q);
        let tol = 1e-12 * (1.0 + want.abs());
        assert!(
            (got - want).abs() <= tol,
            "rho_{n} at ({}/{}, {}/{}): {got} vs {want}",
            eps_q.0,
            eps_q.1,
            eta_q.0,
            eta_q.1
        );
    }
}

#[test]
fn infinity_coefficients_match_exact_recursion() {
    check_params((5, 1), (4, 5), 12);
    check_params((3, 5), (9, 10), 12);
    check_params((1, 10), (1, 2), 12);
}

#[test]
fn known_low_order_closed_forms() {
    // rho_3 = eps*eta - 1 and rho_4 = 1 - 4*eps*eta drop out of the
    // recursion for every parameter pair.
    for &(e, h) in &[(5, 1), (7, 3), (1, 100)] {
        for &(a, b) in &[(4, 5), (1, 2), (9, 10)] {
            let eps = q(e, h);
            let eta = q(a, b);
            let rho = rho_exact(&eps, &eta, 4);
            assert_eq!(rho[3], &eps * &eta - q(1, 1));
            assert_eq!(rho[4], q(1, 1) - q(4, 1) * &eps * &eta);
        }
    }
}
