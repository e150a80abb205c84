mod common;

use common::{exp_sinh, rel_err, tanh_sinh};
use hcran::analytic::capacity_r2;
use hcran::special::{exp_integral_e1, exp_scaled_e1, gamma_upper_int, gamma_upper_int_scaled, hyp1f1};
use proptest::prelude::*;

fn upper_gamma_quad(a: i64, x: f64) -> f64 {
    let a = a as f64;
    exp_sinh(|t| ((a - 1.0) * t.ln() - t).exp(), x, 1e-15)
}

#[test]
fn upper_gamma_matches_quadrature_on_grid() {
    for a in -3..=3 {
        for x in [0.1, 1.0, 10.0] {
            let got = gamma_upper_int(a, x).unwrap().value;
            let want = upper_gamma_quad(a, x);
            assert!(rel_err(got, want) <= 1e-10, "a={a} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn e1_matches_quadrature() {
    for x in [1e-3, 0.1, 0.5, 1.0, 2.0, 7.5, 30.0, 120.0] {
        let got = exp_integral_e1(x).unwrap().value;
        let want = exp_sinh(|t| (-t).exp() / t, x, 1e-15);
        assert!(rel_err(got, want) <= 1e-12, "x={x}: {got} vs {want}");
    }
}

#[test]
fn scaled_e1_is_consistent_with_e1() {
    for x in [0.2, 3.0, 40.0, 600.0] {
        let scaled = exp_scaled_e1(x).unwrap().value;
        // e^x E1(x) = int_0^inf e^-t / (x + t) dt
        let want = exp_sinh(|t| (-t).exp() / (x + t), 0.0, 1e-15);
        assert!(rel_err(scaled, want) <= 1e-12, "x={x}");
    }
}

#[test]
fn r2_at_one_matches_defining_integral() {
    // R2(delta) = (1/ln 2) int_0^inf e^(-z/delta) / (1 + z) dz
    let want = exp_sinh(|z| (-z).exp() / (1.0 + z), 0.0, 1e-15) / std::f64::consts::LN_2;
    let got = capacity_r2(1.0).unwrap();
    assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
    let closed = std::f64::consts::E * exp_integral_e1(1.0).unwrap().value / std::f64::consts::LN_2;
    assert!((got - closed).abs() <= 1e-12);
}

#[test]
fn kummer_function_matches_integral_representation() {
    // 1F1(a; c; z) = Gamma(c) / (Gamma(a) Gamma(c - a)) int_0^1 e^(zt) t^(a-1) (1-t)^(c-a-1) dt
    use statrs::function::gamma::ln_gamma;
    for (a, c, z) in [(1.0, 3.0, 2.5), (2.0, 5.0, -4.0), (3.0, 7.0, 20.0), (0.5, 2.5, -30.0)] {
        let norm = (ln_gamma(c) - ln_gamma(a) - ln_gamma(c - a)).exp();
        let want = norm * tanh_sinh(|t: f64| (z * t).exp() * t.powf(a - 1.0) * (1.0 - t).powf(c - a - 1.0), 0.0, 1.0, 1e-15);
        let got = hyp1f1(a, c, z).unwrap().value;
        assert!(rel_err(got, want) <= 1e-11, "1F1({a};{c};{z}) = {got} vs {want}");
    }
}

proptest! {
    #[test]
    fn upper_gamma_recurrence(a in -4i64..5, x in 0.05f64..40.0) {
        // Gamma(a+1, x) = a Gamma(a, x) + x^a e^-x
        let lhs = gamma_upper_int(a + 1, x).unwrap().value;
        let rhs = a as f64 * gamma_upper_int(a, x).unwrap().value + x.powi(a as i32) * (-x).exp();
        prop_assert!(rel_err(lhs, rhs) <= 1e-11 || (lhs - rhs).abs() < 1e-280);
    }

    #[test]
    fn scaled_upper_gamma_agrees(a in -4i64..5, x in 0.05f64..30.0) {
        let plain = gamma_upper_int(a, x).unwrap().value;
        let scaled = gamma_upper_int_scaled(a, x).unwrap().value;
        prop_assert!(rel_err(scaled * (-x).exp(), plain) <= 1e-12);
    }

    #[test]
    fn e1_is_decreasing(x in 1e-3f64..50.0, dx in 1e-3f64..5.0) {
        prop_assert!(exp_integral_e1(x + dx).unwrap().value < exp_integral_e1(x).unwrap().value);
    }
}
