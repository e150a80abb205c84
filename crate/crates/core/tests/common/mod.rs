//! Reference computations shared by the integration tests. Nothing here
//! calls into the quadrature or special-function code under test.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Double-exponential (tanh-sinh) rule on `[a, b]`, halving the step until
/// two successive levels agree to `rel`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let r = 0.5 * (b - a);
    let term = |t: f64| {
        let s = FRAC_PI_2 * t.sinh();
        let u = 1.0 / s.cosh();
        // 1 - tanh(s) without cancellation, for the distance to the end points
        let one_minus = u * u / (1.0 + s.tanh()) ;
        let w = FRAC_PI_2 * t.cosh() * u * u;
        let x_hi = b - r * one_minus;
        let x_lo = a + r * one_minus;
        let mut v = 0.0;
        if x_hi < b && x_hi > a {
            v += f(x_hi);
        }
        if t != 0.0 && x_lo > a && x_lo < b {
            v += f(x_lo);
        }
        r * w * v
    };
    de_sum(term, rel, 4.0)
}

/// Exp-sinh rule on `[a, inf)`.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, rel: f64) -> f64 {
    let term = |t: f64| {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        let x = a + e;
        let w = FRAC_PI_2 * t.cosh() * e;
        if !x.is_finite() || w == 0.0 || x == a {
            return 0.0;
        }
        let v = f(x) * w;
        if v.is_finite() { v } else { 0.0 }
    };
    // symmetric in t only for tanh-sinh; here sum over both signs of t
    let both = |t: f64| if t == 0.0 { term(0.0) } else { term(t) + term(-t) };
    de_sum(both, rel, 4.5)
}

fn de_sum<T: Fn(f64) -> f64>(term: T, rel: f64, t_max: f64) -> f64 {
    let mut h = 0.5;
    let n0 = (t_max / h) as i64;
    let mut sum: f64 = (0..=n0).map(|i| term(i as f64 * h)).sum();
    let mut prev = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let n = (t_max / h) as i64;
        sum += (1..=n).step_by(2).map(|i| term(i as f64 * h)).sum::<f64>();
        let cur = sum * h;
        if (cur - prev).abs() <= rel * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `P(X > t)` for `X ~ Gamma(l, 1)` through the regularized incomplete gamma.
pub fn gamma_survival(l: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    gamma_ur(l as f64, t)
}

pub fn gamma_pdf(x: f64, shape: u32) -> f64 {
    if x <= 0.0 {
        return if shape == 1 && x == 0.0 { 1.0 } else { 0.0 };
    }
    let k = shape as f64;
    ((k - 1.0) * x.ln() - x - ln_gamma(k)).exp()
}

/// `P(X / (aY + b) > z)` by quadrature over `Y`.
pub fn ratio_survival_quad(z: f64, a: f64, b: f64, l: u32, m: u32) -> f64 {
    exp_sinh(|y| gamma_survival(l, z * (a * y + b)) * gamma_pdf(y, m), 0.0, 1e-14)
}

/// `P(X / (aY1 + bY2) > z)` as a finite sum: expanding `P(X > t)` into
/// `e^-t t^k / k!` and the binomial of `t = z a Y1 + z b Y2` leaves Gamma
/// moments of the form `E[e^(-cY) (cY)^j]`.
pub fn mixed_ratio_survival_sum(z: f64, a: f64, b: f64, l: u32, m: u32, n: u32) -> f64 {
    let moment = |c: f64, shape: u32, j: u32| {
        let s = shape as f64;
        let j = j as f64;
        (j * c.ln() + ln_gamma(s + j) - ln_gamma(s) - (s + j) * c.ln_1p()).exp()
    };
    let (ca, cb) = (z * a, z * b);
    let mut total = 0.0;
    for k in 0..l {
        let mut inner = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            let mj = if j == 0 { 1.0 / (1.0 + ca).powf(m as f64) } else { moment(ca, m, j) };
            let nj = if k - j == 0 { 1.0 / (1.0 + cb).powf(n as f64) } else { moment(cb, n, k - j) };
            inner += binom * mj * nj;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        total += inner / factorial(k);
    }
    total
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 { got.abs() } else { ((got - want) / want).abs() }
}
