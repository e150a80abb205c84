//! Ergodic capacities `E[log2(1 + Z)]` of the ratio distributions.

use statrs::function::factorial::{binomial, factorial, ln_factorial};
use std::f64::consts::LN_2;

use super::cdf::{survival_lemma1, CdfParams};
use crate::quad::{integrate_to_infinity, Tolerance};
use crate::special::{exp_scaled_e1, gamma_upper_int_scaled};
use crate::{Error, Result};

/// Absolute accuracy requested from every capacity quadrature.
pub const CAPACITY_ABS_TOL: f64 = 1e-10;

/// `(1/ln 2) int_0^inf S(z) / (1 + z) dz` for any survival function `S`.
pub fn capacity_from_survival<F: FnMut(f64) -> Result<f64>>(mut survival: F) -> Result<f64> {
    let mut failure = None;
    let r = integrate_to_infinity(
        |z| match survival(z) {
            Ok(s) => s / (1.0 + z),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        Tolerance::new(CAPACITY_ABS_TOL * LN_2, 1e-12),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value / LN_2)
}

/// `E[log2(1 + X / (aY + b))]`, `X ~ Gamma(l)`, `Y ~ Gamma(m)`, by quadrature
/// of the survival function.
pub fn capacity_r1(a: f64, b: f64, l: u32, m: u32) -> Result<f64> {
    let p = CdfParams::new(a, b, l, m)?;
    capacity_from_survival(|z| survival_lemma1(z, &p))
}

/// Closed form of [`capacity_r1`] from a partial-fraction split of
/// `1 / ((z + 1)(z + 1/a)^n)`. Needs `b > 0` and `a != 1`.
///
/// The alternating sums cancel badly when `a` is near 1 or `l` is large, so
/// this is an experimental cross-check only.
pub fn capacity_r1_closed_form(a: f64, b: f64, l: u32, m: u32) -> Result<f64> {
    closed_form_check(a, b, l, m)?;
    let c = 1.0 / a;
    let mut total = 0.0;
    for k in 0..l as u64 {
        let lead = factorial(k) * gamma_upper_int_scaled(-(k as i64), b)?.value;
        for i in 0..=k {
            let n = k + m as u64 - i;
            let mut inner = (c - 1.0).powi(-(n as i32)) * lead;
            for j in 1..=n {
                let outer = (c - 1.0).powi(j as i32 - n as i32 - 1);
                for mm in 0..=k {
                    let order = k as i64 - mm as i64 - j as i64 + 1;
                    let g = gamma_upper_int_scaled(order, b * c)?.value;
                    inner -= outer * binomial(k, mm) * (-c).powi(mm as i32) * b.powi(-order as i32) * g;
                }
            }
            let coeff = b.powi(i as i32) * a.powi(-(m as i32)) * binomial(k, i)
                * (ln_factorial(n - 1) - ln_factorial(k) - ln_factorial(m as u64 - 1)).exp();
            total += coeff * inner;
        }
    }
    Ok(total / LN_2)
}

/// The closed form with the literal index placement:
/// `a^(-k+m+j-1)` in the inner sum and `Gamma(k - i - j + 1, b/a)`.
pub fn capacity_r1_as_printed(a: f64, b: f64, l: u32, m: u32) -> Result<f64> {
    closed_form_check(a, b, l, m)?;
    let c = 1.0 / a;
    let mf = m as i32;
    let mut total = 0.0;
    for k in 0..l as u64 {
        let ki = k as i32;
        let lead = factorial(k) * gamma_upper_int_scaled(-(k as i64), b)?.value;
        for i in 0..=k {
            let ii = i as i32;
            let mut bracket = (c - 1.0).powi(ii - mf - ki) * lead;
            for j in 1..=(ki - ii + mf) {
                for mm in 0..=k {
                    let g = gamma_upper_int_scaled((ki - ii - j + 1) as i64, b / a)?.value;
                    bracket -= binomial(k, mm)
                        * (-c).powi(mm as i32)
                        * a.powi(-ki + mm as i32 + j - 1)
                        * g
                        * (c - 1.0).powi(ii + j - mf - ki - 1);
                }
            }
            let coeff = a.powi(ii - mf) / factorial(k)
                * binomial(k, i)
                * (b / a).powi(ii)
                * factorial((ki + mf - ii - 1) as u64);
            total += coeff * bracket;
        }
    }
    Ok(total / (LN_2 * factorial(m as u64 - 1)))
}

fn closed_form_check(a: f64, b: f64, l: u32, m: u32) -> Result<()> {
    CdfParams::new(a, b, l, m)?;
    if b <= 0.0 {
        return Err(Error::Domain("closed-form capacity needs b > 0".into()));
    }
    if a == 1.0 {
        return Err(Error::Domain("closed-form capacity is singular at a = 1".into()));
    }
    Ok(())
}

/// `E[log2(1 + dX)]` for `X ~ Exp(1)`: `e^(1/d) E1(1/d) / ln 2`.
pub fn capacity_r2(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("capacity_r2 needs delta > 0, got {delta}")));
    }
    Ok(exp_scaled_e1(1.0 / delta)?.value / LN_2)
}
