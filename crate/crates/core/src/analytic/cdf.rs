//! CDFs of `X / (aY + b)` and `X / (aY1 + bY2)` with Gamma-distributed
//! `X`, `Y`, `Y1`, `Y2` (unit scale, integer shape).

use statrs::function::factorial::ln_factorial;
use libm::lgamma as ln_gamma;

use crate::quad::{integrate_to_infinity, Tolerance};
use crate::{Error, Result};

/// Parameters of the ratio distributions: `X ~ Gamma(l)`, `Y ~ Gamma(m)` and,
/// for the two-interferer form, `Y2 ~ Gamma(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfParams {
    pub a: f64,
    pub b: f64,
    pub l: u32,
    pub m: u32,
    pub n: u32,
}

impl CdfParams {
    pub fn new(a: f64, b: f64, l: u32, m: u32) -> Result<Self> {
        Self::with_n(a, b, l, m, 1)
    }

    pub fn with_n(a: f64, b: f64, l: u32, m: u32, n: u32) -> Result<Self> {
        let p = CdfParams { a, b, l, m, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidConfig(format!("a must be positive and finite, got {}", self.a)));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidConfig(format!("b must be non-negative and finite, got {}", self.b)));
        }
        if self.l == 0 || self.m == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("shape parameters l, m, n must be at least 1".into()));
        }
        Ok(())
    }
}

/// A CDF value that may come from an approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    pub approximate: bool,
}

fn check_z(z: f64) -> Result<()> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!("CDF argument must be non-negative, got {z}")));
    }
    Ok(())
}

/// `P(Z > z)` for `Z = X / (aY + b)`.
///
/// Each term of the double sum is assembled in the log domain so large
/// `bz` or `az` cannot overflow before the exponential damping applies.
pub fn survival_lemma1(z: f64, p: &CdfParams) -> Result<f64> {
    p.validate()?;
    check_z(z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    let (a, b, m) = (p.a, p.b, p.m as f64);
    let az = a * z;
    let bz = b * z;
    let ln_ratio = (az / (az + 1.0)).ln();
    let ln_base = -bz - m * az.ln_1p() - ln_gamma(m);
    let ln_bz = bz.ln();
    let mut sum = 0.0;
    for k in 0..p.l as u64 {
        let i_max = if b > 0.0 { k } else { 0 };
        for i in 0..=i_max {
            let ln_binom = ln_factorial(k) - ln_factorial(i) - ln_factorial(k - i);
            let power = (k - i) as f64 * ln_ratio + if i > 0 { i as f64 * ln_bz } else { 0.0 };
            let ln_term = ln_base + ln_binom - ln_factorial(k) + ln_gamma((k - i) as f64 + m) + power;
            sum += ln_term.exp();
        }
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// CDF of `Z = X / (aY + b)`. With `b = 0` only the `i = 0` inner terms
/// survive.
pub fn cdf_lemma1(z: f64, p: &CdfParams) -> Result<f64> {
    Ok((1.0 - survival_lemma1(z, p)?).clamp(0.0, 1.0))
}

/// `P(X > t)` for `X ~ Gamma(l)`, i.e. `e^-t sum_{k<l} t^k / k!`.
pub fn erlang_survival(l: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..l {
        term *= t / k as f64;
        sum += term;
    }
    // fold the damping in via logs when the sum is large
    if sum > 1e300 || t > 700.0 {
        let ln: f64 = (0..l)
            .map(|k| (k as f64 * t.ln() - ln_factorial(k as u64) - t).exp())
            .sum();
        return ln.min(1.0);
    }
    (sum * (-t).exp()).min(1.0)
}

/// `ln 1F1(alpha; gamma; x)` for `alpha, gamma > 0` and `x >= 0`, summed in
/// the log domain so arguments of several hundred stay finite.
fn ln_hyp1f1_pos(alpha: f64, gamma: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln_x = x.ln();
    let base = ln_gamma(gamma) - ln_gamma(alpha);
    if alpha.fract() == 0.0 && x > 200.0 + 10.0 * gamma {
        // For integer alpha the large-x expansion terminates after alpha
        // terms; the dropped part is O(e^-x x^gamma) relative.
        let mut term = 1.0;
        let mut sum = 1.0;
        for s in 0..(alpha as usize - 1) {
            let s = s as f64;
            term *= (gamma - alpha + s) * (1.0 - alpha + s) / ((s + 1.0) * x);
            sum += term;
        }
        return base + x + (alpha - gamma) * ln_x + sum.ln();
    }
    let ln_t = |n: f64| base + ln_gamma(alpha + n) - ln_gamma(gamma + n) + n * ln_x - ln_gamma(n + 1.0);
    // the largest term sits near n* where (alpha+n) x / ((gamma+n)(n+1)) = 1
    let mut peak = 0.0f64;
    let mut n = 0.0;
    while (alpha + n) * x / ((gamma + n) * (n + 1.0)) > 1.0 {
        n += 1.0;
        peak = n;
    }
    let ln_max = ln_t(peak);
    let mut sum = 0.0;
    let mut n = 0.0;
    loop {
        let rel = (ln_t(n) - ln_max).exp();
        sum += rel;
        if n > peak && rel < 1e-18 * sum {
            break;
        }
        n += 1.0;
    }
    ln_max + sum.ln()
}

/// Density of `D = aY1 + bY2`, `Y1 ~ Gamma(m)`, `Y2 ~ Gamma(n)`, `a != b`.
///
/// Uses `f(y) = c1^m c2^n y^(m+n-1) / Gamma(m+n) e^(-c y) 1F1(.; m+n; d y)`
/// in whichever of the two equivalent forms keeps `d >= 0`, where
/// `c1 = 1/a`, `c2 = 1/b`.
pub fn mixed_gamma_density(y: f64, a: f64, b: f64, m: u32, n: u32) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (c1, c2) = (1.0 / a, 1.0 / b);
    let (mf, nf) = (m as f64, n as f64);
    let (rate, alpha, d) = if c2 >= c1 { (c2, mf, c2 - c1) } else { (c1, nf, c1 - c2) };
    let ln_f = mf * c1.ln() + nf * c2.ln() + (mf + nf - 1.0) * y.ln() - ln_gamma(mf + nf) - rate * y
        + ln_hyp1f1_pos(alpha, mf + nf, d * y);
    ln_f.exp()
}

/// Exact CDF of `Z = X / (aY1 + bY2)`.
///
/// Integrates `P(X > z y)` against the density of `aY1 + bY2` once; the
/// inner expectation over `X` is available in closed form so a second
/// quadrature level is not needed. `a = b` reduces to a single Gamma of
/// shape `m + n`.
pub fn cdf_lemma2_exact(z: f64, p: &CdfParams) -> Result<f64> {
    p.validate()?;
    check_z(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if p.b == 0.0 {
        return cdf_lemma1(z, &CdfParams { b: 0.0, ..*p });
    }
    if p.a == p.b {
        return cdf_lemma1(z, &CdfParams { b: 0.0, m: p.m + p.n, ..*p });
    }
    // integrate in units of the mean of aY1 + bY2
    let scale = p.a * p.m as f64 + p.b * p.n as f64;
    let tol = Tolerance::new(1e-10, 1e-10);
    let r = integrate_to_infinity(
        |u| {
            let y = u * scale;
            erlang_survival(p.l, z * y) * mixed_gamma_density(y, p.a, p.b, p.m, p.n) * scale
        },
        0.0,
        tol,
    )?;
    if r.abs_err > 1e-7 {
        return Err(Error::QuadratureFailure { estimate: r.value, error: r.abs_err });
    }
    Ok((1.0 - r.value).clamp(0.0, 1.0))
}

/// Approximate CDF of `X / (aY1 + bY2)`: `bY2` is replaced by its mean
/// `bn` and the single-interferer CDF applied.
pub fn cdf_lemma2_approx(z: f64, p: &CdfParams) -> Result<CdfValue> {
    p.validate()?;
    let value = cdf_lemma1(z, &CdfParams { b: p.b * p.n as f64, ..*p })?;
    Ok(CdfValue { value, approximate: true })
}
