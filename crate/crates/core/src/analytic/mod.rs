//! Closed-form link statistics for both precoding schemes: SINR CDFs,
//! overall outage, sum capacity and average BER.
//!
//! The per-link CDFs are composed into system metrics through the
//! independence of links. The specialised closed forms of the composed
//! metrics are kept behind [`AnalyticOptions::as_printed`] for comparison.

mod capacity;
mod cdf;

use std::f64::consts::PI;
use std::sync::OnceLock;

pub use capacity::{
    capacity_from_survival, capacity_r1, capacity_r1_as_printed, capacity_r1_closed_form, capacity_r2,
    CAPACITY_ABS_TOL,
};
pub use cdf::{
    cdf_lemma1, cdf_lemma2_approx, cdf_lemma2_exact, erlang_survival, mixed_gamma_density, survival_lemma1, CdfParams,
    CdfValue,
};

use crate::quad::{integrate_to_infinity, GaussLaguerre, Tolerance};
use crate::{Error, Link, Result, Scheme, SystemConfig};

/// Switches between the default evaluation paths and their alternatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyticOptions {
    /// Use the exact two-interferer CDF for BF MUEs instead of the
    /// mean-substitution approximation.
    pub exact_bf_cdf: bool,
    /// Use the specialised closed forms for outage, capacity and BER.
    pub as_printed: bool,
}

// SINR that is identically 0 (no signal power) or +inf (no interference).
fn zero_sinr_survival(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn infinite_sinr(link: Link) -> Error {
    Error::InfiniteSinr { link: format!("{link} (interference-free with noise excluded)") }
}

fn ic_mue_order(cfg: &SystemConfig) -> Result<u32> {
    if cfg.n_b < cfg.k + cfg.m {
        return Err(Error::InvalidConfig(format!(
            "IC needs n_b >= k + m (n_b = {}, k = {}, m = {})",
            cfg.n_b, cfg.k, cfg.m
        )));
    }
    Ok((cfg.n_b - cfg.k - cfg.m + 1) as u32)
}

fn check_threshold(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("SINR threshold must be non-negative, got {x}")));
    }
    Ok(())
}

/// `P(SINR >= x)` for an IC link.
pub fn ic_survival(link: Link, x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_threshold(x)?;
    let (p_m, p_r) = (cfg.p_m, cfg.p_r);
    match link {
        Link::Mue => {
            let l = ic_mue_order(cfg)?;
            if p_m == 0.0 {
                Ok(zero_sinr_survival(x))
            } else if p_r == 0.0 {
                Ok(1.0)
            } else {
                survival_lemma1(x, &CdfParams::new(p_r / p_m, 0.0, l, cfg.m as u32)?)
            }
        }
        Link::Rue => {
            if p_r == 0.0 {
                Ok(zero_sinr_survival(x))
            } else {
                Ok((-x / p_r).exp())
            }
        }
    }
}

/// `P(SINR >= x)` for a BF link. The MUE uses the mean-substitution
/// approximation unless `opts.exact_bf_cdf` is set.
pub fn bf_survival(link: Link, x: f64, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    check_threshold(x)?;
    let (p_m, p_r) = (cfg.p_m, cfg.p_r);
    let (k, m) = (cfg.k as u32, cfg.m as u32);
    match link {
        Link::Mue => {
            let l = cfg.n_b as u32;
            if p_m == 0.0 {
                return Ok(zero_sinr_survival(x));
            }
            if k == 1 {
                if p_r == 0.0 {
                    return Ok(1.0);
                }
                return survival_lemma1(x, &CdfParams::new(p_r / p_m, 0.0, l, m)?);
            }
            if p_r == 0.0 {
                // only the other MUE beams interfere
                return survival_lemma1(x, &CdfParams::new(1.0, 0.0, l, k - 1)?);
            }
            let p = CdfParams::with_n(p_r / p_m, 1.0, l, m, k - 1)?;
            if opts.exact_bf_cdf {
                Ok(1.0 - cdf_lemma2_exact(x, &p)?)
            } else {
                Ok(1.0 - cdf_lemma2_approx(x, &p)?.value)
            }
        }
        Link::Rue => {
            if p_r == 0.0 {
                Ok(zero_sinr_survival(x))
            } else {
                Ok((-x / p_r - k as f64 * (x * p_m / p_r).ln_1p()).exp())
            }
        }
    }
}

/// `P(SINR >= x)` for one link, dispatched through the scheme registry.
/// MUE links are interference-limited, RUE links keep the unit noise term.
pub fn survival_sinr(scheme: Scheme, link: Link, x: f64, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    scheme.strategy().survival(link, x, cfg, opts)
}

/// CDF of one link's SINR, dispatched on scheme and link type.
pub fn cdf_sinr(scheme: Scheme, link: Link, x: f64, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    Ok((1.0 - survival_sinr(scheme, link, x, cfg, opts)?).clamp(0.0, 1.0))
}

/// `1 - S_MUE^K S_RUE^M` evaluated without cancellation near 0.
fn compose_outage(s_mue: f64, s_rue: f64, cfg: &SystemConfig) -> f64 {
    if s_mue <= 0.0 || s_rue <= 0.0 {
        return 1.0;
    }
    let ln_joint = cfg.k as f64 * s_mue.ln() + cfg.m as f64 * s_rue.ln();
    (-ln_joint.exp_m1()).clamp(0.0, 1.0)
}

/// Probability that the weakest of the `K + M` links falls below `x`.
pub fn min_sinr_cdf(scheme: Scheme, x: f64, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    if opts.as_printed {
        return min_sinr_cdf_as_printed(scheme, x, cfg);
    }
    let s_mue = survival_sinr(scheme, Link::Mue, x, cfg, opts)?;
    let s_rue = survival_sinr(scheme, Link::Rue, x, cfg, opts)?;
    Ok(compose_outage(s_mue, s_rue, cfg))
}

/// Specialised closed-form outage. The IC form coincides with the
/// composition; the BF form raises the bracket `e^(-x/P_R)(x/a + 1)` to the
/// power `-KM` literally, so it is not confined to `[0, 1]`.
pub fn min_sinr_cdf_as_printed(scheme: Scheme, x: f64, cfg: &SystemConfig) -> Result<f64> {
    let (p_m, p_r) = (cfg.p_m, cfg.p_r);
    if !(p_m > 0.0 && p_r > 0.0) {
        return Err(Error::Domain("closed-form outage need P_M > 0 and P_R > 0".into()));
    }
    let a = p_r / p_m;
    let (k, m) = (cfg.k as f64, cfg.m as f64);
    match scheme {
        Scheme::Ic => {
            let s = survival_lemma1(x, &CdfParams::new(a, 0.0, ic_mue_order(cfg)?, cfg.m as u32)?)?;
            Ok(1.0 - s.powf(k) * (-m * x / p_r).exp())
        }
        Scheme::Bf => {
            let s = survival_lemma1(x, &CdfParams::new(a, k - 1.0, cfg.n_b as u32, cfg.m as u32)?)?;
            let bracket = (-x / p_r).exp() * (x / a + 1.0);
            Ok(1.0 - s.powf(k) * bracket.powf(-k * m))
        }
    }
}

/// Overall outage probability at `cfg.gamma_th`.
pub fn outage_overall(scheme: Scheme, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    cfg.validate()?;
    min_sinr_cdf(scheme, cfg.gamma_th, cfg, opts)
}

/// Ergodic capacity of an IC link in bits/s/Hz.
pub fn ic_capacity(link: Link, cfg: &SystemConfig) -> Result<f64> {
    let (p_m, p_r) = (cfg.p_m, cfg.p_r);
    match link {
        Link::Mue => {
            let l = ic_mue_order(cfg)?;
            if p_m == 0.0 {
                Ok(0.0)
            } else if p_r == 0.0 {
                Err(infinite_sinr(link))
            } else {
                capacity_r1(p_r / p_m, 0.0, l, cfg.m as u32)
            }
        }
        Link::Rue => {
            if p_r == 0.0 {
                Ok(0.0)
            } else {
                capacity_r2(p_r)
            }
        }
    }
}

/// Ergodic capacity of a BF link in bits/s/Hz.
pub fn bf_capacity(link: Link, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    let (p_m, p_r) = (cfg.p_m, cfg.p_r);
    let (k, m) = (cfg.k as u32, cfg.m as u32);
    match link {
        Link::Mue => {
            if p_m == 0.0 {
                return Ok(0.0);
            }
            if p_r == 0.0 && k == 1 {
                return Err(infinite_sinr(link));
            }
            if opts.exact_bf_cdf && k > 1 && p_r > 0.0 {
                return capacity_from_survival(|z| bf_survival(Link::Mue, z, cfg, opts));
            }
            if p_r == 0.0 {
                return capacity_r1(1.0, 0.0, cfg.n_b as u32, k - 1);
            }
            capacity_r1(p_r / p_m, (k - 1) as f64, cfg.n_b as u32, m)
        }
        Link::Rue => {
            if p_r == 0.0 {
                Ok(0.0)
            } else if p_m == 0.0 {
                capacity_r2(p_r)
            } else {
                capacity_r1(p_m / p_r, 1.0 / p_r, 1, k)
            }
        }
    }
}

/// Ergodic capacity of one link, dispatched through the scheme registry.
pub fn link_capacity(scheme: Scheme, link: Link, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    scheme.strategy().link_capacity(link, cfg, opts)
}

/// Sum capacity over `K` MUEs and `M` RUEs.
pub fn sum_capacity(scheme: Scheme, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    cfg.validate()?;
    if opts.as_printed {
        return sum_capacity_as_printed(scheme, cfg);
    }
    let mue = link_capacity(scheme, Link::Mue, cfg, opts)?;
    let rue = link_capacity(scheme, Link::Rue, cfg, opts)?;
    Ok(cfg.k as f64 * mue + cfg.m as f64 * rue)
}

// The specialised closed form where it is defined, quadrature otherwise.
fn r1_printed_or_quadrature(a: f64, b: f64, l: u32, m: u32) -> Result<f64> {
    if b > 0.0 && a != 1.0 {
        capacity_r1_as_printed(a, b, l, m)
    } else {
        capacity_r1(a, b, l, m)
    }
}

/// Closed-form sum capacity: one MUE term plus one RUE term, with the IC
/// MUE order `n_b - m`.
pub fn sum_capacity_as_printed(scheme: Scheme, cfg: &SystemConfig) -> Result<f64> {
    let (p_m, p_r) = (cfg.p_m, cfg.p_r);
    if !(p_m > 0.0 && p_r > 0.0) {
        return Err(Error::Domain("closed-form capacity need P_M > 0 and P_R > 0".into()));
    }
    let (k, m) = (cfg.k as u32, cfg.m as u32);
    match scheme {
        Scheme::Ic => {
            let l = (cfg.n_b - cfg.m) as u32;
            Ok(r1_printed_or_quadrature(p_r / p_m, 0.0, l, m)? + capacity_r2(p_r)?)
        }
        Scheme::Bf => Ok(r1_printed_or_quadrature(p_r / p_m, (k - 1) as f64, cfg.n_b as u32, m)?
            + r1_printed_or_quadrature(p_m / p_r, 1.0 / p_r, 1, k)?),
    }
}

fn laguerre_rules() -> &'static (GaussLaguerre, GaussLaguerre) {
    static RULES: OnceLock<(GaussLaguerre, GaussLaguerre)> = OnceLock::new();
    RULES.get_or_init(|| {
        (
            GaussLaguerre::new(64, -0.5).expect("64-node rule"),
            GaussLaguerre::new(128, -0.5).expect("128-node rule"),
        )
    })
}

/// Agreement required between the 64- and 128-node rules before the
/// adaptive fallback is skipped.
pub const BER_RULE_AGREEMENT: f64 = 1e-11;

/// `(1 / (2 n_links sqrt(pi))) int_0^inf e^-z z^(-1/2) P(z) dz` for BPSK.
///
/// Generalized Gauss–Laguerre with 64 and 128 nodes. The integral is redone
/// adaptively after `z = u^2` when the rules disagree or when `P` still moves
/// below the first node, where neither rule can see it.
pub fn ber_integral<F: FnMut(f64) -> Result<f64>>(mut p_min: F, n_links: usize) -> Result<f64> {
    if n_links == 0 {
        return Err(Error::InvalidConfig("BER needs at least one link".into()));
    }
    let norm = 1.0 / (2.0 * n_links as f64 * PI.sqrt());
    let (g64, g128) = laguerre_rules();
    let mut eval = |rule: &GaussLaguerre| -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * p_min(*x)?;
        }
        Ok(acc)
    };
    let coarse = eval(g64)?;
    let fine = eval(g128)?;
    let z0 = g128.nodes[0];
    let unresolved = (p_min(z0)? - p_min(z0 * 1e-3)?).abs() > BER_RULE_AGREEMENT;
    if !unresolved && (coarse - fine).abs() <= BER_RULE_AGREEMENT {
        return Ok(norm * fine);
    }
    let mut failure = None;
    let r = integrate_to_infinity(
        |u| {
            let z = u * u;
            match p_min(z) {
                Ok(p) => 2.0 * (-z).exp() * p,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        Tolerance::new(1e-13, 1e-12),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(norm * r.value)
}

/// Average BER of BPSK dominated by the weakest link.
pub fn average_ber(scheme: Scheme, cfg: &SystemConfig, opts: &AnalyticOptions) -> Result<f64> {
    cfg.validate()?;
    ber_integral(|z| min_sinr_cdf(scheme, z, cfg, opts), cfg.k + cfg.m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_b: usize, m: usize, k: usize, p_m: f64, p_r: f64) -> SystemConfig {
        SystemConfig::new(n_b, m, k, p_m, p_r).unwrap()
    }

    const OPTS: AnalyticOptions = AnalyticOptions { exact_bf_cdf: false, as_printed: false };

    #[test]
    fn rue_examples() {
        let c = cfg(4, 1, 1, 1.0, 1.0);
        let v = cdf_sinr(Scheme::Ic, Link::Rue, 2f64.ln(), &c, &OPTS).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = cdf_sinr(Scheme::Bf, Link::Rue, 1.0, &c, &OPTS).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn outage_limits() {
        for scheme in [Scheme::Ic, Scheme::Bf] {
            let c = cfg(6, 3, 1, 1.0, 1.0).with_gamma_th(0.0);
            assert_eq!(outage_overall(scheme, &c, &OPTS).unwrap(), 0.0);
            let c = c.with_gamma_th(1e9);
            assert!(outage_overall(scheme, &c, &OPTS).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn as_printed_ic_outage_matches_composition() {
        let opts = AnalyticOptions { as_printed: true, ..OPTS };
        for g in [0.1, 1.0, 3.0] {
            let c = cfg(7, 2, 2, 2.0, 0.5).with_gamma_th(g);
            let a = outage_overall(Scheme::Ic, &c, &OPTS).unwrap();
            let b = outage_overall(Scheme::Ic, &c, &opts).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ber_weight_normalisation() {
        for links in [1usize, 3, 7] {
            let v = ber_integral(|_| Ok(1.0), links).unwrap();
            assert!((v - 1.0 / (2.0 * links as f64)).abs() < 1e-10);
            assert_eq!(ber_integral(|_| Ok(0.0), links).unwrap(), 0.0);
        }
    }

    #[test]
    fn ber_falls_back_on_sharp_integrands() {
        // P(z) = 1 - e^(-z/s) with tiny s: exact integral is 1 - 1/sqrt(1 + 1/s)
        let s = 1e-4;
        let v = ber_integral(|z| Ok(-(-z / s).exp_m1()), 1).unwrap();
        let want = 0.5 * (1.0 - 1.0 / (1.0 + 1.0 / s).sqrt());
        assert!((v - want).abs() < 1e-11, "{v} vs {want}");
    }

    #[test]
    fn ic_mue_term_depends_only_on_ratio() {
        let a = link_capacity(Scheme::Ic, Link::Mue, &cfg(6, 2, 1, 1.0, 0.3), &OPTS).unwrap();
        let b = link_capacity(Scheme::Ic, Link::Mue, &cfg(6, 2, 1, 40.0, 12.0), &OPTS).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ic_rue_capacity_is_r2() {
        let c = cfg(6, 2, 1, 1.0, 1.0);
        let v = link_capacity(Scheme::Ic, Link::Rue, &c, &OPTS).unwrap();
        assert!((v - 0.860_347_382_270_885_9).abs() < 1e-12);
    }

    #[test]
    fn ic_outage_non_increasing_in_antennas() {
        let mut prev = 1.0;
        for n_b in 5..=11 {
            let v = outage_overall(Scheme::Ic, &cfg(n_b, 3, 2, 1.0, 0.5), &OPTS).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn degenerate_powers() {
        let c = cfg(6, 2, 2, 0.0, 1.0).with_gamma_th(0.5);
        assert_eq!(cdf_sinr(Scheme::Bf, Link::Mue, 0.5, &c, &OPTS).unwrap(), 1.0);
        assert_eq!(link_capacity(Scheme::Ic, Link::Mue, &c, &OPTS).unwrap(), 0.0);
        let c = cfg(6, 2, 1, 1.0, 0.0);
        assert!(matches!(link_capacity(Scheme::Ic, Link::Mue, &c, &OPTS), Err(Error::InfiniteSinr { .. })));
        assert_eq!(cdf_sinr(Scheme::Ic, Link::Rue, 0.5, &c, &OPTS).unwrap(), 1.0);
    }
}
