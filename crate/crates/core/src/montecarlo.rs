//! Monte Carlo estimation of every analytic metric.
//!
//! Trial `t` draws its channel from substream `t` of the plan's seed, so a
//! run is reproducible regardless of how batches are scheduled. Batches are
//! reduced in batch order with a pairwise mean/variance merge.

use rayon::prelude::*;

use crate::channel::{draw_channel, RngStream, SystemConfig};
use crate::precoder::{LinkGains, PrecoderSet};
use crate::special::q_function;
use crate::{Error, Link, Result, Scheme};

/// Resampling attempts for one trial before giving up.
const MAX_RESAMPLES: u64 = 64;
const RESAMPLE_SEED_STEP: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub trials: u64,
    pub base_seed: u64,
    pub batch_size: u64,
}

impl TrialPlan {
    pub fn new(trials: u64, base_seed: u64) -> Self {
        TrialPlan { trials, base_seed, batch_size: 4096 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("trials and batch_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_err: f64,
    pub trials: u64,
    /// Degenerate draws that were replaced by fresh ones.
    pub discarded: u64,
}

impl MetricEstimate {
    /// `|value - reference|` measured in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if d == 0.0 {
            0.0
        } else if self.std_err == 0.0 {
            f64::INFINITY
        } else {
            d / self.std_err
        }
    }

    /// For a proportion: the binomial standard error at the reference
    /// probability `p`. A sample that saturates at 0 or 1 has zero empirical
    /// spread, so its own standard error cannot be used to test against `p`.
    pub fn with_binomial_std_err(self, p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        MetricEstimate { std_err: (p * (1.0 - p) / self.trials as f64).sqrt(), ..self }
    }

    /// Whether `reference` lies within `k` standard errors.
    pub fn agrees(&self, reference: f64, k: f64) -> bool {
        self.z_score(reference) <= k
    }
}

/// Simulation switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct McOptions {
    /// Keep the unit noise term in MUE SINRs as well.
    pub include_noise: bool,
}

/// Per-link SINRs where a zero denominator yields `+inf` rather than an
/// error; Monte Carlo treats such links as never in outage.
pub fn sinrs_lenient(g: &LinkGains, p_m: f64, p_r: &[f64], include_noise: bool) -> (Vec<f64>, Vec<f64>) {
    let noise = if include_noise { 1.0 } else { 0.0 };
    let mue = (0..g.k())
        .map(|k| {
            let s = p_m * g.desired[k];
            let d = p_m * g.mue_intra[k] + g.rrh_interference(k, p_r) + noise;
            if s == 0.0 {
                0.0
            } else if d == 0.0 {
                f64::INFINITY
            } else {
                s / d
            }
        })
        .collect();
    let rue = (0..g.m()).map(|i| p_r[i] * g.rue_direct[i] / (p_m * g.rue_mbs[i] + 1.0)).collect();
    (mue, rue)
}

/// Draws trial `t` and returns its link gains, resampling degenerate draws.
/// The second value counts the resamples.
pub fn trial_gains(scheme: Scheme, cfg: &SystemConfig, base_seed: u64, t: u64) -> Result<(LinkGains, u64)> {
    for attempt in 0..MAX_RESAMPLES {
        let seed = base_seed.wrapping_add(attempt.wrapping_mul(RESAMPLE_SEED_STEP));
        let chan = draw_channel(cfg, &mut RngStream::new(seed, t));
        match PrecoderSet::build(scheme, &chan) {
            Ok(prec) => return Ok((LinkGains::new(&chan, &prec), attempt)),
            Err(Error::DegenerateChannel(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numerical(format!("trial {t}: {MAX_RESAMPLES} degenerate draws in a row")))
}

/// Metrics gathered from each trial in one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum Stat {
    /// Indicator that the weakest link is below `gamma_th`.
    Outage,
    /// Sum over links of `log2(1 + SINR)`.
    SumCapacity,
    /// `Q(sqrt(2 gamma_e)) / (K + M)` with `gamma_e` the weakest SINR.
    Ber,
    /// Fraction of MUE links below `gamma_th`.
    MueCdf,
    /// Fraction of RUE links below `gamma_th`.
    RueCdf,
    /// Mean MUE `log2(1 + SINR)`.
    MueCapacity,
    /// Mean RUE `log2(1 + SINR)`.
    RueCapacity,
}

pub const N_STATS: usize = 7;

impl Stat {
    pub const ALL: [Stat; N_STATS] = [
        Stat::Outage,
        Stat::SumCapacity,
        Stat::Ber,
        Stat::MueCdf,
        Stat::RueCdf,
        Stat::MueCapacity,
        Stat::RueCapacity,
    ];
}

/// Streaming mean and centred second moment, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchTotals {
    stats: [Moments; N_STATS],
    discarded: u64,
}

impl BatchTotals {
    fn merge(mut self, other: BatchTotals) -> BatchTotals {
        for i in 0..N_STATS {
            self.stats[i] = self.stats[i].merge(other.stats[i]);
        }
        self.discarded += other.discarded;
        self
    }
}

/// Estimates of every metric from one simulation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    estimates: [MetricEstimate; N_STATS],
}

impl SimulationSummary {
    pub fn get(&self, stat: Stat) -> MetricEstimate {
        self.estimates[stat as usize]
    }

    pub fn outage(&self) -> MetricEstimate {
        self.get(Stat::Outage)
    }

    pub fn capacity(&self) -> MetricEstimate {
        self.get(Stat::SumCapacity)
    }

    pub fn ber(&self) -> MetricEstimate {
        self.get(Stat::Ber)
    }

    pub fn link_cdf(&self, link: Link) -> MetricEstimate {
        self.get(match link {
            Link::Mue => Stat::MueCdf,
            Link::Rue => Stat::RueCdf,
        })
    }

    pub fn link_capacity(&self, link: Link) -> MetricEstimate {
        self.get(match link {
            Link::Mue => Stat::MueCapacity,
            Link::Rue => Stat::RueCapacity,
        })
    }
}

fn trial_stats(mue: &[f64], rue: &[f64], gamma_th: f64) -> [f64; N_STATS] {
    let links = (mue.len() + rue.len()) as f64;
    let gamma_e = mue.iter().chain(rue).copied().fold(f64::INFINITY, f64::min);
    let cap = |v: &[f64]| v.iter().map(|g| g.ln_1p()).sum::<f64>() / std::f64::consts::LN_2;
    let below = |v: &[f64]| v.iter().filter(|g| **g < gamma_th).count() as f64 / v.len() as f64;
    let (mue_cap, rue_cap) = (cap(mue), cap(rue));
    [
        if gamma_e < gamma_th { 1.0 } else { 0.0 },
        mue_cap + rue_cap,
        q_function((2.0 * gamma_e).sqrt()) / links,
        below(mue),
        below(rue),
        mue_cap / mue.len() as f64,
        rue_cap / rue.len() as f64,
    ]
}

/// Runs `plan.trials` trials and estimates every metric at `cfg.gamma_th`.
pub fn simulate(scheme: Scheme, cfg: &SystemConfig, plan: &TrialPlan, opts: &McOptions) -> Result<SimulationSummary> {
    cfg.validate()?;
    plan.validate()?;
    let p_r = cfg.common_rrh_powers();
    let n_batches = plan.trials.div_ceil(plan.batch_size);
    let batches: Vec<BatchTotals> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = BatchTotals::default();
            let start = b * plan.batch_size;
            let end = (start + plan.batch_size).min(plan.trials);
            for t in start..end {
                let (gains, resamples) = trial_gains(scheme, cfg, plan.base_seed, t)?;
                acc.discarded += resamples;
                let (mue, rue) = sinrs_lenient(&gains, cfg.p_m, &p_r, opts.include_noise);
                for (m, x) in acc.stats.iter_mut().zip(trial_stats(&mue, &rue, cfg.gamma_th)) {
                    m.push(x);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = pairwise(&batches);
    let estimates = std::array::from_fn(|i| {
        let m = total.stats[i];
        let var = if m.n > 1 { m.m2 / (m.n - 1) as f64 } else { 0.0 };
        MetricEstimate { value: m.mean, std_err: (var / m.n as f64).sqrt(), trials: m.n, discarded: total.discarded }
    });
    Ok(SimulationSummary { estimates })
}

// Pairwise merge over batch index: the reduction tree depends only on the
// number of batches.
fn pairwise(batches: &[BatchTotals]) -> BatchTotals {
    match batches.len() {
        0 => BatchTotals::default(),
        1 => batches[0],
        n => pairwise(&batches[..n / 2]).merge(pairwise(&batches[n / 2..])),
    }
}

/// Fraction of trials whose weakest link is below `cfg.gamma_th`.
pub fn estimate_outage(scheme: Scheme, cfg: &SystemConfig, plan: &TrialPlan) -> Result<MetricEstimate> {
    Ok(simulate(scheme, cfg, plan, &McOptions::default())?.outage())
}

/// Mean sum over links of `log2(1 + SINR)`.
pub fn estimate_capacity(scheme: Scheme, cfg: &SystemConfig, plan: &TrialPlan) -> Result<MetricEstimate> {
    Ok(simulate(scheme, cfg, plan, &McOptions::default())?.capacity())
}

/// Mean of `Q(sqrt(2 gamma_e)) / (K + M)`.
pub fn estimate_ber(scheme: Scheme, cfg: &SystemConfig, plan: &TrialPlan) -> Result<MetricEstimate> {
    Ok(simulate(scheme, cfg, plan, &McOptions::default())?.ber())
}

/// Every SINR of the given link class over all trials, in trial order.
pub fn sample_link_sinrs(
    scheme: Scheme,
    link: Link,
    cfg: &SystemConfig,
    plan: &TrialPlan,
    opts: &McOptions,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    plan.validate()?;
    let p_r = cfg.common_rrh_powers();
    let per_batch: Vec<Vec<f64>> = (0..plan.trials.div_ceil(plan.batch_size))
        .into_par_iter()
        .map(|b| {
            let start = b * plan.batch_size;
            let end = (start + plan.batch_size).min(plan.trials);
            let mut out = Vec::new();
            for t in start..end {
                let (gains, _) = trial_gains(scheme, cfg, plan.base_seed, t)?;
                let (mue, rue) = sinrs_lenient(&gains, cfg.p_m, &p_r, opts.include_noise);
                out.extend(match link {
                    Link::Mue => mue,
                    Link::Rue => rue,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_batch.concat())
}

/// Empirical `P(SINR < z)` of the given link class at every grid point,
/// pooling all links of that class.
pub fn empirical_cdf(scheme: Scheme, link: Link, cfg: &SystemConfig, plan: &TrialPlan, grid: &[f64]) -> Result<Vec<f64>> {
    let mut samples = sample_link_sinrs(scheme, link, cfg, plan, &McOptions::default())?;
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    Ok(grid.iter().map(|z| samples.partition_point(|s| s < z) as f64 / n).collect())
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &[f64], mut cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, x)| {
        let f = cdf(*x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(trials: u64) -> TrialPlan {
        TrialPlan { trials, base_seed: 2024, batch_size: 256 }
    }

    #[test]
    fn saturated_proportion_uses_binomial_error() {
        let e = MetricEstimate { value: 1.0, std_err: 0.0, trials: 10_000, discarded: 0 };
        assert!(e.z_score(0.9999).is_infinite());
        let b = e.with_binomial_std_err(0.9999);
        assert!((b.std_err - (0.9999f64 * 1e-4 / 1e4).sqrt()).abs() < 1e-15);
        assert!(b.agrees(0.9999, 3.0));
        assert!(!e.with_binomial_std_err(0.99).agrees(0.99, 3.0));
    }

    #[test]
    fn zero_threshold_gives_zero_outage() {
        let cfg = SystemConfig::new(6, 2, 1, 1.0, 1.0).unwrap().with_gamma_th(0.0);
        let e = estimate_outage(Scheme::Ic, &cfg, &plan(2000)).unwrap();
        assert_eq!((e.value, e.std_err), (0.0, 0.0));
    }

    #[test]
    fn deterministic_and_batch_independent() {
        let cfg = SystemConfig::new(6, 3, 2, 1.0, 0.5).unwrap();
        let a = simulate(Scheme::Bf, &cfg, &plan(3000), &McOptions::default()).unwrap();
        let b = simulate(Scheme::Bf, &cfg, &plan(3000), &McOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = simulate(Scheme::Bf, &cfg, &TrialPlan { batch_size: 1000, ..plan(3000) }, &McOptions::default())
            .unwrap();
        for s in Stat::ALL {
            assert!((a.get(s).value - c.get(s).value).abs() <= 1e-12 * a.get(s).value.abs().max(1.0));
        }
    }

    #[test]
    fn zero_powers() {
        let cfg = SystemConfig::new(4, 1, 1, 0.0, 0.0).unwrap();
        let s = simulate(Scheme::Bf, &cfg, &plan(500), &McOptions { include_noise: true }).unwrap();
        assert_eq!(s.capacity().value, 0.0);
        assert!((s.ber().value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ber_within_q_range() {
        let cfg = SystemConfig::new(6, 2, 1, 1.0, 1.0).unwrap();
        let e = estimate_ber(Scheme::Ic, &cfg, &plan(2000)).unwrap();
        assert!(e.value > 0.0 && e.value < 0.5 / 3.0);
    }

    #[test]
    fn std_err_shrinks_with_trials() {
        let cfg = SystemConfig::new(6, 2, 1, 10.0, 1.0).unwrap();
        let a = estimate_capacity(Scheme::Bf, &cfg, &plan(20_000)).unwrap();
        let b = estimate_capacity(Scheme::Bf, &cfg, &plan(40_000)).unwrap();
        let ratio = b.std_err / a.std_err;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.2 * std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn empirical_cdf_shape() {
        let cfg = SystemConfig::new(6, 3, 1, 1.0, 1.0).unwrap();
        let grid = [0.0, 0.1, 0.5, 1.0, 3.0, 10.0];
        let f = empirical_cdf(Scheme::Ic, Link::Mue, &cfg, &plan(2000), &grid).unwrap();
        assert_eq!(f[0], 0.0);
        assert!(f.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn ks_of_exact_uniform_grid() {
        let n = 1000;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&s, |x| x) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..101).map(|i| ((i * 37) % 17) as f64 * 0.3).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|x| whole.push(*x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..40].iter().for_each(|x| a.push(*x));
        xs[40..].iter().for_each(|x| b.push(*x));
        let m = a.merge(b);
        assert!((m.mean - whole.mean).abs() < 1e-12 && (m.m2 - whole.m2).abs() < 1e-9);
    }
}
