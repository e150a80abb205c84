//! Experiment descriptions: base scenario, one sweep axis, metrics, schemes
//! and the trial plan.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hcran::analytic::AnalyticOptions;
use hcran::montecarlo::TrialPlan;
use hcran::{Scheme, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::metrics;

/// Parameter varied across the rows of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Outage threshold in dB.
    #[serde(rename = "gamma_th")]
    GammaTh,
    /// MBS antenna count.
    #[serde(rename = "n_b")]
    NB,
    /// Per-antenna MBS transmit power in dB over unit noise.
    #[serde(rename = "mbs_snr_db")]
    MbsSnrDb,
    /// Common per-RRH power cap, linear.
    #[serde(rename = "p_rs_i")]
    PRsI,
    /// Total RRH power budget, linear.
    #[serde(rename = "p_rs")]
    PRs,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [SweepAxis::GammaTh, SweepAxis::NB, SweepAxis::MbsSnrDb, SweepAxis::PRsI, SweepAxis::PRs];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::GammaTh => "gamma_th",
            SweepAxis::NB => "n_b",
            SweepAxis::MbsSnrDb => "mbs_snr_db",
            SweepAxis::PRsI => "p_rs_i",
            SweepAxis::PRs => "p_rs",
        }
    }

    /// How a sweep value maps onto the scenario, for output headers.
    pub fn meaning(self) -> &'static str {
        match self {
            SweepAxis::GammaTh => "outage threshold in dB; gamma_th = 10^(v/10)",
            SweepAxis::NB => "MBS antenna count",
            SweepAxis::MbsSnrDb => {
                "per-antenna MBS transmit power in dB relative to unit receiver noise; \
                 p_m = p_ms = 10^(v/10) with p_r fixed"
            }
            SweepAxis::PRsI => "common per-RRH power cap p_rs_i (linear)",
            SweepAxis::PRs => "total RRH power budget p_rs (linear)",
        }
    }

    /// Scenario at sweep value `v`.
    pub fn apply(self, base: &SystemConfig, v: f64) -> Result<SystemConfig> {
        if !v.is_finite() {
            return Err(CliError::Invalid(format!("{} value {v} is not finite", self.name())));
        }
        let mut cfg = base.clone();
        match self {
            SweepAxis::GammaTh => cfg.gamma_th = db_to_linear(v),
            SweepAxis::NB => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::Invalid(format!("n_b must be a positive integer, got {v}")));
                }
                cfg.n_b = v as usize;
            }
            SweepAxis::MbsSnrDb => {
                cfg.p_m = db_to_linear(v);
                cfg.p_ms = cfg.p_m;
            }
            SweepAxis::PRsI => cfg.p_rs_i = vec![v; cfg.m],
            SweepAxis::PRs => cfg.p_rs = v,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| CliError::Invalid(format!("unknown sweep axis `{s}`")))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parses `axis=start:step:stop` (inclusive) or `axis=v1,v2,...`.
pub fn parse_sweep(text: &str) -> Result<(SweepAxis, Vec<f64>)> {
    let (axis, values) = text
        .split_once('=')
        .ok_or_else(|| CliError::Invalid(format!("sweep `{text}` is not of the form axis=values")))?;
    let axis: SweepAxis = axis.parse()?;
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Invalid(format!("`{s}` is not a number in sweep `{text}`")))
    };
    let values = if values.contains(':') {
        let parts: Vec<&str> = values.split(':').collect();
        let [start, step, stop] = parts[..] else {
            return Err(CliError::Invalid(format!("range `{values}` needs start:step:stop")));
        };
        let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
        if !(step > 0.0) || !step.is_finite() || stop < start {
            return Err(CliError::Invalid(format!("range `{values}` needs step > 0 and stop >= start")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        values.split(',').filter(|s| !s.trim().is_empty()).map(number).collect::<Result<Vec<_>>>()?
    };
    Ok((axis, values))
}

/// A complete experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Registered metric names, in output order.
    pub metrics: Vec<String>,
    pub schemes: Vec<Scheme>,
    pub plan: TrialPlan,
    /// Random channel draws per sweep point for the power allocation metrics.
    pub crra_instances: usize,
    pub analytic: AnalyticOptions,
    pub include_noise: bool,
}

impl ExperimentSpec {
    pub fn new(base: SystemConfig, axis: SweepAxis, values: Vec<f64>) -> Self {
        ExperimentSpec {
            base,
            axis,
            values,
            metrics: vec!["outage".into()],
            schemes: Scheme::ALL.to_vec(),
            plan: TrialPlan::new(100_000, 1),
            crra_instances: 50,
            analytic: AnalyticOptions::default(),
            include_noise: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(CliError::Invalid(msg.into()));
        if self.values.is_empty() {
            return bad("the sweep has no values");
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sweep values must be strictly increasing");
        }
        if self.metrics.is_empty() {
            return bad("no metrics selected");
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected");
        }
        for (i, name) in self.metrics.iter().enumerate() {
            metrics::lookup(name)?;
            if self.metrics[..i].contains(name) {
                return Err(CliError::Invalid(format!("metric `{name}` listed twice")));
            }
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(CliError::Invalid(format!("scheme `{s}` listed twice")));
            }
        }
        if self.pairs().is_empty() {
            return bad("no selected metric applies to a selected scheme");
        }
        if self.uses_crra() && self.crra_instances == 0 {
            return bad("crra_instances must be positive");
        }
        self.plan.validate()?;
        self.base.validate()?;
        for &v in &self.values {
            self.axis.apply(&self.base, v)?;
        }
        Ok(())
    }

    /// `(scheme, metric)` pairs evaluated at every sweep point, scheme-major.
    pub fn pairs(&self) -> Vec<(Scheme, &'static dyn metrics::MetricStrategy)> {
        let mut out = Vec::new();
        for &s in &self.schemes {
            for name in &self.metrics {
                if let Ok(m) = metrics::lookup(name) {
                    if m.applies_to(s) {
                        out.push((s, m));
                    }
                }
            }
        }
        out
    }

    pub fn uses_crra(&self) -> bool {
        self.metrics.iter().any(|m| m.starts_with("crra"))
    }
}

/// `[experiment]` section of a config file. Every field is optional so the
/// command line can fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub sweep: Option<String>,
    pub metrics: Option<Vec<String>>,
    pub schemes: Option<Vec<String>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub batch_size: Option<u64>,
    pub crra_instances: Option<usize>,
    pub exact_bf_cdf: Option<bool>,
    pub as_printed: Option<bool>,
    pub include_noise: Option<bool>,
    pub out: Option<PathBuf>,
    pub json: Option<bool>,
}

/// Config file: a `[system]` table mirroring [`SystemConfig`] and an optional
/// `[experiment]` table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub system: SystemConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ExperimentFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| hcran::Error::Parse(e.to_string()))?;
        file.system.validate()?;
        Ok(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }
}

pub fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>> {
    names.iter().map(|n| n.trim().parse::<Scheme>().map_err(CliError::from)).collect()
}
