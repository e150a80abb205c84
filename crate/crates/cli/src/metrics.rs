//! Metrics evaluated at each sweep point, registered by name.

use std::sync::OnceLock;

use hcran::analytic;
use hcran::channel::draw_channel;
use hcran::crra::{self, CrraProblem, PowerAllocation};
use hcran::montecarlo::{self, McOptions, MetricEstimate, SimulationSummary};
use hcran::{RngStream, Scheme, SystemConfig};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::experiment::ExperimentSpec;

/// Inputs shared by every metric at one sweep point and scheme. The Monte
/// Carlo pass is run at most once and reused by all simulation metrics.
pub struct PointContext<'a> {
    pub spec: &'a ExperimentSpec,
    pub cfg: SystemConfig,
    pub scheme: Scheme,
    simulation: OnceLock<hcran::Result<SimulationSummary>>,
}

impl<'a> PointContext<'a> {
    pub fn new(spec: &'a ExperimentSpec, cfg: SystemConfig, scheme: Scheme) -> Self {
        PointContext { spec, cfg, scheme, simulation: OnceLock::new() }
    }

    pub fn simulation(&self) -> Result<&SimulationSummary> {
        let opts = McOptions { include_noise: self.spec.include_noise };
        self.simulation
            .get_or_init(|| montecarlo::simulate(self.scheme, &self.cfg, &self.spec.plan, &opts))
            .as_ref()
            .map_err(|e| CliError::Core(e.clone()))
    }
}

/// One metric evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement {
    pub analytic: Option<f64>,
    pub estimate: Option<MetricEstimate>,
    /// Largest solver iteration count, for the power allocation metrics.
    pub iterations: Option<usize>,
}

pub trait MetricStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn applies_to(&self, scheme: Scheme) -> bool {
        let _ = scheme;
        true
    }

    fn evaluate(&self, ctx: &PointContext<'_>) -> Result<Measurement>;
}

impl std::fmt::Debug for dyn MetricStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MetricStrategy({})", self.name())
    }
}

struct Outage;

impl MetricStrategy for Outage {
    fn name(&self) -> &'static str {
        "outage"
    }

    fn description(&self) -> &'static str {
        "probability that the weakest link falls below gamma_th"
    }

    fn evaluate(&self, ctx: &PointContext<'_>) -> Result<Measurement> {
        let a = analytic::outage_overall(ctx.scheme, &ctx.cfg, &ctx.spec.analytic)?;
        Ok(Measurement {
            analytic: Some(a),
            estimate: Some(ctx.simulation()?.outage().with_binomial_std_err(a)),
            iterations: None,
        })
    }
}

struct Capacity;

impl MetricStrategy for Capacity {
    fn name(&self) -> &'static str {
        "capacity"
    }

    fn description(&self) -> &'static str {
        "ergodic sum capacity over all MUE and RUE links, bits/s/Hz"
    }

    fn evaluate(&self, ctx: &PointContext<'_>) -> Result<Measurement> {
        Ok(Measurement {
            analytic: Some(analytic::sum_capacity(ctx.scheme, &ctx.cfg, &ctx.spec.analytic)?),
            estimate: Some(ctx.simulation()?.capacity()),
            iterations: None,
        })
    }
}

struct Ber;

impl MetricStrategy for Ber {
    fn name(&self) -> &'static str {
        "ber"
    }

    fn description(&self) -> &'static str {
        "average BPSK bit error rate governed by the weakest link"
    }

    fn evaluate(&self, ctx: &PointContext<'_>) -> Result<Measurement> {
        Ok(Measurement {
            analytic: Some(analytic::average_ber(ctx.scheme, &ctx.cfg, &ctx.spec.analytic)?),
            estimate: Some(ctx.simulation()?.ber()),
            iterations: None,
        })
    }
}

/// Mean optimised RUE sum rate over random channel draws.
struct Crra {
    scheme: Scheme,
    name: &'static str,
}

impl MetricStrategy for Crra {
    fn name(&self) -> &'static str {
        self.name
    }

    fn description(&self) -> &'static str {
        match self.scheme {
            Scheme::Ic => "mean RUE sum rate of the IC power allocation, bits/s/Hz",
            Scheme::Bf => "mean RUE sum rate of the BF power allocation, bits/s/Hz",
        }
    }

    fn applies_to(&self, scheme: Scheme) -> bool {
        scheme == self.scheme
    }

    fn evaluate(&self, ctx: &PointContext<'_>) -> Result<Measurement> {
        let batch = solve_instances(&ctx.cfg, self.scheme, ctx.spec.plan.base_seed, ctx.spec.crra_instances)?;
        let n = batch.solved.len() as f64;
        let mean = batch.solved.iter().map(|s| s.rue_sum_rate).sum::<f64>() / n;
        let var = if n > 1.0 {
            batch.solved.iter().map(|s| (s.rue_sum_rate - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Measurement {
            analytic: None,
            estimate: Some(MetricEstimate {
                value: mean,
                std_err: (var / n).sqrt(),
                trials: batch.solved.len() as u64,
                discarded: batch.skipped,
            }),
            iterations: batch.solved.iter().map(|s| s.iterations).max(),
        })
    }
}

static OUTAGE: Outage = Outage;
static CAPACITY: Capacity = Capacity;
static BER: Ber = Ber;
static CRRA_IC: Crra = Crra { scheme: Scheme::Ic, name: "crra_ic" };
static CRRA_BF: Crra = Crra { scheme: Scheme::Bf, name: "crra_bf" };

static REGISTRY: [&dyn MetricStrategy; 5] = [&OUTAGE, &CAPACITY, &BER, &CRRA_IC, &CRRA_BF];

/// Every metric in registration order.
pub fn registered() -> &'static [&'static dyn MetricStrategy] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Result<&'static dyn MetricStrategy> {
    let key = name.trim().to_ascii_lowercase();
    REGISTRY
        .iter()
        .copied()
        .find(|m| m.name() == key)
        .ok_or_else(|| CliError::UnknownMetric(name.to_string()))
}

/// Power allocations over the feasible draws of a sweep point.
#[derive(Debug, Clone)]
pub struct CrraBatch {
    /// Allocations in instance order, with their substream indices.
    pub solved: Vec<PowerAllocation>,
    pub indices: Vec<u64>,
    /// Draws that were degenerate or could not meet the MUE rate floor.
    pub skipped: u64,
}

/// Draws `instances` channels from substreams `0..instances` of `seed` and
/// solves the feasible ones. Every sweep point reuses the same draws.
pub fn solve_instances(cfg: &SystemConfig, scheme: Scheme, seed: u64, instances: usize) -> Result<CrraBatch> {
    let results: Vec<Option<PowerAllocation>> = (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let chan = draw_channel(cfg, &mut RngStream::new(seed, i));
            let prob = match CrraProblem::new(cfg.clone(), chan, scheme) {
                Ok(p) => p,
                Err(hcran::Error::DegenerateChannel(_) | hcran::Error::EmptyNullSpace) => return Ok(None),
                Err(e) => return Err(CliError::Core(e)),
            };
            if !crra::check_feasibility(&prob) {
                return Ok(None);
            }
            Ok(Some(crra::solve(&prob)?))
        })
        .collect::<Result<_>>()?;
    let mut batch = CrraBatch { solved: Vec::new(), indices: Vec::new(), skipped: 0 };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Some(a) => {
                batch.solved.push(a);
                batch.indices.push(i as u64);
            }
            None => batch.skipped += 1,
        }
    }
    if batch.solved.is_empty() {
        return Err(CliError::Core(hcran::Error::Infeasible(format!(
            "none of the {instances} {scheme} draws can meet the MUE rate floor {} bits/s/Hz",
            cfg.r_ms
        ))));
    }
    Ok(batch)
}
