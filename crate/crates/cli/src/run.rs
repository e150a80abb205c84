//! Sweep execution. Points run concurrently; rows come back in sweep order.

use hcran::crra::OUTER_TOL;
use hcran::Scheme;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::{ExperimentSpec, SweepAxis};
use crate::metrics::{self, PointContext};

/// Agreement band between analytic value and simulation, in standard errors.
pub const AGREEMENT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub axis: SweepAxis,
    pub value: f64,
    pub scheme: Scheme,
    pub metric: &'static str,
    pub analytic: Option<f64>,
    pub monte_carlo: Option<f64>,
    pub std_err: Option<f64>,
    pub agree: Option<bool>,
    pub trials: u64,
    pub discarded: u64,
    pub iterations: Option<usize>,
    pub seed: u64,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub spec: ExperimentSpec,
    pub rows: Vec<Row>,
}

impl ResultTable {
    /// Rows for one scheme and metric, in sweep order.
    pub fn series(&self, scheme: Scheme, metric: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.scheme == scheme && r.metric == metric).collect()
    }
}

/// A failed run with every row computed before the first failing point.
#[derive(Debug)]
pub struct RunFailure {
    pub partial: ResultTable,
    pub error: CliError,
}

fn point_rows(spec: &ExperimentSpec, value: f64) -> Result<Vec<Row>> {
    let cfg = spec.axis.apply(&spec.base, value)?;
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        let ctx = PointContext::new(spec, cfg.clone(), scheme);
        for name in &spec.metrics {
            let metric = metrics::lookup(name)?;
            if !metric.applies_to(scheme) {
                continue;
            }
            let m = metric.evaluate(&ctx)?;
            let agree = match (m.analytic, m.estimate) {
                (Some(a), Some(e)) => Some(e.agrees(a, AGREEMENT_SIGMAS)),
                _ => None,
            };
            rows.push(Row {
                axis: spec.axis,
                value,
                scheme,
                metric: metric.name(),
                analytic: m.analytic,
                monte_carlo: m.estimate.map(|e| e.value),
                std_err: m.estimate.map(|e| e.std_err),
                agree,
                trials: m.estimate.map_or(0, |e| e.trials),
                discarded: m.estimate.map_or(0, |e| e.discarded),
                iterations: m.iterations,
                seed: spec.plan.base_seed,
                version: crate::VERSION,
            });
        }
    }
    Ok(rows)
}

/// Evaluates every sweep value, scheme and metric.
pub fn run_experiment(spec: &ExperimentSpec) -> std::result::Result<ResultTable, RunFailure> {
    let mut table = ResultTable { spec: spec.clone(), rows: Vec::new() };
    if let Err(error) = spec.validate() {
        return Err(RunFailure { partial: table, error });
    }
    let points: Vec<Result<Vec<Row>>> = spec.values.par_iter().map(|&v| point_rows(spec, v)).collect();
    for p in points {
        match p {
            Ok(rows) => table.rows.extend(rows),
            Err(error) => return Err(RunFailure { partial: table, error }),
        }
    }
    Ok(table)
}

/// Convergence record of one power allocation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub axis: SweepAxis,
    pub value: f64,
    pub scheme: Scheme,
    /// Channel substream the trace was taken from.
    pub instance: u64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective in bits/s/Hz after each iteration.
    pub trace: Vec<f64>,
}

impl TracePoint {
    /// First iteration whose objective is within the outer tolerance of the
    /// final value, counted from 1.
    pub fn iterations_to_tolerance(&self) -> Option<usize> {
        let last = *self.trace.last()?;
        self.trace.iter().position(|v| (last - v).abs() <= OUTER_TOL * last.abs().max(1.0)).map(|i| i + 1)
    }
}

/// Traces of the first feasible draw at every sweep point for each selected
/// power allocation metric.
pub fn run_crra_trace(spec: &ExperimentSpec) -> Result<Vec<TracePoint>> {
    spec.validate()?;
    let schemes: Vec<Scheme> = spec
        .pairs()
        .into_iter()
        .filter(|(_, m)| m.name().starts_with("crra"))
        .map(|(s, _)| s)
        .collect();
    if schemes.is_empty() {
        return Err(CliError::Invalid("traces need crra_ic or crra_bf among the metrics".into()));
    }
    let per_point: Vec<Result<Vec<TracePoint>>> = spec
        .values
        .par_iter()
        .map(|&value| {
            let cfg = spec.axis.apply(&spec.base, value)?;
            let mut out = Vec::new();
            for &scheme in &schemes {
                let batch = metrics::solve_instances(&cfg, scheme, spec.plan.base_seed, spec.crra_instances)?;
                let first = &batch.solved[0];
                out.push(TracePoint {
                    axis: spec.axis,
                    value,
                    scheme,
                    instance: batch.indices[0],
                    iterations: first.iterations,
                    converged: first.converged,
                    trace: first.trace.clone(),
                });
            }
            Ok(out)
        })
        .collect();
    let mut traces = Vec::new();
    for p in per_point {
        traces.extend(p?);
    }
    Ok(traces)
}
