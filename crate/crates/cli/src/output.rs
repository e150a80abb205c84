//! CSV and JSON rendering. Floats use the shortest round-trip form, so equal
//! tables render to identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::ExperimentSpec;
use crate::run::{ResultTable, Row, TracePoint};

pub const CSV_COLUMNS: &str =
    "axis,value,scheme,metric,analytic,monte_carlo,std_err,agree,trials,discarded,iterations,seed,version";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn sci(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Commented block echoing the scenario and run settings.
pub fn header(spec: &ExperimentSpec) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# hcran-sim {}", crate::VERSION);
    let _ = writeln!(h, "# sweep axis: {} ({})", spec.axis, spec.axis.meaning());
    let _ = writeln!(
        h,
        "# seed: {}, trials: {}, batch_size: {}, crra_instances: {}",
        spec.plan.base_seed, spec.plan.trials, spec.plan.batch_size, spec.crra_instances
    );
    let _ = writeln!(
        h,
        "# exact_bf_cdf: {}, as_printed: {}, include_noise: {}",
        spec.analytic.exact_bf_cdf, spec.analytic.as_printed, spec.include_noise
    );
    let _ = writeln!(
        h,
        "# powers are linear and normalised to unit receiver noise; MBS power in dB means per-antenna transmit power over noise"
    );
    let _ = writeln!(h, "# agree: |analytic - monte_carlo| <= {} std_err", crate::run::AGREEMENT_SIGMAS);
    let system = toml::to_string(&spec.base).unwrap_or_default();
    for line in system.lines().filter(|l| !l.is_empty()) {
        let _ = writeln!(h, "# system.{line}");
    }
    h
}

fn row_csv(r: &Row) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.axis,
        r.value,
        r.scheme.name(),
        r.metric,
        sci(r.analytic),
        sci(r.monte_carlo),
        sci(r.std_err),
        opt(r.agree),
        r.trials,
        r.discarded,
        opt(r.iterations),
        r.seed,
        r.version
    )
}

pub fn table_csv(table: &ResultTable) -> String {
    let mut out = header(&table.spec);
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for r in &table.rows {
        out.push_str(&row_csv(r));
        out.push('\n');
    }
    out
}

/// One line per trace iteration.
pub fn trace_csv(spec: &ExperimentSpec, traces: &[TracePoint]) -> String {
    let mut out = header(spec);
    out.push_str("axis,value,scheme,instance,iteration,objective_bits,converged\n");
    for t in traces {
        for (i, v) in t.trace.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{v:e},{}",
                t.axis,
                t.value,
                t.scheme.name(),
                t.instance,
                i + 1,
                t.converged
            );
        }
    }
    out
}

#[derive(Serialize)]
struct JsonTable<'a> {
    version: &'static str,
    axis: &'static str,
    axis_meaning: &'static str,
    seed: u64,
    trials: u64,
    crra_instances: usize,
    exact_bf_cdf: bool,
    as_printed: bool,
    include_noise: bool,
    system: &'a hcran::SystemConfig,
    rows: &'a [Row],
}

pub fn table_json(table: &ResultTable) -> Result<String> {
    let s = &table.spec;
    let doc = JsonTable {
        version: crate::VERSION,
        axis: s.axis.name(),
        axis_meaning: s.axis.meaning(),
        seed: s.plan.base_seed,
        trials: s.plan.trials,
        crra_instances: s.crra_instances,
        exact_bf_cdf: s.analytic.exact_bf_cdf,
        as_printed: s.analytic.as_printed,
        include_noise: s.include_noise,
        system: &s.base,
        rows: &table.rows,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| CliError::Encode(e.to_string()))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use hcran::{Scheme, SystemConfig};

    use super::*;
    use crate::experiment::SweepAxis;

    fn table() -> ResultTable {
        let spec = ExperimentSpec::new(SystemConfig::new(6, 2, 1, 1.0, 1.0).unwrap(), SweepAxis::GammaTh, vec![0.0]);
        let row = Row {
            axis: SweepAxis::GammaTh,
            value: 0.0,
            scheme: Scheme::Bf,
            metric: "outage",
            analytic: Some(0.25),
            monte_carlo: Some(0.2501),
            std_err: Some(1e-3),
            agree: Some(true),
            trials: 1000,
            discarded: 0,
            iterations: None,
            seed: 1,
            version: crate::VERSION,
        };
        ResultTable { spec, rows: vec![row] }
    }

    #[test]
    fn csv_has_header_columns_and_rows() {
        let csv = table_csv(&table());
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# hcran-sim"));
        assert!(csv.contains("# system.n_b = 6"));
        assert!(csv.contains("per-antenna transmit power over noise"));
        let body: Vec<&&str> = lines.iter().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(*body[0], CSV_COLUMNS);
        assert_eq!(*body[1], format!("gamma_th,0,bf,outage,2.5e-1,2.501e-1,1e-3,true,1000,0,,1,{}", crate::VERSION));
    }

    #[test]
    fn json_mirrors_the_rows() {
        let v: serde_json::Value = serde_json::from_str(&table_json(&table()).unwrap()).unwrap();
        assert_eq!(v["rows"][0]["scheme"], "bf");
        assert_eq!(v["rows"][0]["analytic"], 0.25);
        assert!(v["rows"][0]["iterations"].is_null());
        assert_eq!(v["system"]["n_b"], 6);
    }
}
