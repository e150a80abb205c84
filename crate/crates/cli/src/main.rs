use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use hcran::SystemConfig;
use hcran_cli::experiment::parse_schemes;
use hcran_cli::{metrics, output, parse_sweep, run_crra_trace, run_experiment, CliError, ExperimentFile, ExperimentSpec};

/// Sweeps outage, capacity, BER and power allocation metrics for the IC and
/// BF precoding schemes.
#[derive(Debug, Parser)]
#[command(name = "hcran-sim", version)]
struct Args {
    /// TOML file with a [system] table and an optional [experiment] table.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep as axis=start:step:stop or axis=v1,v2,... with axis one of
    /// gamma_th (dB), n_b, mbs_snr_db, p_rs_i, p_rs.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated metrics: outage, capacity, ber, crra_ic, crra_bf.
    #[arg(long, value_delimiter = ',')]
    metric: Vec<String>,
    /// Comma-separated schemes: ic, bf.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Channel draws per point for the power allocation metrics.
    #[arg(long)]
    crra_instances: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a JSON copy of the table next to the CSV.
    #[arg(long)]
    json: bool,
    /// Exact two-interferer CDF for BF MUEs.
    #[arg(long)]
    exact_bf_cdf: bool,
    /// Specialised closed forms instead of the compositional ones.
    #[arg(long)]
    as_printed: bool,
    /// Keep the unit noise term in simulated MUE SINRs.
    #[arg(long)]
    include_noise: bool,
    /// List registered metrics and schemes and exit.
    #[arg(long)]
    list: bool,
}

struct Plan {
    spec: ExperimentSpec,
    out: Option<PathBuf>,
    json: bool,
}

fn build(args: &Args) -> hcran_cli::Result<Plan> {
    let file = match &args.config {
        Some(path) => ExperimentFile::from_path(path)?,
        None => ExperimentFile { system: SystemConfig::new(6, 2, 1, 1.0, 1.0)?, experiment: Default::default() },
    };
    let ex = file.experiment;
    let sweep = args
        .sweep
        .clone()
        .or(ex.sweep)
        .ok_or_else(|| CliError::Invalid("no sweep given (use --sweep or [experiment].sweep)".into()))?;
    let (axis, values) = parse_sweep(&sweep)?;
    let mut spec = ExperimentSpec::new(file.system, axis, values);
    if !args.metric.is_empty() {
        spec.metrics = args.metric.clone();
    } else if let Some(m) = ex.metrics {
        spec.metrics = m;
    }
    if !args.scheme.is_empty() {
        spec.schemes = parse_schemes(&args.scheme)?;
    } else if let Some(s) = ex.schemes {
        spec.schemes = parse_schemes(&s)?;
    }
    if let Some(t) = args.trials.or(ex.trials) {
        spec.plan.trials = t;
    }
    if let Some(s) = args.seed.or(ex.seed) {
        spec.plan.base_seed = s;
    }
    if let Some(b) = ex.batch_size {
        spec.plan.batch_size = b;
    }
    if let Some(n) = args.crra_instances.or(ex.crra_instances) {
        spec.crra_instances = n;
    }
    spec.analytic.exact_bf_cdf = args.exact_bf_cdf || ex.exact_bf_cdf.unwrap_or(false);
    spec.analytic.as_printed = args.as_printed || ex.as_printed.unwrap_or(false);
    spec.include_noise = args.include_noise || ex.include_noise.unwrap_or(false);
    spec.validate()?;
    Ok(Plan { spec, out: args.out.clone().or(ex.out), json: args.json || ex.json.unwrap_or(false) })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn emit(out: &Option<PathBuf>, json: bool, table: &hcran_cli::ResultTable) -> hcran_cli::Result<()> {
    let csv = output::table_csv(table);
    match out {
        Some(path) => {
            output::write_file(path, &csv)?;
            if json {
                output::write_file(&sibling(path, ".json"), &output::table_json(table)?)?;
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn execute(plan: &Plan) -> hcran_cli::Result<()> {
    let table = match run_experiment(&plan.spec) {
        Ok(t) => t,
        Err(failure) => {
            // flush whatever finished before the failing point
            if !failure.partial.rows.is_empty() {
                emit(&plan.out, plan.json, &failure.partial)?;
            }
            return Err(failure.error);
        }
    };
    emit(&plan.out, plan.json, &table)?;
    if plan.spec.uses_crra() {
        if let Some(path) = &plan.out {
            let traces = run_crra_trace(&plan.spec)?;
            output::write_file(&sibling(path, ".trace.csv"), &output::trace_csv(&plan.spec, &traces))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for m in metrics::registered() {
            println!("metric {:<10} {}", m.name(), m.description());
        }
        for s in hcran::scheme::registered() {
            println!("scheme {:<10} {}", s.name(), s.description());
        }
        return ExitCode::SUCCESS;
    }
    let result = build(&args).and_then(|plan| execute(&plan));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
