//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when an input is outside a computation's domain,
//! 2 on a usage error. Randomized subcommands default to seed 0; nothing reads the
//! clock or the environment.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{bound_report, theorem_terms, TheoremBranch};
use crate::coverage::{
    coverage_probability, coverage_threshold, exact_expected_cover_time,
    inclusion_exclusion_expectation, phase_sum_raw, INCLUSION_EXCLUSION_MAX_N,
};
use crate::montecarlo::{
    estimate_coverage_probability_with, estimate_expected_cover_time_with, phase_sweep,
    CoverTimeSampler, MonteCarloEstimate,
};
use crate::omf::{assemble_instance, coverage_experiment, row_coverage_check};
use crate::output::{to_csv, OutputRecord};
use crate::{Result, SparsityModel};

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "omf-coverage",
    version,
    about = "Columns needed for every row of a Bernoulli-sparse matrix to be nonzero"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Number of rows of X.
    #[arg(long)]
    n: usize,
    /// Probability that an entry of X is nonzero.
    #[arg(long)]
    theta: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<SparsityModel> {
        SparsityModel::new(self.n, self.theta)
    }
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact expected cover time, phase-sum and the classic coupon-collector value.
    Expect {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Every closed-form bound side by side.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Smallest p with P(all rows covered) >= 1 - delta.
    Threshold {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
    /// Monte Carlo estimate of the expected cover time, or of the coverage
    /// probability when --p is given.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        p: Option<usize>,
        #[command(flatten)]
        sim: SimArgs,
        /// Simulate whole columns instead of the max-of-geometrics shortcut.
        #[arg(long)]
        column_scan: bool,
    },
    /// Empirical vs closed-form coverage probability over a range of p. --n and
    /// --theta take comma-separated lists to sweep those too.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        #[arg(long)]
        p_min: usize,
        #[arg(long)]
        p_max: usize,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Assemble one Y = VX instance, check it, and run a coverage experiment.
    Omf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        sim: SimArgs,
        /// Write the instance's V, X and Y to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (program name first), runs the subcommand and writes its records.
/// Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let text = err.render().to_string();
            let _ = if err.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(records) => {
            let text = match cli.format {
                Format::Json => records.iter().map(OutputRecord::to_json).collect(),
                Format::Csv => to_csv(&records),
            };
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn execute(command: &Command) -> Result<Vec<OutputRecord>> {
    match command {
        Command::Expect { model, tol } => expect(model.model()?, *tol).map(|r| vec![r]),
        Command::Bounds { model } => Ok(vec![bounds(model.model()?)]),
        Command::Threshold { model, delta } => threshold(model.model()?, *delta).map(|r| vec![r]),
        Command::Simulate {
            model,
            p,
            sim,
            column_scan,
        } => {
            let sampler = if *column_scan {
                CoverTimeSampler::ColumnScan
            } else {
                CoverTimeSampler::MaxOfGeometrics
            };
            simulate(model.model()?, *p, sim, sampler).map(|r| vec![r])
        }
        Command::Sweep {
            n,
            theta,
            p_min,
            p_max,
            sim,
        } => sweep(n, theta, *p_min, *p_max, sim),
        Command::Omf { model, p, sim, out } => {
            omf(model.model()?, *p, sim, out.as_ref()).map(|r| vec![r])
        }
    }
}

fn model_params(command: &str, model: &SparsityModel) -> OutputRecord {
    OutputRecord::new(command)
        .param("n", model.n())
        .param("theta", model.theta())
}

fn expect(model: SparsityModel, tol: f64) -> Result<OutputRecord> {
    let summary = exact_expected_cover_time(&model, tol)?;
    let mut rec = model_params("expect", &model)
        .param("tol", tol)
        .result("exact", summary.exact_expectation)
        .result("phase_sum", summary.phase_sum)
        .result("phase_sum_raw", phase_sum_raw(&model))
        .result(
            "phase_sum_gap",
            summary.phase_sum - summary.exact_expectation,
        )
        .result("classic_reference", summary.classic_reference)
        .result("truncation_error_bound", summary.truncation_error_bound);
    if model.n() <= INCLUSION_EXCLUSION_MAX_N {
        rec = rec.result(
            "inclusion_exclusion",
            inclusion_exclusion_expectation(&model)?,
        );
    }
    Ok(rec)
}

fn bounds(model: SparsityModel) -> OutputRecord {
    let report = bound_report(&model);
    let branch = match theorem_terms(&model).dominant() {
        TheoremBranch::Coverage => "coverage",
        TheoremBranch::Log => "log",
    };
    model_params("bounds", &model)
        .result("theorem_bound", report.theorem_bound)
        .result("theorem_branch", branch)
        .result("simple_lower_bound", report.simple_lower_bound)
        .result("digamma_bound", report.digamma_bound)
        .result("digamma_approx_bound", report.digamma_approx_bound)
        .result("small_theta_bound", report.small_theta_bound.value)
        .result(
            "small_theta_outside_regime",
            report.small_theta_bound.outside_regime,
        )
        .result("phase_sum", report.phase_sum)
        .result("exact_expectation", report.exact_expectation)
}

fn threshold(model: SparsityModel, delta: f64) -> Result<OutputRecord> {
    let p_star = coverage_threshold(&model, delta)?;
    Ok(model_params("threshold", &model)
        .param("delta", delta)
        .result("p_star", p_star)
        .result("coverage_at_p_star", coverage_probability(&model, p_star))
        .result(
            "coverage_below_p_star",
            coverage_probability(&model, p_star - 1),
        ))
}

fn with_estimate(rec: OutputRecord, est: &MonteCarloEstimate) -> OutputRecord {
    rec.result("mean", est.mean)
        .result("std_error", est.std_error)
        .result("ci_low", est.ci_low)
        .result("ci_high", est.ci_high)
}

fn simulate(
    model: SparsityModel,
    p: Option<usize>,
    sim: &SimArgs,
    sampler: CoverTimeSampler,
) -> Result<OutputRecord> {
    let sampler_name = match sampler {
        CoverTimeSampler::MaxOfGeometrics => "max_of_geometrics",
        CoverTimeSampler::ColumnScan => "column_scan",
    };
    let rec = model_params("simulate", &model)
        .param("trials", sim.trials)
        .param("seed", sim.seed)
        .param("sampler", sampler_name);
    Ok(match p {
        Some(p) => {
            let est = estimate_coverage_probability_with(&model, p, sim.trials, sim.seed, sampler)?;
            with_estimate(rec.param("p", p), &est)
                .result("quantity", "coverage_probability")
                .result("analytic", coverage_probability(&model, p))
        }
        None => {
            let est = estimate_expected_cover_time_with(&model, sim.trials, sim.seed, sampler)?;
            let exact = exact_expected_cover_time(&model, DEFAULT_TOL)?;
            with_estimate(rec, &est)
                .result("quantity", "expected_cover_time")
                .result("analytic", exact.exact_expectation)
        }
    })
}

fn sweep(
    ns: &[usize],
    thetas: &[f64],
    p_min: usize,
    p_max: usize,
    sim: &SimArgs,
) -> Result<Vec<OutputRecord>> {
    let mut records = Vec::new();
    for &n in ns {
        for &theta in thetas {
            let model = SparsityModel::new(n, theta)?;
            let curve = phase_sweep(&model, p_min, p_max, sim.trials, sim.seed)?;
            for pt in &curve.points {
                let rec = model_params("sweep", &model)
                    .param("p_min", p_min)
                    .param("p_max", p_max)
                    .param("trials", sim.trials)
                    .param("seed", sim.seed)
                    .result("p", pt.p);
                records.push(
                    with_estimate(rec, &pt.empirical)
                        .result("analytic", pt.analytic)
                        .result("analytic_in_ci", pt.empirical.contains(pt.analytic)),
                );
            }
        }
    }
    Ok(records)
}

fn omf(
    model: SparsityModel,
    p: usize,
    sim: &SimArgs,
    out: Option<&PathBuf>,
) -> Result<OutputRecord> {
    let instance = assemble_instance(model.n(), p, model.theta(), sim.seed)?;
    let coverage = row_coverage_check(&instance.x)?;
    let experiment = coverage_experiment(model.n(), model.theta(), p, sim.trials, sim.seed)?;
    if let Some(path) = out {
        let mut w = BufWriter::new(File::create(path)?);
        instance.write_to(&mut w)?;
        w.flush()?;
    }
    let x_norm = instance.x.norm().max(1.0);
    Ok(model_params("omf", &model)
        .param("p", p)
        .param("trials", sim.trials)
        .param("seed", sim.seed)
        .result("orthogonality_error", instance.orthogonality_error())
        .result(
            "relative_recovery_error",
            instance.recovery_error() / x_norm,
        )
        .result("relative_residual", instance.residual() / x_norm)
        .result("norm_gap", instance.norm_gap())
        .result("covered", coverage.covered)
        .result("uncovered_rows", coverage.uncovered_rows.len())
        .result(
            "min_nonzeros_per_row",
            coverage.nonzeros_per_row.iter().copied().min().unwrap_or(0),
        )
        .result("coverage_mean", experiment.mean)
        .result("coverage_std_error", experiment.std_error)
        .result("coverage_ci_low", experiment.ci_low)
        .result("coverage_ci_high", experiment.ci_high)
        .result("coverage_analytic", coverage_probability(&model, p)))
}
