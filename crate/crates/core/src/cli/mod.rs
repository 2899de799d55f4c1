//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input or format error, 3 singular weight
//! quadratic, 4 simulation failure.

pub mod dataset;
pub mod params_file;
pub mod report;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorId, WeightPair};
use crate::montecarlo::{compare_mse, run_simulation, PopulationModel, SimulationConfig, WeightPolicy};
use crate::moments::derive_moments;
use crate::theory::{
    analyze, build_quadratic, grover_kaur_printed_weights, optimize_weights, proposed_printed_weights,
    regression_closed_form, TpMode,
};
use dataset::{estimate_params, load_dataset, Divisor};
use params_file::load_params;
use report::{build_report, render_report, ReportFormat};

#[derive(Debug, Parser)]
#[command(name = "mestim", version, about = "Population-mean estimators under measurement error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bias/MSE/PRE table for all estimators.
    Analyze(AnalyzeArgs),
    /// Monte Carlo run of one estimator, compared with first-order theory.
    Simulate(SimulateArgs),
    /// Optimal weights of a weighted family.
    Weights(WeightsArgs),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["params", "data"])))]
pub struct AnalyzeArgs {
    /// key=value parameter file
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// CSV with header X,Y,x,y
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "n-1")]
    pub divisor: Divisor,
    #[arg(long, default_value = "corrected")]
    pub tp_mode: TpMode,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub estimator: EstimatorId,
    /// Fixed weights `w1,w2`
    #[arg(long, conflicts_with = "oracle_weights", allow_hyphen_values = true)]
    pub weights: Option<WeightPair>,
    /// Use first-order optimal weights at the true parameters
    #[arg(long)]
    pub oracle_weights: bool,
    #[arg(long, default_value = "corrected")]
    pub tp_mode: TpMode,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace the sample size from the parameter file
    #[arg(long)]
    pub n_override: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Acceptance band in Monte Carlo standard errors
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub family: EstimatorId,
    #[arg(long, default_value = "corrected")]
    pub tp_mode: TpMode,
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn analyze_command(args: &AnalyzeArgs) -> Result<String> {
    let (params, divisor) = match (&args.params, &args.data) {
        (Some(path), _) => (load_params(path)?, None),
        (None, Some(path)) => (estimate_params(&load_dataset(path)?, args.divisor)?, Some(args.divisor)),
        (None, None) => return Err(Error::Format("one of --params or --data is required".into())),
    };
    let table = build_report(&params, args.tp_mode, divisor)?;
    Ok(render_report(&table, args.format))
}

pub fn simulate_command(args: &SimulateArgs) -> Result<String> {
    let mut params = load_params(&args.params)?;
    if let Some(n) = args.n_override {
        params = params.with_n(n);
        params.validate()?;
    }
    let weights = match (args.estimator.is_weighted(), args.weights, args.oracle_weights) {
        (_, Some(w), _) => WeightPolicy::Fixed(w),
        (true, None, _) => WeightPolicy::OracleOptimal(args.tp_mode),
        (false, None, true) => {
            return Err(Error::Weights(format!("estimator {} takes no weights", args.estimator)))
        }
        (false, None, false) => WeightPolicy::None,
    };
    let config = SimulationConfig::new(args.estimator, args.reps, args.seed)
        .with_weights(weights)
        .with_workers(args.workers);
    let model = PopulationModel::new(params)?;
    let result = run_simulation(&model, &config)?;

    // Theory at the weights actually simulated.
    let theory_mse = match result.weights_used {
        Some(w) if !matches!(weights, WeightPolicy::OracleOptimal(_)) => {
            crate::theory::mse_at_weights(&build_quadratic(args.estimator, &params, args.tp_mode)?, w)
        }
        _ => analyze(args.estimator, &params, args.tp_mode)?.mse_total,
    };
    let verdict = compare_mse(&result, theory_mse, args.k)?;

    if args.json {
        let v = serde_json::json!({ "params": params, "config": config, "result": result, "verdict": verdict });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")));
    }
    let mut s = String::new();
    let _ = writeln!(s, "estimator:            {}", args.estimator);
    if let Some(w) = result.weights_used {
        let _ = writeln!(s, "weights:              ({}, {})", w.w1, w.w2);
    }
    let _ = writeln!(s, "n:                    {}", params.n);
    let _ = writeln!(s, "replications:         {} used, {} rejected", result.replications_used, result.rejected_replications);
    let _ = writeln!(s, "seed:                 {}", args.seed);
    let _ = writeln!(s, "mean estimate:        {:.6}", result.mean_estimate);
    let _ = writeln!(s, "empirical bias:       {:.6}", result.empirical_bias);
    let _ = writeln!(s, "empirical mse:        {:.6} +- {:.6}", result.empirical_mse, result.mc_standard_error_of_mse);
    let _ = writeln!(s, "first-order mse:      {:.6}", verdict.theory_mse);
    let _ = writeln!(s, "z:                    {:.3} ({} at k={})", verdict.z, if verdict.pass { "pass" } else { "fail" }, verdict.k);
    Ok(s)
}

pub fn weights_command(args: &WeightsArgs) -> Result<String> {
    let params = load_params(&args.params)?;
    let q = build_quadratic(args.family, &params, args.tp_mode)?;
    let opt = optimize_weights(&q)?;
    let v_ym = derive_moments(&params)?.v_ym;
    let mut s = String::new();
    let _ = writeln!(s, "family:      {}", args.family);
    if args.family == EstimatorId::Tp {
        let _ = writeln!(s, "tp mode:     {}", args.tp_mode);
    }
    let _ = writeln!(s, "quadratic:   c0={} c11={} c22={} c12={} c1={}", q.c0, q.c11, q.c22, q.c12, q.c1);
    let _ = writeln!(s, "w1:          {:.9}", opt.weights.w1);
    let _ = writeln!(s, "w2:          {:.9}", opt.weights.w2);
    let _ = writeln!(s, "min mse:     {:.6}", opt.min_mse);
    match crate::theory::pre(v_ym, opt.min_mse) {
        Ok(p) => {
            let _ = writeln!(s, "pre:         {p:.3}");
        }
        Err(_) => {
            let _ = writeln!(s, "pre:         NA");
        }
    }
    let _ = writeln!(s, "hessian_pd:  {}", opt.hessian_pd);
    let _ = writeln!(s, "admissible:  {}", opt.admissible);
    match args.family {
        EstimatorId::T3 => {
            let (w, min) = regression_closed_form(&params)?;
            let _ = writeln!(s, "closed form: ({:.9}, {:.9}) min {:.6}", w.w1, w.w2, min);
        }
        EstimatorId::T4 => {
            let w = grover_kaur_printed_weights(&params)?;
            let _ = writeln!(
                s,
                "published:   ({:.9}, {:.9}) mse there {:.6}",
                w.w1,
                w.w2,
                crate::theory::mse_at_weights(&q, w)
            );
        }
        EstimatorId::Tp => {
            let w = proposed_printed_weights(&params)?;
            let _ = writeln!(s, "published:   ({:.9}, {:.9})", w.w1, w.w2);
        }
        _ => {}
    }
    Ok(s)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(args) => write_output(&analyze_command(args)?, args.out.as_ref()),
        Command::Simulate(args) => write_output(&simulate_command(args)?, None),
        Command::Weights(args) => write_output(&weights_command(args)?, None),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
