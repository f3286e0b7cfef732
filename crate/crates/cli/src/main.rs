//! `argap` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors (including
//! unreadable or malformed inputs), 3 for numerical failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::ConfigFile;

#[derive(Parser, Debug)]
#[command(name = "argap", version, about = "Gap-statistic state-count selection for switching AR models")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a switching AR series from a named scenario or a model file.
    Simulate(SimulateArgs),
    /// Fit an M-state model by EM.
    Fit(FitArgs),
    /// Choose the number of states with the gap rule.
    Select(SelectArgs),
    /// Draw stable filters uniformly from the radius-r region.
    GenFilters(GenFiltersArgs),
    /// Mismatch distance between two filters or across a filter file.
    Distance(DistanceArgs),
    /// Compare gap and information-criterion selectors on a scenario.
    Benchmark(BenchmarkArgs),
    /// Reference curve W_M for uniformly drawn filters.
    Refcurve(RefcurveArgs),
}

impl Command {
    const SECTIONS: [&'static str; 7] = [
        "simulate",
        "fit",
        "select",
        "gen-filters",
        "distance",
        "benchmark",
        "refcurve",
    ];
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// Named scenario: fig3, 1, 2 or 3.
    #[arg(long)]
    scenario: Option<String>,
    /// Model JSON written by `fit` or `simulate --model-out`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Series CSV with columns t,x,state.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the generating model as JSON.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    /// Series CSV with an `x` column.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Initialisation window length.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Fitted model JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SelectArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    max_states: Option<usize>,
    /// B samples the reference at the estimated radius, U at radius 1.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Filters per reference batch (default min(N, 1000)).
    #[arg(long)]
    ref_count: Option<usize>,
    #[arg(long)]
    ref_iterations: Option<usize>,
    /// Directory for cached reference curves.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Gap curves JSON; `<stem>_observed.csv` and `<stem>_reference.csv`
    /// are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenFiltersArgs {
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DistanceArgs {
    /// Generating filter coefficients psi_1..psi_L, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    a: Option<Vec<f64>>,
    /// Predicting filter coefficients.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    b: Option<Vec<f64>>,
    /// Filter CSV; writes the full matrix with generators as rows.
    #[arg(long)]
    filters: Option<PathBuf>,
    /// cov, roots, resultant or mc.
    #[arg(long)]
    method: Option<String>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BenchmarkArgs {
    /// Scenario names, comma separated (1, 2, 3, fig3) or `all` for 1,2,3.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Subset of gap-b,gap-u,aic,bic.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    ref_count: Option<usize>,
    #[arg(long)]
    ref_iterations: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Report JSON; one histogram CSV per scenario is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RefcurveArgs {
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Curve CSV with columns M,log_W.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<argap::Error>())
        .any(argap::Error::is_numerical);
    if numerical {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<Vec<String>> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::empty(),
    };
    file.check_keys(&Command::SECTIONS)?;
    if let Some(jobs) = cli.jobs.or(file.jobs()?) {
        anyhow::ensure!(jobs > 0, "--jobs must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate(file.resolve("simulate", a)?),
        Command::Fit(a) => commands::fit(file.resolve("fit", a)?),
        Command::Select(a) => commands::select(file.resolve("select", a)?),
        Command::GenFilters(a) => commands::gen_filters(file.resolve("gen-filters", a)?),
        Command::Distance(a) => commands::distance(file.resolve("distance", a)?),
        Command::Benchmark(a) => commands::benchmark(file.resolve("benchmark", a)?),
        Command::Refcurve(a) => commands::refcurve(file.resolve("refcurve", a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
