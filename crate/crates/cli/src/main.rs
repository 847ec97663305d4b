mod commands;
mod config;
mod fail;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use fail::CliError;

#[derive(Debug, Parser)]
#[command(name = "bayes-series", version, about = "Bayesian convergence analysis of infinite series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the convergence pipeline and print a verdict.
    Analyze(RunArgs),
    /// Track limit points of the running sum.
    Limits {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Run the convergence pipeline over a parameter grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Grid points separated by ';', e.g. "a=0.3;a=2" or "a=0.5:1:0.1".
        #[arg(long)]
        grid: Option<String>,
    },
    /// Build or query Mobius tables.
    #[command(subcommand)]
    Mobius(MobiusCommand),
    /// Log-magnitudes of the Bernoulli-number series terms.
    Bernoulli(BernoulliArgs),
    /// Inspect the series catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    /// Named parameter preset: full-scale, riemann or limits.
    #[arg(long)]
    preset: Option<String>,
    /// TOML file with the same keys as the long flags (underscored).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    series: Option<String>,
    /// Parameters as name=value pairs, e.g. "a=2,b=1".
    #[arg(long)]
    params: Option<String>,
    /// Block size.
    #[arg(long)]
    n: Option<u64>,
    /// Number of stages K.
    #[arg(long, visible_alias = "K")]
    stages: Option<u64>,
    /// Bound generator (defaults to the one designed for the series).
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Posterior mode: recursive or nonrecursive.
    #[arg(long)]
    mode: Option<String>,
    /// Tail window W for classification.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    mean_high: Option<f64>,
    #[arg(long)]
    mean_low: Option<f64>,
    /// Summation chunk size.
    #[arg(long)]
    chunk: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
    /// Mobius table file (required for the Mobius series).
    #[arg(long)]
    mobius_table: Option<PathBuf>,
    /// Trace output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct LimitArgs {
    /// Number of bins M.
    #[arg(long = "M", visible_alias = "bins")]
    bins: Option<usize>,
    /// rho: a positive number, "a-b" or "a6".
    #[arg(long)]
    rho: Option<String>,
    /// dp or finite.
    #[arg(long)]
    limit_mode: Option<String>,
    /// Base measure for dp mode: uniform or geometric.
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    mass_floor: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum MobiusCommand {
    /// Sieve mu(1..=N) into a table file.
    Build {
        #[arg(long)]
        limit: u64,
        #[arg(long, default_value_t = bayes_series::mobius::DEFAULT_SEGMENT)]
        segment: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        sequential: bool,
    },
    /// Print the Mertens function M(x) from a table.
    Mertens {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        x: u64,
    },
}

#[derive(Debug, Args)]
struct BernoulliArgs {
    /// s1 or s2.
    #[arg(long)]
    series: String,
    /// exact or stirling.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 20)]
    max_m: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CatalogCommand {
    /// List series, start indices, parameters and default bounds.
    List,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let flags = Settings {
            series: self.series.clone(),
            params: self.params.clone(),
            n: self.n,
            stages: self.stages,
            bound: self.bound.clone(),
            epsilon: self.epsilon,
            mode: self.mode.clone(),
            window: self.window,
            mean_high: self.mean_high,
            mean_low: self.mean_low,
            chunk: self.chunk,
            threads: self.threads,
            sequential: self.sequential.then_some(true),
            mobius_table: self.mobius_table.clone(),
            out: self.out.clone(),
            ..Settings::default()
        };
        Settings::resolve(self.preset.as_deref(), self.config.as_deref(), &flags)
    }
}

impl LimitArgs {
    fn flags(&self) -> Settings {
        Settings {
            bins: self.bins,
            rho: self.rho.clone(),
            limit_mode: self.limit_mode.clone(),
            base: self.base.clone(),
            burn_in: self.burn_in,
            mass_floor: self.mass_floor,
            ..Settings::default()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(run) => commands::analyze(&run.settings()?),
        Command::Limits { run, limits } => commands::limits(&run.settings()?.overlay(&limits.flags())),
        Command::Sweep { run, grid } => {
            let grid_flag = Settings {
                grid,
                ..Settings::default()
            };
            commands::sweep(&run.settings()?.overlay(&grid_flag))
        }
        Command::Mobius(MobiusCommand::Build {
            limit,
            segment,
            out,
            threads,
            sequential,
        }) => commands::mobius_build(limit, segment, &out, commands::execution(threads, sequential)),
        Command::Mobius(MobiusCommand::Mertens { table, x }) => commands::mobius_mertens(&table, x),
        Command::Bernoulli(a) => commands::bernoulli(&a.series, &a.mode, a.max_m, a.out.as_deref()),
        Command::Catalog(CatalogCommand::List) => commands::catalog_list(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
