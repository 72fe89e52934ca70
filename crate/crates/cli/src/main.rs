//! `panelcausal`: panel VAR and PCMCI+ causal discovery from the command line.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error,
//! 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "panelcausal", version, about = "Panel VAR and PCMCI+ causal discovery")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, difference, ADF-screen and demean a raw panel.
    #[command(args_override_self = true)]
    Preprocess(RunArgs),
    /// Granger network, PCMCI+ graph, IRF and FEVD.
    #[command(args_override_self = true)]
    Discover(RunArgs),
    /// Monte Carlo, permutation falsification and robustness checks.
    #[command(args_override_self = true)]
    Validate(RunArgs),
    /// Centrality, tiers and income-group heterogeneity.
    #[command(args_override_self = true)]
    Analyze(RunArgs),
    /// tau_max and lag-order sensitivity sweeps.
    #[command(args_override_self = true)]
    Sweep(RunArgs),
}

/// Each flag overrides the config key of the same name.
#[derive(Args, Default)]
struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    input: Option<String>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<String>,
    /// `long` or `wide` panel CSV.
    #[arg(long)]
    layout: Option<String>,
    /// Entity to income-group CSV.
    #[arg(long)]
    groups: Option<String>,
    /// Comma-separated variable subset.
    #[arg(long)]
    variables: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Lag order, or `auto`.
    #[arg(short)]
    p: Option<String>,
    #[arg(long)]
    tau_max: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    bootstrap_reps: Option<String>,
    #[arg(long)]
    permutation_reps: Option<String>,
    #[arg(long)]
    mc_reps: Option<String>,
    /// Comma-separated Cholesky ordering.
    #[arg(long)]
    ordering: Option<String>,
    /// Comma-separated `source->target` pairs.
    #[arg(long)]
    tracked: Option<String>,
    #[arg(long)]
    granger_graph: Option<String>,
    #[arg(long)]
    pcmci_graph: Option<String>,
    /// Difference a raw level panel before estimating.
    #[arg(long)]
    auto_preprocess: bool,
    /// Any config key, as KEY=VALUE; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.load_file(path)?;
        }
        let flags = [
            ("input", &self.input),
            ("output", &self.output),
            ("layout", &self.layout),
            ("groups", &self.groups),
            ("variables", &self.variables),
            ("seed", &self.seed),
            ("p", &self.p),
            ("tau_max", &self.tau_max),
            ("alpha", &self.alpha),
            ("horizon", &self.horizon),
            ("bootstrap_reps", &self.bootstrap_reps),
            ("permutation_reps", &self.permutation_reps),
            ("mc_reps", &self.mc_reps),
            ("ordering", &self.ordering),
            ("tracked", &self.tracked),
            ("granger_graph", &self.granger_graph),
            ("pcmci_graph", &self.pcmci_graph),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if self.auto_preprocess {
            config.set("auto_preprocess", "true")?;
        }
        for entry in &self.set {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got `{entry}`")))?;
            config.set(key.trim(), value)?;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot size the worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Preprocess(a) => commands::preprocess::run(&a.resolve()?),
        Command::Discover(a) => commands::discover::run(&a.resolve()?),
        Command::Validate(a) => commands::validate::run(&a.resolve()?),
        Command::Analyze(a) => commands::analyze::run(&a.resolve()?),
        Command::Sweep(a) => commands::sweep::run(&a.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
