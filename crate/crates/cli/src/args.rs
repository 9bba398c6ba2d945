//! Command-line parsing.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand as ClapSub};

use crate::commands::{
    cmd_bench, cmd_catalog, cmd_check, cmd_green, cmd_solve, CliError, Outcome, EXIT_USAGE,
};
use crate::config::{parse_grid, parse_strategy, RunConfig, Subcommand};
use nlgreen::bench::{GridSpec, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "nlgreen",
    version,
    about = "Nonlinear Green's functions for w'' + N(w) = f(t)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, ClapSub)]
pub enum Command {
    /// Decide membership of N in the multiplicability class.
    Check(Common),
    /// Tabulate G = θ·w₀ as CSV `t,G`.
    Green(Common),
    /// Tabulate the short-time expansion w_K as CSV `t,wK`.
    Solve(Common),
    /// Error study Er(K; t) as CSV.
    Bench(Common),
    /// List the closed-form catalog as CSV.
    Catalog(Common),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Nonlinearity N(w); same as --nonlin.
    pub expr: Option<String>,
    #[arg(long)]
    pub nonlin: Option<String>,
    /// zero, delta, or an expression in t.
    #[arg(long)]
    pub forcing: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long = "K", short = 'K')]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// n,t0,t1
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key = value file; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the two-branch Liouville entry for exp(w).
    #[arg(long)]
    pub liouville: bool,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Right end of the default grid.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Right end of the least-squares window.
    #[arg(long = "t-fit")]
    pub t_fit: Option<f64>,
    /// Identity tolerance for `check`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sample paths for `check`, sample times for least squares.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl Common {
    fn to_config(&self, sub: Subcommand) -> Result<RunConfig, CliError> {
        if self.expr.is_some() && self.nonlin.is_some() {
            return Err(CliError::usage(
                "give the nonlinearity either positionally or with --nonlin",
            ));
        }
        let flags = RunConfig {
            subcommand: Some(sub),
            nonlin: self.expr.clone().or_else(|| self.nonlin.clone()),
            forcing: self.forcing.clone(),
            s: self.s,
            k: self.k,
            strategy: self.strategy,
            rtol: self.rtol,
            atol: self.atol,
            grid: self.grid,
            eta: self.eta,
            out: self.out.clone(),
            seed: self.seed,
            liouville: self.liouville,
            epsilon: self.epsilon,
            t_max: self.t_max,
            t_fit: self.t_fit,
            tol: self.tol,
            samples: self.samples,
        };
        let base = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::from_text(&text)
                    .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        Ok(base.merged(flags))
    }
}

/// Runs a parsed configuration.
pub fn dispatch(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.subcommand {
        Some(Subcommand::Check) => cmd_check(config),
        Some(Subcommand::Green) => cmd_green(config),
        Some(Subcommand::Solve) => cmd_solve(config),
        Some(Subcommand::Bench) => cmd_bench(config),
        Some(Subcommand::Catalog) => cmd_catalog(config),
        None => Err(CliError::usage("no subcommand")),
    }
}

/// Parses `argv` and runs it.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    stdout: text,
                    ..Outcome::default()
                }
            } else {
                Outcome {
                    stderr: text,
                    code,
                    ..Outcome::default()
                }
            };
        }
    };
    let (sub, common) = match &cli.command {
        Command::Check(c) => (Subcommand::Check, c),
        Command::Green(c) => (Subcommand::Green, c),
        Command::Solve(c) => (Subcommand::Solve, c),
        Command::Bench(c) => (Subcommand::Bench, c),
        Command::Catalog(c) => (Subcommand::Catalog, c),
    };
    match common.to_config(sub).and_then(|c| dispatch(&c)) {
        Ok(o) => o,
        Err(e) => Outcome {
            stderr: format!("error: {e}\n"),
            code: e.code,
            ..Outcome::default()
        },
    }
}
