//! `sardlab`: constructions, certified evaluation, pushforwards and probes.

mod commands;
mod config;
mod exit;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sardlab::analysis::holder::PairStrategy;
use sardlab::ScheduleKind;

use config::{Format, RunConfig};
use exit::CliError;

#[derive(Parser, Debug)]
#[command(name = "sardlab", version, about = "Cantor-type Hölder functions: exact geometry, certified values and probes")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dimension, 1 or 2.
    #[arg(long, global = true)]
    dim: Option<u8>,
    /// Schedule: inverse-square or harmonic.
    #[arg(long, global = true, value_parser = parse_kind)]
    kind: Option<ScheduleKind>,
    #[arg(long, global = true)]
    depth_cap: Option<usize>,
    /// Evaluation tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for sampled probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for files; defaults to $SARDLAB_OUT_DIR, then ./sardlab-out.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

fn parse_kind(s: &str) -> Result<ScheduleKind, String> {
    match s {
        "inverse-square" => Ok(ScheduleKind::InverseSquare),
        "harmonic" => Ok(ScheduleKind::Harmonic),
        other => Err(format!("unknown schedule {other:?} (inverse-square or harmonic)")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of alpha_n, a_n, s_n, r_n, or an enclosure of the limit product.
    Schedule(commands::ScheduleArgs),
    /// Certified values of f at points or on a grid.
    Eval(commands::EvalArgs),
    /// Pushforward of the core measure under f_n and its KS distance to uniform.
    Pushforward(commands::PushforwardArgs),
    /// Probes of differentiability, criticality, level sets and regularity.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Plot data for the construction and critical-set figures.
    FigureData(figures::FigureArgs),
}

#[derive(Subcommand, Debug)]
enum ProbeCommand {
    /// Difference quotients of opposite sign at levels with digit 1 (1D).
    Nondiff(commands::NondiffArgs),
    /// Vanishing gradient at a deep cell midpoint (2D).
    Critical(commands::CriticalArgs),
    /// Level-set component through the midpoint of an addressed cell (2D).
    Levelset(commands::LevelsetArgs),
    /// Sampled Hölder lower bound against the series upper bound.
    Holder(commands::HolderArgs),
    /// Interpolation inequality for f_n on an addressed cell.
    Interpolation(commands::InterpolationArgs),
    /// Values of f_n on the off-core plateaus and level-(n+1) cells.
    CriticalValues(commands::CriticalValuesArgs),
}

impl GlobalArgs {
    fn run_config(&self) -> Result<RunConfig, CliError> {
        let flags = RunConfig {
            dimension: self.dim,
            schedule: self.kind,
            depth_cap: self.depth_cap,
            tol: self.tol,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            format: self.format,
        };
        Ok(match &self.config {
            Some(path) => RunConfig::load(path)?.overlay(flags),
            None => flags,
        })
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = cli.global.run_config()?;
    match cli.command {
        Command::Schedule(a) => commands::schedule(&cfg, &a),
        Command::Eval(a) => commands::eval(&cfg, &a),
        Command::Pushforward(a) => commands::pushforward(&cfg, &a),
        Command::Probe(p) => match p {
            ProbeCommand::Nondiff(a) => commands::nondiff(&cfg, &a),
            ProbeCommand::Critical(a) => commands::critical(&cfg, &a),
            ProbeCommand::Levelset(a) => commands::levelset(&cfg, &a),
            ProbeCommand::Holder(a) => commands::holder(&cfg, &a),
            ProbeCommand::Interpolation(a) => commands::interpolation(&cfg, &a),
            ProbeCommand::CriticalValues(a) => commands::critical_values(&cfg, &a),
        },
        Command::FigureData(a) => figures::figure_data(&cfg, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

// keeps the strategy parser next to the other value parsers
pub(crate) fn parse_strategy(s: &str) -> Result<PairStrategy, String> {
    s.parse()
}
