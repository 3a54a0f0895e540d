use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use waveobs_cli::{cmd_full, cmd_invert, cmd_simulate, cmd_verify, load_config, CliResult, RunOptions};

/// Source recovery for a 1D wave equation from one boundary measurement.
#[derive(Debug, Parser)]
#[command(name = "waveobs", version, about)]
struct Cli {
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,

    /// Worker threads for independent checks in `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Record wall-clock seconds per iteration (makes outputs run-dependent).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON; omitted keys take the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,

    /// Noise seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the boundary measurement (clean and, with noise, noisy).
    Simulate(ScenarioArgs),
    /// Recover the source from a `t,y` measurement file.
    Invert {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Measurement CSV with columns `t,y`.
        #[arg(long)]
        measurement: PathBuf,
        /// Treat the configured source as ground truth for errors and diagnostics.
        #[arg(long)]
        truth: bool,
    },
    /// Run the built-in diagnostics battery; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated check names; an empty list runs nothing.
        #[arg(long)]
        checks: Option<String>,
        /// Flip the sign of the boundary injection (mutation test hook).
        #[arg(long, hide = true)]
        inject_sign_error: bool,
    },
    /// Simulate, add noise, invert with monitoring and write every artifact.
    Full(ScenarioArgs),
}

fn options(cli: &Cli, out: &std::path::Path) -> RunOptions {
    RunOptions {
        out: out.to_path_buf(),
        quiet: cli.quiet,
        timing: cli.timing,
        jobs: cli.jobs,
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => {
            let config = load_config(a.config.as_deref(), a.seed)?;
            cmd_simulate(&config, &options(cli, &a.out))
        }
        Command::Invert {
            scenario: a,
            measurement,
            truth,
        } => {
            let config = load_config(a.config.as_deref(), a.seed)?;
            cmd_invert(&config, measurement, *truth, &options(cli, &a.out))
        }
        Command::Verify {
            out,
            checks,
            inject_sign_error,
        } => {
            let selection: Option<Vec<String>> = checks.as_ref().map(|s| {
                s.split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(String::from)
                    .collect()
            });
            cmd_verify(selection.as_deref(), *inject_sign_error, &options(cli, out)).map(|_| ())
        }
        Command::Full(a) => {
            let config = load_config(a.config.as_deref(), a.seed)?;
            cmd_full(&config, &options(cli, &a.out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("waveobs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
