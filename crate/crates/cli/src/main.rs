use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stable_contact_cli::commands::bench_line;
use stable_contact_cli::{cmd_bench, cmd_estimate, cmd_eval, cmd_generate, CliError, RunConfig};

/// Stable foot contact probability from foot-mounted IMUs.
///
/// Configuration values can be overridden with environment variables named
/// STABLE_CONTACT_<SECTION>__<KEY>, e.g. STABLE_CONTACT_ESTIMATOR__WINDOW_SIZE=30.
#[derive(Parser)]
#[command(name = "stable-contact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic gait trace and its .meta.json sidecar.
    Generate {
        /// Built-in scenario name or path to a TOML scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate stable-contact probabilities for every sample of a trace.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to output.estimates from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score estimates against trace labels and the force-threshold baseline.
    Eval {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to output.report from the config.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Measure single-thread estimator throughput.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

fn output_path(flag: Option<PathBuf>, configured: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
    flag.or_else(|| configured.clone())
        .ok_or_else(|| CliError::Usage(format!("--{name} is required (or set output.{name} in the config)")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { scenario, seed, out } => {
            let g = cmd_generate(&scenario, seed, &out)?;
            eprintln!("wrote {} rows to {} and {}", g.rows, g.trace.display(), g.meta.display());
        }
        Command::Estimate { input, config, out } => {
            let config = RunConfig::from_env(config.as_deref())?;
            let out = output_path(out, &config.output.estimates, "estimates")?;
            let e = cmd_estimate(&input, &config, &out)?;
            for w in &e.warnings {
                eprintln!("warning: {w}");
            }
            let mode = if e.preprocessed { "preprocessed" } else { "precompensated" };
            eprintln!("wrote {} estimates ({mode} input) to {}", e.rows.len(), out.display());
        }
        Command::Eval {
            trace,
            estimates,
            config,
            report,
        } => {
            let config = RunConfig::from_env(config.as_deref())?;
            let report = output_path(report, &config.output.report, "report")?;
            let r = cmd_eval(&trace, &estimates, &config, &report)?;
            match &r.baseline {
                Some(b) => eprintln!("rmse method={:.4} baseline={:.4} n={}", r.method.rmse, b.rmse, r.method.n),
                None => eprintln!("rmse method={:.4} n={} (baseline unavailable)", r.method.rmse, r.method.n),
            }
        }
        Command::Bench { config, n } => {
            let config = RunConfig::from_env(config.as_deref())?;
            println!("{}", bench_line(&cmd_bench(&config, n)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
