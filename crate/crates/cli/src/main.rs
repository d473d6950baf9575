use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedcent_cli::gen_instance::{cmd_gen_instance, InstanceKind, InstanceParams};
use fedcent_cli::run::{cmd_run, RunOverrides};
use fedcent_cli::verify::{run_suite, Suite};
use fedcent_cli::CliError;

/// Byzantine-tolerant aggregation experiments.
///
/// Log verbosity is read from FEDCENT_LOG (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(name = "fedcent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train with the given config and write per-round metrics as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a randomized property suite: geometry, bounds, lowerbounds, gradients or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a layout file: box_lb, convex_lb or random.
    GenInstance {
        #[arg(long)]
        kind: InstanceKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        faulty: Option<usize>,
        #[arg(long, default_value = "outliers")]
        strategy: String,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let records = cmd_run(&config, &RunOverrides { seed, csv: out })?;
            if let Some(last) = records.last() {
                println!(
                    "{} rounds, final accuracy {:.4}",
                    records.len(),
                    last.accuracy
                );
            }
            Ok(())
        }
        Command::Verify {
            suite,
            seed,
            trials,
            out,
        } => {
            let report = run_suite(suite, seed, trials);
            let text = report.render();
            print!("{text}");
            if out.is_some() {
                write_out(&out, &text)?;
            }
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| c.violations > 0)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(CliError::Violation(failed.join(", ")))
            }
        }
        Command::GenInstance {
            kind,
            n,
            t,
            d,
            x,
            eps,
            seed,
            faulty,
            strategy,
            out,
        } => {
            let text = cmd_gen_instance(&InstanceParams {
                kind,
                n,
                t,
                d,
                x,
                eps,
                seed,
                faulty,
                strategy,
            })?;
            write_out(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FEDCENT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fedcent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
