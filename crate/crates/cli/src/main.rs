//! `jetham`: tensor tables and verification reports for scenario files.

mod report;
mod scenario;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use report::What;
use scenario::Scenario;
use verify::Suite;

#[derive(Parser)]
#[command(
    name = "jetham",
    version,
    about = "Tensor calculus on the dual 1-jet bundle J^{1*}(T, M)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one table at every eval point and write a JSON document.
    Compute {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        /// Output path; `-` for stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Also write the report as a JSON document.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_json(path: &Path, doc: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn threads() -> Result<()> {
    if let Ok(v) = std::env::var("JETHAM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("JETHAM_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    threads()?;
    match cli.command {
        Command::Compute {
            scenario,
            what,
            out,
        } => {
            let sc = Scenario::load(&scenario)?;
            let setup = sc
                .setup()
                .with_context(|| format!("invalid scenario {}", scenario.display()))?;
            let doc = report::compute(&sc, &setup, what)?;
            write_json(&out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            scenario,
            suite,
            out,
        } => {
            let sc = Scenario::load(&scenario)?;
            let setup = sc
                .setup()
                .with_context(|| format!("invalid scenario {}", scenario.display()))?;
            let doc = verify::run(&sc, &setup, suite)?;
            let mut stdout = std::io::stdout().lock();
            for c in &doc.checks {
                writeln!(stdout, "{}", c.line())?;
            }
            for f in &doc.findings {
                writeln!(stdout, "{}", f.line())?;
            }
            let failed = doc.checks.iter().filter(|c| !c.pass).count();
            writeln!(stdout, "{} checks, {} failed", doc.checks.len(), failed)?;
            if let Some(out) = out {
                write_json(&out, &doc)?;
            }
            Ok(if doc.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// 2 for unreadable or invalid input, 3 for math domain errors, 4 for
/// singular metrics or Jacobians.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<jetham::Error>() {
            return match e {
                jetham::Error::Domain { .. } => 3,
                jetham::Error::SingularMetric { .. } | jetham::Error::SingularJacobian { .. } => 4,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
