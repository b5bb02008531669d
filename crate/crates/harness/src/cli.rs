//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{resolve, Command, Format, Overrides, SweepConfig, UsageError};
use crate::report::Report;
use crate::verify;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status when a check fails.
pub const EXIT_FAILED: i32 = 1;
/// Exit status for usage or configuration errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "perispline", version, about = "Periodic spline Gram, projection and quasiinterpolation sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Gram stencils, spectral bounds and eigenvalue consistency.
    Gram(Common),
    /// Decay of the inverse Gram matrix and Demko verification.
    Decay(Common),
    /// L² projection stability ratios, errors and rates.
    Project(Common),
    /// Thomée–Wendroff quasiinterpolant stability ratios, errors and rates.
    Quasi(Common),
    /// Run the full verification suite and print a pass/fail table.
    VerifyAll(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// INI-style `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Orders, e.g. `2,3` or `1..8`.
    #[arg(long)]
    r: Option<String>,
    /// Cell counts, e.g. `16,64,256`.
    #[arg(long = "N")]
    n: Option<String>,
    /// Derivative orders (default: all `l <= r - 1`).
    #[arg(long)]
    l: Option<String>,
    /// Test functions: `sin<k>`, `cos<k>`, `expsin`, `const`, `randtrig`.
    #[arg(long)]
    corpus: Option<String>,
    /// Output file; defaults to `$PERISPLINE_OUT_DIR/<command>.<ext>`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for random corpus entries and random splines.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nodes_per_cell: Option<usize>,
    #[arg(long)]
    samples_per_cell: Option<usize>,
}

impl Common {
    fn into_overrides(self) -> (Overrides, Option<PathBuf>) {
        (
            Overrides {
                r: self.r,
                n: self.n,
                l: self.l,
                corpus: self.corpus,
                out: self.out,
                format: self.format,
                seed: self.seed,
                nodes_per_cell: self.nodes_per_cell,
                samples_per_cell: self.samples_per_cell,
            },
            self.config,
        )
    }
}

fn write_report(cfg: &SweepConfig, report: &Report) -> Result<(), String> {
    let text = report.render(cfg.format);
    match cfg.output_path() {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            }
            std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write report: {e}")),
    }
}

/// Parse `args` (including the program name) and run; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (command, common) = match cli.command {
        Sub::Gram(c) => (Command::Gram, c),
        Sub::Decay(c) => (Command::Decay, c),
        Sub::Project(c) => (Command::Project, c),
        Sub::Quasi(c) => (Command::Quasi, c),
        Sub::VerifyAll(c) => (Command::VerifyAll, c),
    };
    let (flags, file) = common.into_overrides();
    let cfg = match resolve(command, flags, file.as_deref()) {
        Ok(cfg) => cfg,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut suite_failed = false;
    let result = match command {
        Command::Gram => commands::gram(&cfg),
        Command::Decay => commands::decay(&cfg),
        Command::Project => commands::project(&cfg),
        Command::Quasi => commands::quasi(&cfg),
        Command::VerifyAll => verify::run_all(cfg.seed).map(|outcomes| {
            print!("{}", verify::table(&outcomes));
            suite_failed = !outcomes.iter().all(verify::Outcome::passed);
            verify::report(&outcomes, cfg.seed)
        }),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    };
    if let Err(msg) = write_report(&cfg, &report) {
        eprintln!("error: {msg}");
        return EXIT_FAILED;
    }
    let failed = report.failures().count();
    if failed > 0 || suite_failed {
        eprintln!("{failed} check(s) failed");
        return EXIT_FAILED;
    }
    EXIT_OK
}
