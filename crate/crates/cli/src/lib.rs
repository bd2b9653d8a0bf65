//! Command-line front end: comparison tables, verification suites, Monte
//! Carlo sampling, memory planning and the random access code demo.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{FlagValues, Format, RunConfig, Task};
use crate::error::CliError;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "pbsp", version, about = "Port-based state preparation and programmable processors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Comparison table as CSV or JSON.
    Table {
        #[arg(value_enum)]
        which: TableKind,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run every invariant suite; exit status 1 if any row fails.
    Verify {
        /// Scale one POVM element by 1 + 1e-3 (checks the checker).
        #[arg(long, hide = true)]
        perturb: bool,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Monte Carlo outcome frequencies against the closed forms.
    Sample {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Programmable processor tools.
    Uphp {
        #[command(subcommand)]
        action: UphpAction,
    },
    /// Random access code tools.
    Qrac {
        #[command(subcommand)]
        action: QracAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Pbsp,
    Pbt,
    Uphp,
    Qrac,
}

#[derive(Debug, Subcommand)]
pub enum UphpAction {
    /// Port count and memory size for each (d, eps).
    Plan {
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Debug, Subcommand)]
pub enum QracAction {
    /// Guessing probabilities of a code built from the processor.
    Demo {
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonOpts {
    /// Qudit dimensions: 3, 2,3 or 2..4.
    #[arg(long, value_name = "LIST")]
    pub d: Option<String>,
    /// Port counts: 3, 1,2 or 1..4.
    #[arg(long = "N", visible_alias = "n", value_name = "LIST")]
    pub n: Option<String>,
    /// Error parameters: 0.1 or 0.5,0.1.
    #[arg(long, visible_alias = "epsilon", value_name = "LIST")]
    pub eps: Option<String>,
    /// Monte Carlo trials per grid point.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest state-vector dimension evaluated densely.
    #[arg(long, value_name = "DIM")]
    pub dense_budget: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

impl CommonOpts {
    fn into_flags(self, perturb: bool) -> FlagValues {
        FlagValues {
            d: self.d,
            n: self.n,
            eps: self.eps,
            trials: self.trials,
            seed: self.seed,
            dense_budget: self.dense_budget,
            format: self.format,
            out: self.out,
            config: self.config,
            perturb,
        }
    }
}

impl Command {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let (task, opts, perturb) = match self {
            Command::Table { which, opts } => {
                let task = match which {
                    TableKind::Pbsp => Task::TablePbsp,
                    TableKind::Pbt => Task::TablePbt,
                    TableKind::Uphp => Task::TableUphp,
                    TableKind::Qrac => Task::TableQrac,
                };
                (task, opts, false)
            }
            Command::Verify { perturb, opts } => (Task::Verify, opts, perturb),
            Command::Sample { opts } => (Task::Sample, opts, false),
            Command::Uphp { action: UphpAction::Plan { opts } } => (Task::UphpPlan, opts, false),
            Command::Qrac { action: QracAction::Demo { opts } } => (Task::QracDemo, opts, false),
        };
        RunConfig::resolve(task, opts.into_flags(perturb))
    }
}

/// Builds the report for a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let rows = match cfg.task {
        Task::TablePbsp => commands::table_pbsp(cfg)?,
        Task::TablePbt => commands::table_pbt(cfg)?,
        Task::TableUphp => commands::table_uphp(cfg)?,
        Task::TableQrac => commands::table_qrac(cfg)?,
        Task::Verify => commands::verify(cfg)?,
        Task::Sample => commands::sample(cfg)?,
        Task::UphpPlan => commands::uphp_plan(cfg)?,
        Task::QracDemo => commands::qrac_demo(cfg)?,
    };
    Ok(Report::new(rows))
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), CliError> {
    let io_err = |path: String| move |source| CliError::Io { path, source };
    match &cfg.out {
        Some(path) => {
            let shown = path.display().to_string();
            let file = File::create(path).map_err(io_err(shown.clone()))?;
            let mut w = BufWriter::new(file);
            write_report(report, cfg.format, &mut w).map_err(io_err(shown.clone()))?;
            w.flush().map_err(io_err(shown))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_report(report, cfg.format, &mut w).map_err(io_err("<stdout>".into()))?;
            w.flush().map_err(io_err("<stdout>".into()))
        }
    }
}

fn write_report<W: Write>(report: &Report, format: Format, w: W) -> std::io::Result<()> {
    match format {
        Format::Csv => report.write_csv(w),
        Format::Json => report.write_json(w),
    }
}

/// Runs one invocation and writes the report. Verification failures are
/// returned after the report is written.
pub fn run_config(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = execute(cfg)?;
    emit(&report, cfg)?;
    if cfg.task == Task::Verify {
        let failures = report.failures();
        if !failures.is_empty() {
            return Err(CliError::Verification(failures));
        }
    }
    Ok(report)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.command.resolve().and_then(|cfg| run_config(&cfg));
    match result {
        Ok(report) => {
            for id in report.flagged() {
                eprintln!("flagged: {id} lies outside three standard errors");
            }
            0
        }
        Err(CliError::Verification(ids)) => {
            for id in &ids {
                eprintln!("failed: {id}");
            }
            eprintln!("verification failed: {} row(s)", ids.len());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
