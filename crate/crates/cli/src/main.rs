//! `fbcap`: command-line front end of the feedback-capacity toolkit.

mod args;
mod commands;
mod report;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use fbcap::io::{envelope, Units};
use serde_json::json;

use args::{Command, Format};
use table::Table;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    /// A cross-check failed; the table is still written.
    Verification(Table, String),
    Io(anyhow::Error),
}

impl From<fbcap::Error> for CliError {
    fn from(e: fbcap::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.into())
    }
}

fn sink(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(
    t: &Table,
    format: Format,
    extra: Option<serde_json::Value>,
    out: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Csv => t.write_csv(&mut w)?,
        Format::Table => t.write_text(&mut w)?,
        Format::Json => {
            let data = match extra {
                Some(x) => json!({ "rows": t.rows_json(), "reports": x }),
                None => t.rows_json(),
            };
            let doc = envelope(&t.kind, t.units, &data)?;
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: &args::Cli) -> Result<(), CliError> {
    let u: Units = cli.units.into();
    let (table, extra) = match &cli.command {
        Command::Capacity(a) => match commands::capacity(a, u) {
            Err(CliError::Verification(t, msg)) => {
                emit(&t, cli.format, None, &cli.output)?;
                return Err(CliError::Numerical(msg));
            }
            other => (other?, None),
        },
        Command::Recursion(a) => (commands::recursion(a, u)?, None),
        Command::Oracle(a) => (commands::oracle(a, u)?, None),
        Command::Simulate(a) => {
            let reports = commands::simulate_reports(a)?;
            let extra = serde_json::to_value(&reports).map_err(anyhow::Error::from)?;
            (commands::simulate_table(&reports, u), Some(extra))
        }
        Command::Spectrum(a) => {
            let (t, r) = commands::spectrum(a, u)?;
            let extra = json!({
                "max_relative_error": fbcap::sim::spectrum_relative_error(&r.spectrum),
                "trials": r.trials,
                "seed": r.seed,
            });
            (t, Some(extra))
        }
        Command::Report(a) => {
            let dir = cli
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from("fbcap-report"));
            let sections = report::run(&dir, u, a)?;
            let summary = report::summary(&sections, u);
            emit(&summary, cli.format, None, &None)?;
            let failed: Vec<&str> = sections
                .iter()
                .filter(|s| s.outcome.is_err())
                .map(|s| s.name)
                .collect();
            if !failed.is_empty() {
                return Err(CliError::Numerical(format!(
                    "report sections failed: {}",
                    failed.join(", ")
                )));
            }
            return Ok(());
        }
    };
    emit(&table, cli.format, extra, &cli.output)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match args::parse(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Numerical(m)) | Err(CliError::Verification(_, m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
