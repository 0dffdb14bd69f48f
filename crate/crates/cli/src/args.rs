//! Command-line definitions and `key=value` config-file defaults.

use std::path::{Path, PathBuf};

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use fbcap::io::Units;

#[derive(Debug, Parser)]
#[command(
    name = "fbcap",
    version,
    about = "Feedback capacity of Gaussian channels with MA(1) noise"
)]
pub struct Cli {
    /// Rate units used in every output.
    #[arg(long, global = true, value_enum, default_value = "nats")]
    pub units: UnitsArg,

    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,

    /// Output file (a directory for `report`); stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// File of `key=value` lines supplying defaults; flags override.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Nats,
    Bits,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Nats => Units::Nats,
            UnitsArg::Bits => Units::Bits,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    White,
    Ma1,
    Ar1,
    Arma11,
    InterleavedMa2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RecursionModel {
    Ma1,
    Ar1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verify {
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InnovationsArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form capacities and rates, optionally over alpha and SNR grids.
    Capacity(CapacityArgs),
    /// Finite-n rates J_n / 2n from the scalar recursions.
    Recursion(RecursionArgs),
    /// Block capacity by the sequential construction and the generic optimizer.
    Oracle(OracleArgs),
    /// Monte Carlo simulation of the feedback coding scheme.
    Simulate(SimulateArgs),
    /// Empirical versus theoretical output spectrum of the coding scheme.
    Spectrum(SpectrumArgs),
    /// Writes the CSV bundle of capacity, convergence, oracle and simulation tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long, value_enum, default_value = "ma1")]
    pub model: Model,
    /// Comma-separated list sweeps the grid.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0",
        allow_hyphen_values = true
    )]
    pub alpha: Vec<f64>,
    /// ARMA(1,1) moving-average coefficient.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub snr: Vec<f64>,
    /// Cross-check against an independent computation.
    #[arg(long, value_enum)]
    pub verify: Option<Verify>,
}

#[derive(Debug, Args)]
pub struct RecursionArgs {
    #[arg(long, value_enum, default_value = "ma1")]
    pub model: RecursionModel,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000")]
    pub n: Vec<usize>,
    /// Optimize the power allocation instead of spending P every symbol.
    #[arg(long)]
    pub optimize: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, value_delimiter = ',', default_value = "10,15,20,25")]
    pub n: Vec<usize>,
    /// Transmission rate as a fraction of the feedback capacity.
    #[arg(long, default_value_t = 0.9)]
    pub rate_fraction: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub innovations: InnovationsArg,
    /// The decoder does not know the time-zero noise innovation.
    #[arg(long)]
    pub hidden_u0: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 65)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rate_fraction: f64,
    #[arg(long, default_value_t = 16_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Noise coefficient of the simulation tables.
    #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub rate_fraction: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Capacity(_) => "capacity",
            Command::Recursion(_) => "recursion",
            Command::Oracle(_) => "oracle",
            Command::Simulate(_) => "simulate",
            Command::Spectrum(_) => "spectrum",
            Command::Report(_) => "report",
        }
    }
}

const GLOBAL_KEYS: [&str; 3] = ["units", "format", "output"];

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Parses `argv`, applying config-file entries as defaults when `--config`
/// is present.
pub fn parse<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let first = Cli::try_parse_from(&argv)?;
    let Some(path) = first.config.clone() else {
        return Ok(first);
    };
    let entries = load_config(&path)?;
    let mut cmd = Cli::command();
    let sub = first.command.name();
    for (key, value) in entries {
        let valid_sub = cmd.find_subcommand(sub).is_some_and(|s| {
            s.get_arguments()
                .any(|a| a.get_id() == key.replace('-', "_").as_str())
        });
        if GLOBAL_KEYS.contains(&key.as_str()) {
            let id = key.clone();
            cmd = cmd.mut_arg(id, |a| a.default_value(value));
        } else if valid_sub {
            let id = key.replace('-', "_");
            cmd = cmd.mut_subcommand(sub, |s| s.mut_arg(id, |a| a.default_value(value)));
        } else {
            return Err(Cli::command().error(
                clap::error::ErrorKind::UnknownArgument,
                format!("config key '{key}' is not an option of '{sub}'"),
            ));
        }
    }
    let matches: ArgMatches = cmd.try_get_matches_from(&argv)?;
    Cli::from_arg_matches(&matches)
}

fn load_config(path: &Path) -> Result<Vec<(String, String)>, clap::Error> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Cli::command().error(
            clap::error::ErrorKind::Io,
            format!("cannot read config {}: {e}", path.display()),
        )
    })?;
    parse_config(&text).map_err(|e| Cli::command().error(clap::error::ErrorKind::InvalidValue, e))
}
