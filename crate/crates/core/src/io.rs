//! Serialization of results: versioned JSON and plot-ready CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::sim::{SimReport, SpectrumPoint};

/// Version of every JSON document this crate emits.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Converts a rate given in nats.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

impl std::str::FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Units::Nats),
            "bits" => Ok(Units::Bits),
            other => Err(Error::domain(format!("unknown units '{other}'"))),
        }
    }
}

/// Wraps a payload as `{"schema_version", "units", "kind", "data"}`.
pub fn envelope<T: Serialize>(kind: &str, units: Units, data: &T) -> Result<Value> {
    let data = serde_json::to_value(data).map_err(|e| Error::domain(e.to_string()))?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "units": units.label(),
        "data": data,
    }))
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::domain(format!("write failed: {e}"))
}

/// One CSV row per simulated block length.
pub fn write_sim_csv<W: Write>(reports: &[SimReport], units: Units, out: W) -> Result<()> {
    let u = units.label();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n".to_string(),
        format!("rate_{u}"),
        format!("capacity_{u}"),
        "grid_size".into(),
        "trials".into(),
        "errors".into(),
        "error_rate".into(),
        "ci_low".into(),
        "ci_high".into(),
        "erfc_estimate".into(),
        "gaussian_estimate".into(),
        "mse_analytic".into(),
        "ml_var_analytic".into(),
        "mse_empirical".into(),
        format!("decay_slope_{u}"),
    ])
    .map_err(csv_err)?;
    for r in reports {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        w.write_record([
            r.n.to_string(),
            fmt(units.convert(r.rate_nats)),
            fmt(units.convert(r.capacity_nats)),
            r.grid_size.to_string(),
            r.trials.to_string(),
            r.errors.to_string(),
            fmt(r.error_rate),
            fmt(r.error_ci.low),
            fmt(r.error_ci.high),
            fmt(r.erfc_estimate),
            fmt(r.gaussian_estimate),
            fmt(last(&r.mse_analytic)),
            fmt(last(&r.ml_var_analytic)),
            fmt(last(&r.mse_empirical)),
            fmt(units.convert(r.decay_slope_nats)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Per-time MSE table for one report.
pub fn write_mse_csv<W: Write>(report: &SimReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "mse_analytic", "ml_var_analytic", "mse_empirical"])
        .map_err(csv_err)?;
    for k in 0..report.n {
        w.write_record([
            (k + 1).to_string(),
            fmt(report.mse_analytic[k]),
            fmt(report.ml_var_analytic[k]),
            fmt(report.mse_empirical[k]),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_spectrum_csv<W: Write>(points: &[SpectrumPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega", "theoretical", "empirical"])
        .map_err(csv_err)?;
    for p in points {
        w.write_record([fmt(p.omega), fmt(p.theoretical), fmt(p.empirical)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Shortest representation that round-trips.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}
