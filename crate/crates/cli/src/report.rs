//! The reproduction bundle: one CSV per table plus a summary.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use fbcap::capacity;
use fbcap::io::{self, Units};
use fbcap::recursion::{self, PowerAllocation};
use fbcap::sim::{self, SchemeParams, SimOptions};

use crate::args::ReportArgs;
use crate::commands::{oracle_cells, oracle_columns, oracle_row};
use crate::table::{Cell, Table};

pub const CAPACITY_ALPHAS: [f64; 6] = [0.0, 0.3, 0.5, 0.7, 0.9, 0.99];
pub const CONVERGENCE_ALPHAS: [f64; 3] = [0.3, 0.7, 0.99];
pub const CONVERGENCE_SNRS: [f64; 3] = [0.5, 1.0, 4.0];
pub const CONVERGENCE_NS: [usize; 5] = [1, 10, 100, 1000, 10_000];
pub const CONVERGENCE_TOL: f64 = 1e-3;
pub const ORACLE_ALPHAS: [f64; 2] = [0.3, 0.7];
pub const ORACLE_SNRS: [f64; 2] = [1.0, 4.0];
pub const ORACLE_TOL: f64 = 1e-5;
pub const SIM_NS: [usize; 4] = [10, 15, 20, 25];

pub struct Section {
    pub name: &'static str,
    pub files: Vec<String>,
    pub outcome: Result<String, String>,
}

fn write_table(dir: &Path, file: &str, t: &Table) -> anyhow::Result<()> {
    t.write_csv(BufWriter::new(File::create(dir.join(file))?))
}

fn snr_grid() -> Vec<f64> {
    (0..=40)
        .map(|i| 10f64.powf(-2.0 + 0.1 * i as f64))
        .collect()
}

fn capacity_curves(dir: &Path, u: Units) -> anyhow::Result<String> {
    let mut t = Table::new(
        "capacity_vs_snr",
        u,
        vec![
            "alpha".into(),
            "snr".into(),
            Table::rate_col(u, "capacity"),
            Table::rate_col(u, "white"),
        ],
    );
    for &a in &CAPACITY_ALPHAS {
        for p in snr_grid() {
            let c = capacity::ma1_feedback_capacity(a, p)?.rate_nats;
            let w = capacity::white_capacity(p)?;
            t.push(vec![
                a.into(),
                p.into(),
                u.convert(c).into(),
                u.convert(w).into(),
            ]);
        }
    }
    write_table(dir, "capacity_vs_snr.csv", &t)?;
    Ok(format!("{} rows", t.rows.len()))
}

fn convergence(dir: &Path, u: Units) -> anyhow::Result<String> {
    let mut t = Table::new(
        "convergence",
        u,
        vec![
            "alpha".into(),
            "snr".into(),
            "n".into(),
            Table::rate_col(u, "rate"),
            Table::rate_col(u, "fixed_point"),
            Table::rate_col(u, "gap"),
        ],
    );
    let mut worst: f64 = 0.0;
    let last = *CONVERGENCE_NS.last().expect("nonempty");
    for &a in &CONVERGENCE_ALPHAS {
        for &p in &CONVERGENCE_SNRS {
            let fp = recursion::ma1_fixed_point(a, p)?.value;
            for &n in &CONVERGENCE_NS {
                let r =
                    recursion::ma1_recursion(a, &PowerAllocation::uniform(n, p)?)?.per_symbol_rate;
                if n == last {
                    worst = worst.max((fp - r).abs());
                }
                t.push(vec![
                    a.into(),
                    p.into(),
                    n.into(),
                    u.convert(r).into(),
                    u.convert(fp).into(),
                    u.convert(fp - r).into(),
                ]);
            }
        }
    }
    write_table(dir, "convergence.csv", &t)?;
    anyhow::ensure!(
        worst <= CONVERGENCE_TOL,
        "final |rate - fixed point| {worst:e} exceeds {CONVERGENCE_TOL:e} nats"
    );
    Ok(format!("final max |rate - fixed point| {worst:.3e} nats"))
}

fn oracle_table(dir: &Path, u: Units, seed: u64) -> anyhow::Result<String> {
    let mut cols = vec!["alpha".to_string(), "snr".to_string()];
    cols.extend(oracle_columns(u));
    let mut t = Table::new("oracle", u, cols);
    let mut worst: f64 = 0.0;
    for &a in &ORACLE_ALPHAS {
        for &p in &ORACLE_SNRS {
            for n in 1..=fbcap::oracle::MAX_GENERIC_N {
                let r = oracle_row(a, p, n, seed)?;
                worst = worst.max((r.greedy - r.generic_modified).abs());
                let mut row: Vec<Cell> = vec![a.into(), p.into()];
                row.extend(oracle_cells(n, &r, u));
                t.push(row);
            }
        }
    }
    write_table(dir, "oracle.csv", &t)?;
    anyhow::ensure!(
        worst <= ORACLE_TOL,
        "max |greedy - generic| {worst:e} exceeds {ORACLE_TOL:e} nats"
    );
    Ok(format!("max |greedy - generic| {worst:.3e} nats"))
}

fn simulation(dir: &Path, u: Units, a: &ReportArgs) -> anyhow::Result<(String, Vec<String>)> {
    anyhow::ensure!(
        a.rate_fraction.is_finite() && a.rate_fraction > 0.0,
        "rate fraction must be positive, got {}",
        a.rate_fraction
    );
    let c = capacity::ma1_feedback_capacity(a.alpha, a.snr)?.rate_nats;
    let reports = SIM_NS
        .iter()
        .map(|&n| {
            let p = SchemeParams::new(a.alpha, a.snr, n, a.rate_fraction * c)?;
            sim::run_montecarlo_with(&p, &SimOptions::new(a.trials, a.seed))
        })
        .collect::<fbcap::Result<Vec<_>>>()?;
    let mut files = vec!["simulation.csv".to_string()];
    io::write_sim_csv(
        &reports,
        u,
        BufWriter::new(File::create(dir.join(&files[0]))?),
    )?;
    for r in &reports {
        let name = format!("mse_n{}.csv", r.n);
        io::write_mse_csv(r, BufWriter::new(File::create(dir.join(&name))?))?;
        files.push(name);
    }
    let longest = reports.last().expect("nonempty");
    io::write_spectrum_csv(
        &longest.spectrum,
        BufWriter::new(File::create(dir.join("spectrum.csv"))?),
    )?;
    files.push("spectrum.csv".into());
    let rates: Vec<String> = reports
        .iter()
        .map(|r| format!("n={} {:.3e}", r.n, r.error_rate))
        .collect();
    Ok((format!("error rates {}", rates.join(", ")), files))
}

/// Runs every section; a failing section does not stop the others.
pub fn run(dir: &Path, u: Units, a: &ReportArgs) -> anyhow::Result<Vec<Section>> {
    std::fs::create_dir_all(dir)?;
    let plain = |name, file: &str, r: anyhow::Result<String>| Section {
        name,
        files: vec![file.to_string()],
        outcome: r.map_err(|e| e.to_string()),
    };
    let mut out = vec![
        plain("capacity", "capacity_vs_snr.csv", capacity_curves(dir, u)),
        plain("convergence", "convergence.csv", convergence(dir, u)),
        plain("oracle", "oracle.csv", oracle_table(dir, u, a.seed)),
    ];
    out.push(match simulation(dir, u, a) {
        Ok((msg, files)) => Section {
            name: "simulation",
            files,
            outcome: Ok(msg),
        },
        Err(e) => Section {
            name: "simulation",
            files: vec!["simulation.csv".into()],
            outcome: Err(e.to_string()),
        },
    });
    Ok(out)
}

pub fn summary(sections: &[Section], u: Units) -> Table {
    let mut t = Table::new(
        "report",
        u,
        vec![
            "section".into(),
            "status".into(),
            "files".into(),
            "detail".into(),
        ],
    );
    for s in sections {
        let (status, detail) = match &s.outcome {
            Ok(m) => ("ok", m.as_str()),
            Err(e) => ("failed", e.as_str()),
        };
        t.push(vec![
            s.name.into(),
            status.into(),
            s.files.join(" ").as_str().into(),
            detail.into(),
        ]);
    }
    t
}
