//! One function per subcommand, each producing a [`Table`].

use fbcap::capacity::{self, CapacityResult};
use fbcap::io::Units;
use fbcap::linalg;
use fbcap::oracle::{self, GenericOptions};
use fbcap::recursion::{self, ModelKind, PowerAllocation};
use fbcap::sim::{self, Innovations, SchemeParams, SimOptions, SimReport};

use crate::args::{
    CapacityArgs, InnovationsArg, Model, OracleArgs, RecursionArgs, RecursionModel, SimulateArgs,
    SpectrumArgs, Verify,
};
use crate::table::{Cell, Table};
use crate::CliError;

/// Agreement required between the root solver and the fixed point.
pub const VERIFY_TOL: f64 = 1e-10;

fn rate_col(u: Units, name: &str) -> String {
    Table::rate_col(u, name)
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::White => "white",
        Model::Ma1 => "ma1",
        Model::Ar1 => "ar1",
        Model::Arma11 => "arma11",
        Model::InterleavedMa2 => "interleaved-ma2",
    }
}

fn solve(model: Model, alpha: f64, beta: f64, snr: f64) -> fbcap::Result<CapacityResult> {
    match model {
        Model::White => {
            let rate = capacity::white_capacity(snr)?;
            Ok(CapacityResult {
                rate_nats: rate,
                x0: (-rate).exp(),
                polynomial_residual: 0.0,
                iterations: 0,
                bracket: (0.0, 1.0),
            })
        }
        Model::Ma1 => capacity::ma1_feedback_capacity(alpha, snr),
        Model::Ar1 => capacity::ar1_achievable_rate(alpha, snr),
        Model::Arma11 => capacity::arma11_conjectured_rate(alpha, beta, snr),
        Model::InterleavedMa2 => capacity::interleaved_ma2_greedy_rate(alpha, snr),
    }
}

pub fn capacity(a: &CapacityArgs, u: Units) -> Result<Table, CliError> {
    let mut cols: Vec<String> = ["model", "alpha", "beta", "snr"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend([rate_col(u, "rate"), "x0".into(), "residual".into()]);
    if a.verify.is_some() {
        if !matches!(a.model, Model::Ma1 | Model::Ar1) {
            return Err(CliError::Usage(
                "--verify fixed-point applies to the ma1 and ar1 models".into(),
            ));
        }
        cols.extend([rate_col(u, "fixed_point"), rate_col(u, "verify_diff")]);
    }
    let mut t = Table::new("capacity", u, cols);
    let mut worst: f64 = 0.0;
    for &alpha in &a.alpha {
        for &snr in &a.snr {
            let r = solve(a.model, alpha, a.beta, snr)?;
            let mut row: Vec<Cell> = vec![
                model_name(a.model).into(),
                alpha.into(),
                a.beta.into(),
                snr.into(),
                u.convert(r.rate_nats).into(),
                r.x0.into(),
                r.polynomial_residual.into(),
            ];
            if let Some(Verify::FixedPoint) = a.verify {
                let fp = match a.model {
                    Model::Ar1 => recursion::ar1_fixed_point(alpha, snr)?,
                    _ => recursion::ma1_fixed_point(alpha, snr)?,
                };
                let diff = (fp.value - r.rate_nats).abs();
                worst = worst.max(diff);
                row.extend([u.convert(fp.value).into(), u.convert(diff).into()]);
            }
            t.push(row);
        }
    }
    if worst > VERIFY_TOL {
        return Err(CliError::Verification(
            t,
            format!("fixed point disagrees with the root by {worst:e} nats"),
        ));
    }
    Ok(t)
}

pub fn recursion(a: &RecursionArgs, u: Units) -> Result<Table, CliError> {
    let kind = match a.model {
        RecursionModel::Ma1 => ModelKind::Ma1,
        RecursionModel::Ar1 => ModelKind::Ar1,
    };
    let fp = match kind {
        ModelKind::Ma1 => recursion::ma1_fixed_point(a.alpha, a.snr)?,
        ModelKind::Ar1 => recursion::ar1_fixed_point(a.alpha, a.snr)?,
    }
    .value;
    let mut t = Table::new(
        "recursion",
        u,
        vec![
            "n".into(),
            rate_col(u, "j_n"),
            rate_col(u, "rate"),
            rate_col(u, "fixed_point"),
            rate_col(u, "gap"),
        ],
    );
    for &n in &a.n {
        let trace = if a.optimize {
            recursion::optimize_allocation(kind, a.alpha, n, a.snr)?.trace
        } else {
            kind.trace(a.alpha, &PowerAllocation::uniform(n, a.snr)?)?
        };
        let rate = trace.per_symbol_rate;
        t.push(vec![
            n.into(),
            u.convert(trace.j_n()).into(),
            u.convert(rate).into(),
            u.convert(fp).into(),
            u.convert(fp - rate).into(),
        ]);
    }
    Ok(t)
}

/// Greedy and generic block rates for one `(alpha, P, n)`.
pub struct OracleRow {
    pub greedy: f64,
    pub generic_modified: f64,
    pub generic_stationary: f64,
    pub second_eigenvalue: f64,
    pub orthogonality: f64,
    pub stop: String,
}

pub fn oracle_row(alpha: f64, snr: f64, n: usize, seed: u64) -> fbcap::Result<OracleRow> {
    let opts = GenericOptions {
        seed,
        ..GenericOptions::default()
    };
    let (g, greedy) = oracle::greedy_block_capacity(alpha, n, snr)?;
    let (_, gm) = oracle::generic_optimize_with(alpha, n, snr, true, &opts)?;
    let (_, gs) = oracle::generic_optimize_with(alpha, n, snr, false, &opts)?;
    let ev = linalg::sym_eigenvalues_desc(&g.strategy.kv);
    let stop = gm
        .diagnostics
        .as_ref()
        .map(|d| {
            serde_json::to_value(d.stop)
                .map_or_else(|_| String::new(), |v| v.as_str().unwrap_or("").to_string())
        })
        .unwrap_or_default();
    Ok(OracleRow {
        greedy: greedy.rate_nats,
        generic_modified: gm.rate_nats,
        generic_stationary: gs.rate_nats,
        second_eigenvalue: ev.get(1).copied().unwrap_or(0.0),
        orthogonality: oracle::check_orthogonality(&g.strategy),
        stop,
    })
}

pub fn oracle_columns(u: Units) -> Vec<String> {
    vec![
        "n".into(),
        rate_col(u, "greedy"),
        rate_col(u, "generic_modified"),
        rate_col(u, "generic_stationary"),
        rate_col(u, "greedy_generic_gap"),
        "second_eigenvalue".into(),
        "orthogonality".into(),
        "generic_stop".into(),
    ]
}

pub fn oracle_cells(n: usize, r: &OracleRow, u: Units) -> Vec<Cell> {
    vec![
        n.into(),
        u.convert(r.greedy).into(),
        u.convert(r.generic_modified).into(),
        u.convert(r.generic_stationary).into(),
        u.convert((r.greedy - r.generic_modified).abs()).into(),
        r.second_eigenvalue.into(),
        r.orthogonality.into(),
        r.stop.as_str().into(),
    ]
}

pub fn oracle(a: &OracleArgs, u: Units) -> Result<Table, CliError> {
    let mut t = Table::new("oracle", u, oracle_columns(u));
    for &n in &a.n {
        let r = oracle_row(a.alpha, a.snr, n, a.seed)?;
        t.push(oracle_cells(n, &r, u));
    }
    Ok(t)
}

fn innovations(i: InnovationsArg) -> Innovations {
    match i {
        InnovationsArg::Gaussian => Innovations::Gaussian,
        InnovationsArg::Uniform => Innovations::Uniform,
    }
}

pub fn check_fraction(f: f64) -> Result<(), CliError> {
    if f.is_finite() && f > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "rate fraction must be positive, got {f}"
        )))
    }
}

pub fn simulate_reports(a: &SimulateArgs) -> Result<Vec<SimReport>, CliError> {
    check_fraction(a.rate_fraction)?;
    let c = capacity::ma1_feedback_capacity(a.alpha, a.snr)?.rate_nats;
    let opts = SimOptions {
        innovations: innovations(a.innovations),
        spectrum: false,
        ..SimOptions::new(a.trials, a.seed)
    };
    a.n.iter()
        .map(|&n| {
            let p = SchemeParams::new(a.alpha, a.snr, n, a.rate_fraction * c)?
                .with_u0_known(!a.hidden_u0);
            Ok(sim::run_montecarlo_with(&p, &opts)?)
        })
        .collect()
}

pub fn simulate_table(reports: &[SimReport], u: Units) -> Table {
    let mut t = Table::new(
        "simulate",
        u,
        vec![
            "n".into(),
            rate_col(u, "rate"),
            rate_col(u, "capacity"),
            "grid_size".into(),
            "trials".into(),
            "errors".into(),
            "error_rate".into(),
            "ci_low".into(),
            "ci_high".into(),
            "erfc_estimate".into(),
            "gaussian_estimate".into(),
            "mse_analytic".into(),
            "mse_empirical".into(),
            rate_col(u, "decay_slope"),
        ],
    );
    for r in reports {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        t.push(vec![
            r.n.into(),
            u.convert(r.rate_nats).into(),
            u.convert(r.capacity_nats).into(),
            r.grid_size.into(),
            r.trials.into(),
            r.errors.into(),
            r.error_rate.into(),
            r.error_ci.low.into(),
            r.error_ci.high.into(),
            r.erfc_estimate.into(),
            r.gaussian_estimate.into(),
            last(&r.mse_analytic).into(),
            last(&r.mse_empirical).into(),
            u.convert(r.decay_slope_nats).into(),
        ]);
    }
    t
}

pub fn spectrum(a: &SpectrumArgs, u: Units) -> Result<(Table, SimReport), CliError> {
    check_fraction(a.rate_fraction)?;
    let c = capacity::ma1_feedback_capacity(a.alpha, a.snr)?.rate_nats;
    let p = SchemeParams::new(a.alpha, a.snr, a.n, a.rate_fraction * c)?;
    let r = sim::run_montecarlo_with(&p, &SimOptions::new(a.trials, a.seed))?;
    let mut t = Table::new(
        "spectrum",
        u,
        vec!["omega".into(), "theoretical".into(), "empirical".into()],
    );
    for s in &r.spectrum {
        t.push(vec![
            s.omega.into(),
            s.theoretical.into(),
            s.empirical.into(),
        ]);
    }
    Ok((t, r))
}
