use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scheme::{self, DecoderModel, SchemeParams};
use super::spectrum;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{self, Interval};

pub const MIN_TRIALS: u64 = 1000;
const CHUNK: u64 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovations {
    Gaussian,
    /// Uniform on `[-√3, √3]`, unit variance.
    Uniform,
}

impl Innovations {
    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            Innovations::Gaussian => rng.sample(StandardNormal),
            Innovations::Uniform => rng.random_range(-3f64.sqrt()..3f64.sqrt()),
        }
    }
}

/// Innovations `U_0..U_{len-1}`.
pub fn sample_innovations<R: Rng>(rng: &mut R, len: usize, kind: Innovations) -> Vec<f64> {
    (0..len).map(|_| kind.sample(rng)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    pub innovations: Innovations,
    /// Accumulate the averaged periodogram of `Y_2..Y_n`.
    pub spectrum: bool,
}

impl SimOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            innovations: Innovations::Gaussian,
            spectrum: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub theoretical: f64,
    pub empirical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub alpha: f64,
    pub snr: f64,
    pub rate_nats: f64,
    pub capacity_nats: f64,
    pub grid_size: u64,
    pub u0_known: bool,
    pub innovations: Innovations,
    pub trials: u64,
    pub seed: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub error_ci: Interval,
    /// Leading-order erfc prediction.
    pub erfc_estimate: f64,
    /// Prediction from the exact ML variance.
    pub gaussian_estimate: f64,
    /// `var(X_1 | Y^k)` for Gaussian `X_1`, `k = 1..n`.
    pub mse_analytic: Vec<f64>,
    /// `var(θ̂_k − θ)` from the model, `k = 1..n`.
    pub ml_var_analytic: Vec<f64>,
    /// Mean of `(θ̂_k − θ)²` over trials, `k = 1..n`.
    pub mse_empirical: Vec<f64>,
    /// Mean of `θ̂_n − θ`.
    pub bias: f64,
    /// Least-squares slope of `ln var(X_1 | Y^k)` over the last `n/2` symbols.
    pub decay_slope_nats: f64,
    pub empirical_decay_slope_nats: f64,
    /// Mean of `X_n²`.
    pub final_input_power: f64,
    pub spectrum: Vec<SpectrumPoint>,
}

#[derive(Clone, Debug)]
struct Accumulator {
    errors: u64,
    sq_err: Vec<f64>,
    bias: f64,
    x_last_sq: f64,
    periodogram: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize, bins: usize) -> Self {
        Self {
            errors: 0,
            sq_err: vec![0.0; n],
            bias: 0.0,
            x_last_sq: 0.0,
            periodogram: vec![0.0; bins],
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.errors += other.errors;
        self.bias += other.bias;
        self.x_last_sq += other.x_last_sq;
        for (a, b) in self.sq_err.iter_mut().zip(&other.sq_err) {
            *a += b;
        }
        for (a, b) in self.periodogram.iter_mut().zip(&other.periodogram) {
            *a += b;
        }
    }
}

/// Fourier frequencies `2πj/m`, `j = 0..=m/2`, for a segment of length `m`.
fn frequencies(m: usize) -> Vec<f64> {
    (0..=m / 2)
        .map(|j| 2.0 * PI * j as f64 / m as f64)
        .collect()
}

fn trial(
    model: &DecoderModel,
    opts: &SimOptions,
    index: u64,
    twiddles: &[(Vec<f64>, Vec<f64>)],
    acc: &mut Accumulator,
) -> Result<()> {
    let p = model.params();
    let mut r = rng::stream(opts.seed, index);
    let message = r.random_range(0..p.grid_size);
    let u = sample_innovations(&mut r, p.n + 1, opts.innovations);
    let theta = p.theta(message)?;
    let t = scheme::encode_theta(p, theta, &u)?;
    let u0 = p.u0_known.then_some(u[0]);
    let est = model.estimates_by_time(&t.y, u0)?;
    let last = *est.last().expect("n >= 1");
    if p.nearest_index(last) != message {
        acc.errors += 1;
    }
    for (s, e) in acc.sq_err.iter_mut().zip(&est) {
        *s += (e - theta).powi(2);
    }
    acc.bias += last - theta;
    acc.x_last_sq += t.x[p.n - 1].powi(2);
    let seg = &t.y[1..];
    for (bin, (cos, sin)) in acc.periodogram.iter_mut().zip(twiddles) {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, y) in seg.iter().enumerate() {
            re += y * cos[k];
            im -= y * sin[k];
        }
        *bin += (re * re + im * im) / seg.len() as f64;
    }
    Ok(())
}

/// Monte Carlo run of the coding scheme with Gaussian innovations.
pub fn run_montecarlo(params: &SchemeParams, trials: u64, seed: u64) -> Result<SimReport> {
    run_montecarlo_with(params, &SimOptions::new(trials, seed))
}

/// Monte Carlo run with explicit options. Trial `i` draws from stream
/// `(seed, i)` and trials are summed in fixed-size chunks in index order,
/// so the report does not depend on thread scheduling.
pub fn run_montecarlo_with(params: &SchemeParams, opts: &SimOptions) -> Result<SimReport> {
    if opts.trials < MIN_TRIALS {
        return Err(Error::domain(format!(
            "need at least {MIN_TRIALS} trials, got {}",
            opts.trials
        )));
    }
    let n = params.n;
    let model = DecoderModel::new(params);
    let seg_len = n.saturating_sub(1);
    let omegas = if opts.spectrum && seg_len >= 2 {
        frequencies(seg_len)
    } else {
        Vec::new()
    };
    let twiddles: Vec<(Vec<f64>, Vec<f64>)> = omegas
        .iter()
        .map(|w| {
            let k = 0..seg_len;
            (
                k.clone().map(|k| (w * k as f64).cos()).collect(),
                k.map(|k| (w * k as f64).sin()).collect(),
            )
        })
        .collect();
    let chunks = opts.trials.div_ceil(CHUNK);
    let partials: Vec<Result<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new(n, omegas.len());
            let end = ((c + 1) * CHUNK).min(opts.trials);
            for i in c * CHUNK..end {
                trial(&model, opts, i, &twiddles, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new(n, omegas.len());
    for part in partials {
        total.merge(&part?);
    }
    let tf = opts.trials as f64;
    let mse_analytic = model.mmse_by_time();
    let mse_empirical: Vec<f64> = total.sq_err.iter().map(|s| s / tf).collect();
    let spectrum = omegas
        .iter()
        .zip(&total.periodogram)
        .map(|(&omega, &pg)| {
            Ok(SpectrumPoint {
                omega,
                theoretical: spectrum::output_spectrum_theoretical(params, omega)?,
                empirical: pg / tf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport {
        n,
        alpha: params.alpha,
        snr: params.snr,
        rate_nats: params.rate_nats,
        capacity_nats: params.capacity_nats,
        grid_size: params.grid_size,
        u0_known: params.u0_known,
        innovations: opts.innovations,
        trials: opts.trials,
        seed: opts.seed,
        errors: total.errors,
        error_rate: total.errors as f64 / tf,
        error_ci: stats::wilson_interval(total.errors, opts.trials, stats::Z95),
        erfc_estimate: scheme::erfc_error_estimate(params),
        gaussian_estimate: scheme::gaussian_error_estimate(params),
        decay_slope_nats: tail_slope(&mse_analytic),
        empirical_decay_slope_nats: tail_slope(&mse_empirical),
        mse_analytic,
        ml_var_analytic: model.ml_variance_by_time(),
        mse_empirical,
        bias: total.bias / tf,
        final_input_power: total.x_last_sq / tf,
        spectrum,
    })
}

/// Least-squares slope of `ln v_k` against `k` over the last `n/2` entries;
/// NaN when fewer than two usable points.
pub fn tail_slope(values: &[f64]) -> f64 {
    let n = values.len();
    let start = n - n / 2;
    let (ks, ls): (Vec<f64>, Vec<f64>) = (start..n)
        .filter(|&k| values[k] > 0.0)
        .map(|k| ((k + 1) as f64, values[k].ln()))
        .unzip();
    stats::ls_slope(&ks, &ls).unwrap_or(f64::NAN)
}

/// Relative L² distance between the empirical and theoretical spectra.
pub fn spectrum_relative_error(points: &[SpectrumPoint]) -> f64 {
    let num: f64 = points
        .iter()
        .map(|p| (p.empirical - p.theoretical).powi(2))
        .sum();
    let den: f64 = points.iter().map(|p| p.theoretical.powi(2)).sum();
    (num / den).sqrt()
}
