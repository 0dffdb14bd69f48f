//! Gaussian noise processes: covariance blocks, spectra and entropy rates.
//!
//! All processes are driven by white innovations `U_i` with variance
//! `innovation_variance`:
//!
//! * `White`:          `Z_i = U_i`
//! * `Ma1`:            `Z_i = U_i + α U_{i-1}`
//! * `Ar1`:            `Z_i = α Z_{i-1} + U_i`, started in its stationary law
//! * `Arma11`:         `Z_i = β Z_{i-1} + α U_{i-1} + U_i`, stationary
//! * `InterleavedMa2`: `Z_i = U_i + α U_{i-2}`

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::linalg;
use crate::quadrature;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseProcess {
    White,
    Ma1 { alpha: f64 },
    Ar1 { alpha: f64 },
    Arma11 { alpha: f64, beta: f64 },
    InterleavedMa2 { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub process: NoiseProcess,
    pub innovation_variance: f64,
}

impl NoiseModel {
    pub fn white() -> Self {
        Self::unit(NoiseProcess::White)
    }

    pub fn ma1(alpha: f64) -> Self {
        Self::unit(NoiseProcess::Ma1 { alpha })
    }

    pub fn ar1(alpha: f64) -> Self {
        Self::unit(NoiseProcess::Ar1 { alpha })
    }

    pub fn arma11(alpha: f64, beta: f64) -> Self {
        Self::unit(NoiseProcess::Arma11 { alpha, beta })
    }

    pub fn interleaved_ma2(alpha: f64) -> Self {
        Self::unit(NoiseProcess::InterleavedMa2 { alpha })
    }

    fn unit(process: NoiseProcess) -> Self {
        Self {
            process,
            innovation_variance: 1.0,
        }
    }

    pub fn with_variance(mut self, innovation_variance: f64) -> Self {
        self.innovation_variance = innovation_variance;
        self
    }

    /// Checks parameter ranges. MA(1) accepts any finite `α` so that
    /// unnormalized models (`|α| > 1`) can still be interrogated; see
    /// [`normalize_ma1`].
    pub fn validate(&self) -> Result<()> {
        ensure_positive("innovation_variance", self.innovation_variance)?;
        match self.process {
            NoiseProcess::White => Ok(()),
            NoiseProcess::Ma1 { alpha } => ensure_finite("alpha", alpha),
            NoiseProcess::Ar1 { alpha } => stable("alpha", alpha),
            NoiseProcess::Arma11 { alpha, beta } => {
                stable("alpha", alpha)?;
                stable("beta", beta)
            }
            NoiseProcess::InterleavedMa2 { alpha } => {
                ensure_finite("alpha", alpha)?;
                if alpha.abs() > 1.0 {
                    return Err(Error::domain(format!(
                        "interleaved MA(2) needs |alpha| <= 1, got {alpha}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Autocovariance at lag `k` (in units of the innovation variance times
    /// `innovation_variance`).
    pub fn autocovariance(&self, lag: usize) -> f64 {
        let v = self.innovation_variance;
        let g = match self.process {
            NoiseProcess::White => (lag == 0) as u8 as f64,
            NoiseProcess::Ma1 { alpha } => match lag {
                0 => 1.0 + alpha * alpha,
                1 => alpha,
                _ => 0.0,
            },
            NoiseProcess::Ar1 { alpha } => alpha.powi(lag as i32) / (1.0 - alpha * alpha),
            NoiseProcess::Arma11 { alpha, beta } => {
                let d = 1.0 - beta * beta;
                match lag {
                    0 => (1.0 + 2.0 * alpha * beta + alpha * alpha) / d,
                    k => beta.powi(k as i32 - 1) * (1.0 + alpha * beta) * (alpha + beta) / d,
                }
            }
            NoiseProcess::InterleavedMa2 { alpha } => match lag {
                0 => 1.0 + alpha * alpha,
                2 => alpha,
                _ => 0.0,
            },
        };
        g * v
    }
}

fn stable(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x.abs() >= 1.0 {
        return Err(Error::domain(format!(
            "{name} must satisfy |{name}| < 1, got {x}"
        )));
    }
    Ok(())
}

/// Symmetric `n × n` noise covariance block.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
}

impl CovMatrix {
    /// Wraps a matrix, checking symmetry and positive semidefiniteness.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::domain(
                "covariance must be a non-empty square matrix",
            ));
        }
        let asym = linalg::max_abs(&(&entries - entries.transpose()));
        if asym > 1e-12 * linalg::max_abs(&entries).max(1.0) {
            return Err(Error::domain(format!(
                "covariance is not symmetric ({asym:e})"
            )));
        }
        linalg::psd_factor(&entries, 1e-12)?;
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn logdet(&self) -> Result<f64> {
        linalg::logdet_spd(&self.entries)
    }

    pub fn det(&self) -> Result<f64> {
        self.logdet().map(f64::exp)
    }

    /// Lower Cholesky factor; fails for singular covariances.
    pub fn cholesky_factor(&self) -> Result<DMatrix<f64>> {
        self.entries
            .clone()
            .cholesky()
            .map(|c| c.unpack())
            .ok_or_else(|| Error::domain("covariance is singular"))
    }

    pub fn is_toeplitz(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let d = i.abs_diff(j);
                (self.entries[(i, j)] - self.entries[(d, 0)]).abs() <= tol
            })
        })
    }
}

/// Maps an MA(1) channel with `|α| > 1` to the equivalent channel with
/// parameter `1/α`, unit innovation and signal-to-noise ratio `P/α²`.
pub fn normalize_ma1(alpha: f64, power: f64) -> Result<(f64, f64)> {
    ensure_finite("alpha", alpha)?;
    ensure_positive("power", power)?;
    if alpha.abs() <= 1.0 {
        Ok((alpha, power))
    } else {
        Ok((1.0 / alpha, power / (alpha * alpha)))
    }
}

/// Exact covariance of `(Z_1, …, Z_n)`.
pub fn covariance(model: &NoiseModel, n: usize) -> Result<CovMatrix> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    model.validate()?;
    let lags: Vec<f64> = (0..n).map(|k| model.autocovariance(k)).collect();
    let m = DMatrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)]);
    CovMatrix::new(m)
}

/// Unit-lower-triangular Toeplitz factor `H_Z` with `α` on the subdiagonal.
pub fn ma1_innovation_factor(alpha: f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == j + 1 {
            alpha
        } else {
            0.0
        }
    })
}

/// Covariance `H_Z H_Z^T` of the MA(1) block when the time-zero innovation is
/// known to both ends. It differs from the stationary block only in entry
/// (1,1), by `α²`.
pub fn covariance_modified(alpha: f64, n: usize) -> Result<CovMatrix> {
    ensure_finite("alpha", alpha)?;
    if alpha.abs() > 1.0 {
        return Err(Error::domain(format!("need |alpha| <= 1, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    let h = ma1_innovation_factor(alpha, n);
    CovMatrix::new(&h * h.transpose())
}

/// Power spectral density at angular frequency `omega ∈ [-π, π]`.
pub fn spectral_density(model: &NoiseModel, omega: f64) -> Result<f64> {
    model.validate()?;
    if !(-PI..=PI).contains(&omega) {
        return Err(Error::domain(format!(
            "omega must lie in [-pi, pi], got {omega}"
        )));
    }
    Ok(spectral_density_unchecked(model, omega))
}

/// `|1 + c e^{-jθ}|²`, written so that it keeps full relative accuracy
/// near a zero on the unit circle.
pub(crate) fn one_plus_mod2(c: f64, theta: f64) -> f64 {
    if c >= 0.0 {
        (1.0 - c).powi(2) + 4.0 * c * (0.5 * theta).cos().powi(2)
    } else {
        (1.0 + c).powi(2) - 4.0 * c * (0.5 * theta).sin().powi(2)
    }
}

pub(crate) fn spectral_density_unchecked(model: &NoiseModel, omega: f64) -> f64 {
    let ma = |c: f64, k: f64| one_plus_mod2(c, k * omega);
    let s = match model.process {
        NoiseProcess::White => 1.0,
        NoiseProcess::Ma1 { alpha } => ma(alpha, 1.0),
        NoiseProcess::Ar1 { alpha } => 1.0 / ma(-alpha, 1.0),
        NoiseProcess::Arma11 { alpha, beta } => ma(alpha, 1.0) / ma(-beta, 1.0),
        NoiseProcess::InterleavedMa2 { alpha } => ma(alpha, 2.0),
    };
    s.max(0.0) * model.innovation_variance
}

/// Entropy rate (nats/symbol) in closed form and by quadrature of
/// `(1/4π) ∫ ln(2πe S(ω)) dω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRate {
    pub closed_form: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
}

impl EntropyRate {
    pub fn discrepancy(&self) -> f64 {
        (self.closed_form - self.quadrature).abs()
    }
}

pub const ENTROPY_QUAD_TOL: f64 = 1e-10;

pub fn entropy_rate(model: &NoiseModel) -> Result<EntropyRate> {
    model.validate()?;
    let base = 0.5 * (2.0 * PI * E * model.innovation_variance).ln();
    // Zeros of the MA polynomial outside the unit circle each contribute
    // ln|zero| (Jensen's formula); poles of a stable AR part contribute none.
    let outside = |c: f64| c.abs().max(1.0).ln();
    let closed_form = base
        + match model.process {
            NoiseProcess::White | NoiseProcess::Ar1 { .. } => 0.0,
            NoiseProcess::Ma1 { alpha } => outside(alpha),
            NoiseProcess::Arma11 { alpha, .. } => outside(alpha),
            NoiseProcess::InterleavedMa2 { alpha } => outside(alpha),
        };
    let quad = log_spectrum_integral(|w| spectral_density_unchecked(model, w))?;
    Ok(EntropyRate {
        closed_form,
        quadrature: 0.5 * (2.0 * PI * E).ln() + quad.value,
        quadrature_error: quad.error_estimate,
    })
}

/// `(1/4π) ∫_{-π}^{π} ln S(ω) dω` for an even spectrum `S`.
///
/// Integrates over `[0, π]` split at `π/2`, so spectral zeros of the models
/// here (at `0`, `π/2` or `π`) always sit on a sub-interval endpoint.
pub(crate) fn log_spectrum_integral<S: Fn(f64) -> f64>(
    spectrum: S,
) -> Result<quadrature::Quadrature> {
    let q = quadrature::integrate_piecewise(
        |w| spectrum(w).ln(),
        &[0.0, 0.5 * PI, PI],
        ENTROPY_QUAD_TOL * 2.0 * PI,
        20_000,
    )?;
    Ok(quadrature::Quadrature {
        value: q.value / (2.0 * PI),
        error_estimate: q.error_estimate / (2.0 * PI),
        intervals: q.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_ma1(0.5, 2.0).unwrap(), (0.5, 2.0));
        assert_eq!(normalize_ma1(2.0, 4.0).unwrap(), (0.5, 1.0));
        assert_eq!(normalize_ma1(-4.0, 8.0).unwrap(), (-0.25, 0.5));
        assert!(normalize_ma1(f64::NAN, 1.0).is_err());
        assert!(normalize_ma1(f64::INFINITY, 1.0).is_err());
        assert!(normalize_ma1(0.5, 0.0).is_err());
    }

    #[test]
    fn ma1_two_by_two() {
        let a = 0.37;
        let k = covariance(&NoiseModel::ma1(a), 2).unwrap();
        let m = k.matrix();
        assert_eq!(m[(0, 0)], 1.0 + a * a);
        assert_eq!(m[(1, 1)], 1.0 + a * a);
        assert_eq!(m[(0, 1)], a);
        assert_eq!(m[(1, 0)], a);
    }

    #[test]
    fn white_is_scaled_identity() {
        let k = covariance(&NoiseModel::white().with_variance(2.5), 3).unwrap();
        assert_eq!(k.matrix(), &(DMatrix::identity(3, 3) * 2.5));
    }

    #[test]
    fn unit_alpha_determinant() {
        let k = covariance(&NoiseModel::ma1(1.0), 5).unwrap();
        assert!((k.det().unwrap() - 6.0).abs() < 6.0 * 1e-12);
    }

    #[test]
    fn ar1_rejects_unit_root() {
        assert!(covariance(&NoiseModel::ar1(1.0), 3).is_err());
        assert!(covariance(&NoiseModel::ar1(-1.2), 3).is_err());
        assert!(covariance(&NoiseModel::ma1(0.5), 0).is_err());
    }

    #[test]
    fn ar1_covariance_is_stationary_toeplitz() {
        let a = 0.6;
        let k = covariance(&NoiseModel::ar1(a), 4).unwrap();
        assert!((k.matrix()[(0, 0)] - 1.0 / (1.0 - a * a)).abs() < 1e-15);
        assert!((k.matrix()[(3, 0)] - a.powi(3) / (1.0 - a * a)).abs() < 1e-15);
        assert!(k.is_toeplitz(0.0));
    }

    #[test]
    fn modified_covariance_examples() {
        let a = -0.45;
        let km = covariance_modified(a, 2).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, a, a, 1.0 + a * a]);
        assert!(linalg::max_abs(&(km.matrix() - expect)) < 1e-15);
        let k0 = covariance_modified(0.0, 5).unwrap();
        assert_eq!(k0.matrix(), &DMatrix::identity(5, 5));
        let k = covariance(&NoiseModel::ma1(0.8), 6).unwrap();
        let km = covariance_modified(0.8, 6).unwrap();
        let diff = k.matrix() - km.matrix();
        assert_eq!(diff.iter().filter(|v| **v != 0.0).count(), 1);
        assert!(covariance_modified(1.5, 3).is_err());
    }

    #[test]
    fn spectral_examples() {
        let s = spectral_density(&NoiseModel::ma1(1.0), PI).unwrap();
        assert!(s.abs() < 1e-15);
        let a = 0.3;
        let s0 = spectral_density(&NoiseModel::ma1(a), 0.0).unwrap();
        assert!((s0 - (1.0 + a) * (1.0 + a)).abs() < 1e-15);
        for w in [-3.0, -0.2, 0.0, 1.1, 3.1] {
            let s = spectral_density(&NoiseModel::white().with_variance(1.7), w).unwrap();
            assert_eq!(s, 1.7);
        }
        assert!(spectral_density(&NoiseModel::white(), 4.0).is_err());
    }

    #[test]
    fn ar1_spectrum_integrates_to_variance() {
        let a = 0.5;
        let m = NoiseModel::ar1(a);
        let q = quadrature::integrate(|w| spectral_density_unchecked(&m, w), 0.0, PI, 1e-12, 1000)
            .unwrap();
        assert!((q.value / PI - m.autocovariance(0)).abs() < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        let half_log = 0.5 * (2.0 * PI * E).ln();
        let r = entropy_rate(&NoiseModel::ma1(0.5)).unwrap();
        assert!((r.closed_form - half_log).abs() < 1e-15);
        let r = entropy_rate(&NoiseModel::ma1(2.0)).unwrap();
        assert!((r.closed_form - 0.5 * (2.0 * PI * E * 4.0).ln()).abs() < 1e-14);
        assert!(r.discrepancy() < 1e-9);
    }
}
