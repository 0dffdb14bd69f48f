use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::noise::CovMatrix;

/// An n-block linear feedback strategy `X = B Z + V`, `V ~ N(0, K_V)`.
///
/// `f_rows` is the same strategy written in the white innovation basis: row
/// `i` holds the coefficients of `X_i` on the message innovations (first `n`
/// coordinates) and on the noise innovations (last `n`). With `L` the lower
/// Cholesky factor of the noise covariance, `F = [F_V  B L]` and
/// `K_V = F_V F_V^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyMatrices {
    pub n: usize,
    pub alpha: f64,
    pub budget: f64,
    pub b: DMatrix<f64>,
    pub kv: DMatrix<f64>,
    pub f_rows: DMatrix<f64>,
    /// Lower Cholesky factor of the noise covariance the strategy targets.
    pub noise_factor: DMatrix<f64>,
    pub objective_nats: f64,
    pub power_used: f64,
}

impl StrategyMatrices {
    /// Builds a strategy from its innovation-basis rows.
    pub fn from_rows(
        f_rows: DMatrix<f64>,
        noise: &CovMatrix,
        alpha: f64,
        budget: f64,
    ) -> Result<Self> {
        let n = noise.n();
        if f_rows.nrows() != n || f_rows.ncols() != 2 * n {
            return Err(Error::domain(format!(
                "strategy rows must be {n} x {}, got {} x {}",
                2 * n,
                f_rows.nrows(),
                f_rows.ncols()
            )));
        }
        let l = noise.cholesky_factor()?;
        let fv = f_rows.columns(0, n).into_owned();
        let fz = f_rows.columns(n, n).into_owned();
        let kv = &fv * fv.transpose();
        // B L = F_Z  <=>  L^T B^T = F_Z^T
        let bt = l
            .transpose()
            .solve_upper_triangular(&fz.transpose())
            .ok_or_else(|| Error::domain("noise factor is singular"))?;
        let mut b = bt.transpose();
        for i in 0..n {
            for j in i..n {
                b[(i, j)] = 0.0;
            }
        }
        let mut s = Self {
            n,
            alpha,
            budget,
            b,
            kv,
            f_rows,
            noise_factor: l,
            objective_nats: 0.0,
            power_used: 0.0,
        };
        s.power_used = s.f_rows.norm_squared();
        s.objective_nats = objective(&s, noise)?;
        Ok(s)
    }

    /// Builds a strategy from `(B, K_V)`; `K_V` may be rank deficient.
    pub fn from_feedback(
        b: DMatrix<f64>,
        kv: DMatrix<f64>,
        noise: &CovMatrix,
        alpha: f64,
        budget: f64,
    ) -> Result<Self> {
        let n = noise.n();
        if b.shape() != (n, n) || kv.shape() != (n, n) {
            return Err(Error::domain("B and K_V must match the noise block size"));
        }
        for i in 0..n {
            for j in i..n {
                if b[(i, j)] != 0.0 {
                    return Err(Error::domain("B must be strictly lower triangular"));
                }
            }
        }
        let l = noise.cholesky_factor()?;
        let fv = linalg::psd_factor(&kv, 1e-13)?;
        let fz = &b * &l;
        let mut f = DMatrix::zeros(n, 2 * n);
        f.columns_mut(0, n).copy_from(&fv);
        f.columns_mut(n, n).copy_from(&fz);
        Self::from_rows(f, noise, alpha, budget)
    }

    /// Output rows `s_i = f_i + h_i` with `h_i = [0, L]_i`.
    pub fn output_rows(&self) -> DMatrix<f64> {
        let mut s = self.f_rows.clone();
        let mut z = s.columns_mut(self.n, self.n);
        z += &self.noise_factor;
        s
    }

    pub fn is_strictly_lower(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| self.b[(i, j)] == 0.0))
    }

    /// Trace of the input covariance `B K B^T + K_V`.
    pub fn input_power(&self, noise: &CovMatrix) -> f64 {
        (&self.b * noise.matrix() * self.b.transpose() + &self.kv).trace()
    }

    pub fn export(&self) -> StrategyExport {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect()
        };
        StrategyExport {
            schema_version: crate::io::SCHEMA_VERSION,
            n: self.n,
            alpha: self.alpha,
            budget: self.budget,
            b: rows(&self.b),
            kv: rows(&self.kv),
            f_rows: rows(&self.f_rows),
            objective_nats: self.objective_nats,
            power_used: self.power_used,
        }
    }
}

/// Row-major JSON form of a [`StrategyMatrices`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyExport {
    pub schema_version: u32,
    pub n: usize,
    pub alpha: f64,
    pub budget: f64,
    pub b: Vec<Vec<f64>>,
    pub kv: Vec<Vec<f64>>,
    pub f_rows: Vec<Vec<f64>>,
    pub objective_nats: f64,
    pub power_used: f64,
}

/// `(1/2n) [ln det((B+I) K (B+I)^T + K_V) - ln det K]` in nats per symbol.
pub fn objective(strategy: &StrategyMatrices, k: &CovMatrix) -> Result<f64> {
    let n = k.n();
    if strategy.b.shape() != (n, n) || strategy.kv.shape() != (n, n) {
        return Err(Error::domain("strategy and covariance sizes differ"));
    }
    let logdet_k = k
        .logdet()
        .map_err(|_| Error::domain("noise covariance is singular"))?;
    let bi = &strategy.b + DMatrix::<f64>::identity(n, n);
    let ky = &bi * k.matrix() * bi.transpose() + &strategy.kv;
    let logdet_y = linalg::logdet_spd(&ky)?;
    Ok((logdet_y - logdet_k) / (2.0 * n as f64))
}

/// `max_k ‖f_k S_{k-1}^T‖_∞`: how far each input is from being orthogonal
/// to the past outputs.
pub fn check_orthogonality(strategy: &StrategyMatrices) -> f64 {
    let s = strategy.output_rows();
    let mut worst = 0.0_f64;
    for k in 1..strategy.n {
        let fk = strategy.f_rows.row(k);
        for j in 0..k {
            worst = worst.max(fk.dot(&s.row(j)).abs());
        }
    }
    worst
}
