use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::capacity;
use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Parameters of the stationary-filter coding scheme over MA(1) noise.
///
/// `X_1 = θ` from a uniform grid of `M` points on `[-√P, √P]`, then
/// `X_k = β X_{k-1} + σ U_{k-1}` and `Y_k = X_k + α U_{k-1} + U_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub alpha: f64,
    pub snr: f64,
    pub n: usize,
    pub rate_nats: f64,
    pub capacity_nats: f64,
    pub beta: f64,
    pub sigma: f64,
    pub grid_size: u64,
    pub spacing: f64,
    /// The decoder knows the time-zero innovation `U_0`.
    pub u0_known: bool,
}

/// Sign with `sgn(0) = +1`.
pub fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl SchemeParams {
    pub fn new(alpha: f64, snr: f64, n: usize, rate_nats: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        if alpha.abs() > 1.0 {
            return Err(Error::domain(format!("need |alpha| <= 1, got {alpha}")));
        }
        ensure_positive("snr", snr)?;
        ensure_positive("rate", rate_nats)?;
        if n == 0 {
            return Err(Error::domain("block length must be at least 1"));
        }
        let cap = capacity::ma1_feedback_capacity(alpha, snr)?;
        let beta = -sgn(alpha) * cap.x0;
        let sigma = sgn(alpha) * (snr * (1.0 - beta * beta)).sqrt();
        let m = (n as f64 * rate_nats).exp().round();
        if !(m >= 2.0 && m < 2f64.powi(53)) {
            return Err(Error::domain(format!(
                "message count e^(nR) = {m} must lie in [2, 2^53)"
            )));
        }
        let grid_size = m as u64;
        Ok(Self {
            alpha,
            snr,
            n,
            rate_nats,
            capacity_nats: cap.rate_nats,
            beta,
            sigma,
            grid_size,
            spacing: 2.0 * snr.sqrt() / (m - 1.0),
            u0_known: true,
        })
    }

    pub fn with_u0_known(mut self, known: bool) -> Self {
        self.u0_known = known;
        self
    }

    /// Grid point `θ(index)`.
    pub fn theta(&self, index: u64) -> Result<f64> {
        if index >= self.grid_size {
            return Err(Error::domain(format!(
                "message index {index} out of range 0..{}",
                self.grid_size
            )));
        }
        Ok(-self.snr.sqrt() + index as f64 * self.spacing)
    }

    /// Nearest grid index, ties to the lower index.
    pub fn nearest_index(&self, theta: f64) -> u64 {
        let t = (theta + self.snr.sqrt()) / self.spacing;
        let idx = (t - 0.5).ceil();
        idx.clamp(0.0, (self.grid_size - 1) as f64) as u64
    }

    /// Variance of `θ` uniform over the grid, `P (M+1) / (3 (M-1))`.
    pub fn grid_variance(&self) -> f64 {
        let m = self.grid_size as f64;
        self.snr * (m + 1.0) / (3.0 * (m - 1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Runs the encoder against a noise path `U_0..U_n` (length `n + 1`).
pub fn encode(
    params: &SchemeParams,
    message_index: u64,
    noise_path: &[f64],
) -> Result<Transmission> {
    let theta = params.theta(message_index)?;
    encode_theta(params, theta, noise_path)
}

pub(crate) fn encode_theta(params: &SchemeParams, theta: f64, u: &[f64]) -> Result<Transmission> {
    let n = params.n;
    if u.len() != n + 1 {
        return Err(Error::domain(format!(
            "noise path must have length n + 1 = {}, got {}",
            n + 1,
            u.len()
        )));
    }
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut xk = theta;
    for k in 1..=n {
        if k > 1 {
            xk = params.beta * xk + params.sigma * u[k - 1];
        }
        x.push(xk);
        y.push(xk + params.alpha * u[k - 1] + u[k]);
    }
    Ok(Transmission { x, y })
}

/// The whitening map `D^{-1}` of the noise-to-output channel with the
/// message removed: feeds `v` through the inverse of the encoder loop.
/// If `v` is the output for `θ = 0`, `U_0 = 0`, the result is `U_1..U_n`.
pub(crate) fn whiten(params: &SchemeParams, v: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(v.len());
    let (mut m, mut w_prev) = (0.0, 0.0);
    for (k, &vk) in v.iter().enumerate() {
        if k > 0 {
            m = params.beta * m + params.sigma * w_prev;
        }
        let wk = vk - params.alpha * w_prev - m;
        w.push(wk);
        w_prev = wk;
    }
    w
}

/// Least squares for `(U_0, θ)` from `ỹ = α c U_0 + ã θ + U` with the prior
/// row `U_0 ~ N(0, 1)`, by Givens updates of a 2×2 triangular factor.
/// `ã` and `c` grow along the same unstable mode, so the normal equations
/// lose everything to cancellation; the rotations do not.
struct HiddenU0 {
    r11: f64,
    r12: f64,
    r22: f64,
    q1: f64,
    q2: f64,
}

impl HiddenU0 {
    fn new() -> Self {
        Self {
            r11: 1.0,
            r12: 0.0,
            r22: 0.0,
            q1: 0.0,
            q2: 0.0,
        }
    }

    fn add(&mut self, x1: f64, mut x2: f64, mut y: f64) {
        let rho = self.r11.hypot(x1);
        let (c, s) = (self.r11 / rho, x1 / rho);
        self.r11 = rho;
        (self.r12, x2) = (c * self.r12 + s * x2, -s * self.r12 + c * x2);
        (self.q1, y) = (c * self.q1 + s * y, -s * self.q1 + c * y);
        let rho = self.r22.hypot(x2);
        if rho == 0.0 {
            return;
        }
        let (c, s) = (self.r22 / rho, x2 / rho);
        self.r22 = rho;
        self.q2 = c * self.q2 + s * y;
    }
}

/// Precomputed linear-Gaussian structure of the decoder.
///
/// After whitening, `ỹ = ã θ + U` (plus `α U_0 c` when `U_0` is unknown,
/// with `c = D^{-1} e_1`).
#[derive(Clone, Debug)]
pub struct DecoderModel {
    params: SchemeParams,
    a_white: Vec<f64>,
    c_white: Vec<f64>,
}

impl DecoderModel {
    pub fn new(params: &SchemeParams) -> Self {
        let n = params.n;
        let a: Vec<f64> = (0..n).map(|k| params.beta.powi(k as i32)).collect();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        Self {
            params: *params,
            a_white: whiten(params, &a),
            c_white: whiten(params, &e1),
        }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn whitened_signature(&self) -> &[f64] {
        &self.a_white
    }

    /// Prefix information `1 / var(θ̂_k)` for `k = 1..n`.
    pub fn information_by_time(&self) -> Vec<f64> {
        let n = self.params.n;
        if self.params.u0_known {
            let mut aa = 0.0;
            return self
                .a_white
                .iter()
                .map(|a| {
                    aa += a * a;
                    aa
                })
                .collect();
        }
        let mut ls = HiddenU0::new();
        (0..n)
            .map(|k| {
                ls.add(self.params.alpha * self.c_white[k], self.a_white[k], 0.0);
                ls.r22 * ls.r22
            })
            .collect()
    }

    /// `var(θ̂_k − θ)` of the unbiased estimator, `k = 1..n`.
    pub fn ml_variance_by_time(&self) -> Vec<f64> {
        self.information_by_time()
            .into_iter()
            .map(|i| 1.0 / i)
            .collect()
    }

    /// `var(X_1 | Y^k)` for a Gaussian `X_1 ~ N(0, P)`, `k = 1..n`.
    pub fn mmse_by_time(&self) -> Vec<f64> {
        let p = self.params.snr;
        self.information_by_time()
            .into_iter()
            .map(|i| 1.0 / (1.0 / p + i))
            .collect()
    }

    /// Prefix estimates `θ̂_1..θ̂_n` from observations (and `U_0` when known).
    pub fn estimates_by_time(&self, y: &[f64], u0: Option<f64>) -> Result<Vec<f64>> {
        let p = &self.params;
        if y.len() != p.n {
            return Err(Error::domain(format!(
                "expected {} observations, got {}",
                p.n,
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("observations must be finite"));
        }
        let mut v = y.to_vec();
        match (p.u0_known, u0) {
            (true, Some(u0)) => v[0] -= p.alpha * u0,
            (true, None) => {
                return Err(Error::domain(
                    "decoder configured with known U_0 but none given",
                ))
            }
            (false, _) => {}
        }
        let yw = whiten(p, &v);
        let mut out = Vec::with_capacity(p.n);
        if p.u0_known {
            let (mut ay, mut aa) = (0.0, 0.0);
            for (a, y) in self.a_white.iter().zip(&yw) {
                ay += a * y;
                aa += a * a;
                out.push(ay / aa);
            }
        } else {
            let mut ls = HiddenU0::new();
            for k in 0..p.n {
                ls.add(p.alpha * self.c_white[k], self.a_white[k], yw[k]);
                out.push(ls.q2 / ls.r22);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, y: &[f64], u0: Option<f64>) -> Result<Decoded> {
        let est = self.estimates_by_time(y, u0)?;
        let theta_hat = *est.last().expect("n >= 1");
        if !theta_hat.is_finite() {
            return Err(Error::numerical("estimate is not finite", theta_hat));
        }
        Ok(Decoded {
            theta_hat,
            message_hat: self.params.nearest_index(theta_hat),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decoded {
    pub theta_hat: f64,
    pub message_hat: u64,
}

/// Maximum-likelihood decoding followed by nearest-grid-point quantization.
pub fn decode_ml(params: &SchemeParams, y: &[f64], u0: Option<f64>) -> Result<Decoded> {
    DecoderModel::new(params).decode(y, u0)
}

/// Prediction of the nearest-neighbour error probability from the ML
/// variance: interior points err on either side, the two end points on one.
pub fn gaussian_error_estimate(params: &SchemeParams) -> f64 {
    let var = *DecoderModel::new(params)
        .ml_variance_by_time()
        .last()
        .expect("n >= 1");
    let m = params.grid_size as f64;
    (m - 1.0) / m * libm::erfc(params.spacing / (2.0 * (2.0 * var).sqrt()))
}

/// `erfc(√(3 / 2σ_θ²) e^{n(C − R)})` with `σ_θ²` the exact grid variance;
/// the leading-order estimate, lower order terms ignored.
pub fn erfc_error_estimate(params: &SchemeParams) -> f64 {
    let arg = (3.0 / (2.0 * params.grid_variance())).sqrt()
        * (params.n as f64 * (params.capacity_nats - params.rate_nats)).exp();
    libm::erfc(arg)
}

/// The channel input and noise as an explicit affine map of `θ` and the
/// innovations, `Y = a θ + N`, for cross-checking the fast decoder.
pub fn dense_model(params: &SchemeParams) -> (DVector<f64>, nalgebra::DMatrix<f64>) {
    let n = params.n;
    let a = DVector::from_fn(n, |k, _| params.beta.powi(k as i32));
    // column j is the response to U_j, j = 0..n
    let mut g = nalgebra::DMatrix::zeros(n, n + 1);
    for j in 0..=n {
        let mut u = vec![0.0; n + 1];
        u[j] = 1.0;
        let t = encode_theta(params, 0.0, &u).expect("length matches");
        for k in 0..n {
            g[(k, j)] = t.y[k];
        }
    }
    (a, g)
}
