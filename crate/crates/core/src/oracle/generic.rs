use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strategy::StrategyMatrices;
use super::{BlockCapacityEstimate, Method};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::noise::{self, CovMatrix, NoiseModel};
use crate::rng;

pub const MAX_GENERIC_N: usize = 8;
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericOptions {
    pub starts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
    /// When false, `B` is frozen at zero (no feedback).
    pub feedback: bool,
}

impl Default for GenericOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            max_iter: 5000,
            grad_tol: 1e-9,
            seed: 0,
            feedback: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericDiagnostics {
    pub iterations: usize,
    pub stop: StopReason,
    pub grad_norm: f64,
    /// Best rate reached from each start.
    pub start_rates: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    IterationLimit,
    /// No step along the projected gradient increases the objective in
    /// floating point.
    NoAscent,
}

/// Free-coordinate mask over the `n × 2n` innovation-basis rows: message
/// part lower triangular, noise part strictly lower triangular.
fn mask(n: usize, feedback: bool) -> DMatrix<f64> {
    DMatrix::from_fn(n, 2 * n, |i, j| {
        let free = if j < n { j <= i } else { feedback && j - n < i };
        free as u8 as f64
    })
}

struct Problem {
    n: usize,
    factor: DMatrix<f64>,
    mask: DMatrix<f64>,
    radius2: f64,
}

impl Problem {
    fn outputs(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut s = x.clone();
        let mut z = s.columns_mut(self.n, self.n);
        z += &self.factor;
        s
    }

    /// `ln det(S S^T)` and its masked gradient `2 (S S^T)^{-1} S`.
    fn eval(&self, x: &DMatrix<f64>) -> Option<(f64, DMatrix<f64>)> {
        let s = self.outputs(x);
        let chol = (&s * s.transpose()).cholesky()?;
        let l = chol.l_dirty();
        let logdet = (0..self.n).map(|i| 2.0 * l[(i, i)].ln()).sum::<f64>();
        let grad = (chol.solve(&s) * 2.0).component_mul(&self.mask);
        Some((logdet, grad))
    }

    fn project(&self, x: &mut DMatrix<f64>) {
        let r2 = x.norm_squared();
        if r2 > self.radius2 {
            *x *= (self.radius2 / r2).sqrt();
        }
    }

    /// Norm of the gradient restricted to feasible directions.
    fn stationarity(&self, x: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
        let r2 = x.norm_squared();
        let gx = g.dot(x);
        if r2 >= self.radius2 * (1.0 - 1e-12) && gx > 0.0 {
            (g - x * (gx / r2)).norm()
        } else {
            g.norm()
        }
    }
}

struct StartOutcome {
    x: DMatrix<f64>,
    logdet: f64,
    iterations: usize,
    grad_norm: f64,
    stop: StopReason,
}

fn ascend(p: &Problem, mut x: DMatrix<f64>, opts: &GenericOptions) -> Option<StartOutcome> {
    p.project(&mut x);
    let (mut f, mut g) = p.eval(&x)?;
    let mut step = 1e-2;
    let mut prev: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    let mut iterations = 0;
    let mut grad_norm = p.stationarity(&x, &g);
    let mut stop = StopReason::IterationLimit;
    while iterations < opts.max_iter {
        if grad_norm <= opts.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        iterations += 1;
        // Barzilai-Borwein guess, safeguarded by backtracking on ascent
        if let Some((xp, gp)) = &prev {
            let s = &x - xp;
            let y = &g - gp;
            let sy = s.dot(&y);
            if sy < 0.0 {
                step = (-s.norm_squared() / sy).clamp(1e-8, 1e4);
            }
        }
        let mut accepted = false;
        for _ in 0..50 {
            let mut cand = &x + &g * step;
            p.project(&mut cand);
            if let Some((cf, cg)) = p.eval(&cand) {
                if cf > f {
                    prev = Some((
                        std::mem::replace(&mut x, cand),
                        std::mem::replace(&mut g, cg),
                    ));
                    f = cf;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        grad_norm = p.stationarity(&x, &g);
        if !accepted {
            stop = StopReason::NoAscent;
            break;
        }
    }
    Some(StartOutcome {
        x,
        logdet: f,
        iterations,
        grad_norm,
        stop: if grad_norm <= opts.grad_tol {
            StopReason::GradientTolerance
        } else {
            stop
        },
    })
}

/// Maximizes the n-block objective over all strategies with input power at
/// most `nP` for an arbitrary nonsingular noise covariance.
///
/// The strategy is parametrized in the innovation basis, `F = [F_V  B L]`
/// (`L` the Cholesky factor of `noise`), where the power constraint is the
/// ball `‖F‖_F² ≤ nP`. Projected gradient ascent with Barzilai-Borwein steps
/// runs from a white start and seeded random starts; the best start wins.
pub fn optimize_block(
    noise: &CovMatrix,
    alpha: f64,
    budget: f64,
    opts: &GenericOptions,
) -> Result<(StrategyMatrices, BlockCapacityEstimate)> {
    ensure_positive("budget", budget)?;
    let n = noise.n();
    if n > MAX_GENERIC_N {
        return Err(Error::domain(format!(
            "generic optimization supports n <= {MAX_GENERIC_N}, got {n}"
        )));
    }
    if opts.starts == 0 {
        return Err(Error::domain("need at least one start"));
    }
    let problem = Problem {
        n,
        factor: noise.cholesky_factor()?,
        mask: mask(n, opts.feedback),
        radius2: n as f64 * budget,
    };
    let radius = problem.radius2.sqrt();
    let outcomes: Vec<Option<StartOutcome>> = (0..opts.starts)
        .into_par_iter()
        .map(|s| {
            let x0 = if s == 0 {
                let mut x = DMatrix::zeros(n, 2 * n);
                for i in 0..n {
                    x[(i, i)] = budget.sqrt();
                }
                x
            } else {
                let mut r = rng::stream(opts.seed, s as u64);
                let x = DMatrix::from_fn(n, 2 * n, |_, _| r.sample::<f64, _>(StandardNormal))
                    .component_mul(&problem.mask);
                let norm = x.norm();
                x * (radius / norm)
            };
            ascend(&problem, x0, opts)
        })
        .collect();
    let logdet_k = noise.logdet()?;
    let to_rate = |ld: f64| (ld - logdet_k) / (2.0 * n as f64);
    let start_rates: Vec<f64> = outcomes
        .iter()
        .map(|o| o.as_ref().map_or(f64::NEG_INFINITY, |o| to_rate(o.logdet)))
        .collect();
    let top = outcomes
        .iter()
        .flatten()
        .map(|o| o.logdet)
        .fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::numerical("every optimizer start failed", f64::NAN));
    }
    // The optimum is often not unique (white noise admits feedback and
    // nonfeedback optima alike), so the earliest start within rounding of
    // the best value wins.
    let best = outcomes
        .iter()
        .flatten()
        .find(|o| o.logdet >= top - TIE_TOL * top.abs().max(1.0))
        .expect("top is attained");
    let strategy = StrategyMatrices::from_rows(best.x.clone(), noise, alpha, budget)?;
    let estimate = BlockCapacityEstimate {
        n,
        rate_nats: strategy.objective_nats.max(0.0),
        method: Method::Generic,
        diagnostics: Some(GenericDiagnostics {
            iterations: outcomes.iter().flatten().map(|o| o.iterations).sum(),
            grad_norm: best.grad_norm,
            stop: best.stop,
            start_rates,
        }),
    };
    Ok((strategy, estimate))
}

/// Generic n-block optimization for MA(1) noise on either the stationary
/// covariance `K_Z` or the modified `H_Z H_Z^T`.
pub fn generic_optimize(
    alpha: f64,
    n: usize,
    budget: f64,
    use_modified: bool,
) -> Result<(StrategyMatrices, BlockCapacityEstimate)> {
    generic_optimize_with(alpha, n, budget, use_modified, &GenericOptions::default())
}

pub fn generic_optimize_with(
    alpha: f64,
    n: usize,
    budget: f64,
    use_modified: bool,
    opts: &GenericOptions,
) -> Result<(StrategyMatrices, BlockCapacityEstimate)> {
    ensure_finite("alpha", alpha)?;
    if alpha.abs() > 1.0 {
        return Err(Error::domain(format!("need |alpha| <= 1, got {alpha}")));
    }
    if n == 0 || n > MAX_GENERIC_N {
        return Err(Error::domain(format!(
            "n must be in 1..={MAX_GENERIC_N}, got {n}"
        )));
    }
    let k = if use_modified {
        noise::covariance_modified(alpha, n)?
    } else {
        noise::covariance(&NoiseModel::ma1(alpha), n)?
    };
    optimize_block(&k, alpha, budget, opts)
}
