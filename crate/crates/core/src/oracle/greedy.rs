use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lemma::{lemma1_max, CoordinateSubspace};
use super::strategy::StrategyMatrices;
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::OrthoBasis;
use crate::noise;
use crate::recursion::PowerAllocation;

/// Bookkeeping for one step of the sequential construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub power: f64,
    /// `‖g_k Π_{k-1}‖`
    pub g_proj_norm: f64,
    /// `s_k Π_{k-1} s_k^T = det(S_k S_k^T) / det(S_{k-1} S_{k-1}^T)`
    pub det_ratio: f64,
    /// `ln det(S_k S_k^T)`
    pub logdet: f64,
}

#[derive(Clone, Debug)]
pub struct GreedyConstruction {
    pub strategy: StrategyMatrices,
    pub steps: Vec<GreedyStep>,
    basis: OrthoBasis,
}

impl GreedyConstruction {
    /// `Π_k` (orthogonal complement of `s_1..s_k`), `k = 0..=n`.
    pub fn projector(&self, k: usize) -> DMatrix<f64> {
        let dim = self.basis.dim();
        let mut p = DMatrix::<f64>::identity(dim, dim);
        for q in &self.basis.vectors()[..k] {
            p -= q * q.transpose();
        }
        p
    }

    /// `S_k`, the first `k` output rows.
    pub fn output_rows(&self, k: usize) -> DMatrix<f64> {
        self.strategy.output_rows().rows(0, k).into_owned()
    }

    pub fn logdet(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.logdet)
    }
}

/// Row `k` (1-based) of `[0  H_Z]`: `e_k + α e_{k-1}`.
pub(crate) fn h_row(alpha: f64, n: usize, k: usize) -> DVector<f64> {
    let mut h = DVector::zeros(2 * n);
    h[n + k - 1] = 1.0;
    if k >= 2 {
        h[n + k - 2] = alpha;
    }
    h
}

/// Sequential maximization of `ln det(S_k S_k^T)` for MA(1) noise with the
/// time-zero innovation revealed (covariance `H_Z H_Z^T`), under per-symbol
/// powers `alloc`. Each input is chosen as `f_k = √P_k g_k Π_{k-1} / ‖·‖`.
pub fn greedy_construct(alpha: f64, alloc: &PowerAllocation) -> Result<GreedyConstruction> {
    ensure_finite("alpha", alpha)?;
    if alpha.abs() > 1.0 {
        return Err(Error::domain(format!("need |alpha| <= 1, got {alpha}")));
    }
    let n = alloc.len();
    let dim = 2 * n;
    let mut basis = OrthoBasis::new(dim);
    let mut f_rows = DMatrix::zeros(n, dim);
    let mut steps = Vec::with_capacity(n);
    let mut logdet = 0.0;
    for (idx, &power) in alloc.powers().iter().enumerate() {
        let k = idx + 1;
        let h = h_row(alpha, n, k);
        let mut g = h.clone();
        g[n + k - 1] = 0.0;
        let lemma = lemma1_max(&g, &basis, power, &CoordinateSubspace::causal(n, k)?)?;
        let s = &lemma.v_star + &h;
        let ratio = basis.push(&s, 1e-12)?;
        if ratio < 1e-10 {
            return Err(Error::numerical("S_k S_k^T is numerically singular", ratio));
        }
        logdet += ratio.ln();
        f_rows.row_mut(idx).copy_from(&lemma.v_star.transpose());
        steps.push(GreedyStep {
            power,
            g_proj_norm: lemma.projected_norm,
            det_ratio: ratio,
            logdet,
        });
    }
    let k_mod = noise::covariance_modified(alpha, n)?;
    let strategy = StrategyMatrices::from_rows(f_rows, &k_mod, alpha, alloc.budget())?;
    Ok(GreedyConstruction {
        strategy,
        steps,
        basis,
    })
}
