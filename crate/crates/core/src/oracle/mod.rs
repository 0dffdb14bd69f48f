//! The n-block feedback capacity problem
//!
//! ```text
//! max (1/2n) ln det((B+I) K (B+I)^T + K_V) / det K   s.t.  tr(B K B^T + K_V) <= nP
//! ```
//!
//! solved two independent ways: the sequential projection construction for
//! MA(1) noise ([`greedy_construct`]) and a generic first-order optimizer
//! ([`generic_optimize`]). Also hosts the structural checks on optimal
//! strategies and the `K_Z` versus `H_Z H_Z^T` comparison.

mod generic;
mod greedy;
mod lemma;
mod strategy;

pub use generic::{
    generic_optimize, generic_optimize_with, optimize_block, GenericDiagnostics, GenericOptions,
    StopReason, MAX_GENERIC_N,
};
pub use greedy::{greedy_construct, GreedyConstruction, GreedyStep};
pub use lemma::{lemma1_max, CoordinateSubspace, LemmaMax};
pub use strategy::{check_orthogonality, objective, StrategyExport, StrategyMatrices};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::recursion::{self, ModelKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Greedy,
    Generic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCapacityEstimate {
    pub n: usize,
    pub rate_nats: f64,
    pub method: Method,
    pub diagnostics: Option<GenericDiagnostics>,
}

/// Block capacity on the modified covariance via the sequential
/// construction, with the power allocation optimized over the recursion.
pub fn greedy_block_capacity(
    alpha: f64,
    n: usize,
    budget: f64,
) -> Result<(GreedyConstruction, BlockCapacityEstimate)> {
    let opt = recursion::optimize_allocation(ModelKind::Ma1, alpha, n, budget)?;
    let g = greedy_construct(alpha, &opt.allocation)?;
    let est = BlockCapacityEstimate {
        n,
        rate_nats: g.strategy.objective_nats,
        method: Method::Greedy,
        diagnostics: None,
    };
    Ok((g, est))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub n: usize,
    pub rate_kz: f64,
    pub rate_kz_prime: f64,
}

impl EquivalenceRow {
    pub fn gap(&self) -> f64 {
        self.rate_kz_prime - self.rate_kz
    }
}

/// Generic block capacities on `K_Z` and on `H_Z H_Z^T` for each `n`.
pub fn equivalence_gap(alpha: f64, n_list: &[usize], budget: f64) -> Result<Vec<EquivalenceRow>> {
    n_list
        .iter()
        .map(|&n| {
            let (_, kz) = generic_optimize(alpha, n, budget, false)?;
            let (_, kzp) = generic_optimize(alpha, n, budget, true)?;
            Ok(EquivalenceRow {
                n,
                rate_kz: kz.rate_nats,
                rate_kz_prime: kzp.rate_nats,
            })
        })
        .collect()
}
