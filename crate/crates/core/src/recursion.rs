//! Block-capacity recursions under a fixed power allocation, their
//! asymptotic fixed points, and a search over allocations.
//!
//! `J_k` is the log-determinant of the first `k` outputs' covariance, so the
//! per-symbol rate is `J_n / 2n`. The increments `ξ_k = ½ (J_k - J_{k-1})`
//! follow a one-step map: `ψ` for MA(1) noise, `φ` for AR(1) noise.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::rng;
use crate::roots::{self, FixedPoint};

/// Per-symbol powers `(P_1, …, P_n)` under an average budget `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    powers: Vec<f64>,
    budget: f64,
}

pub const FEASIBILITY_SLACK: f64 = 1e-9;

impl PowerAllocation {
    pub fn new(powers: Vec<f64>, budget: f64) -> Result<Self> {
        ensure_positive("budget", budget)?;
        if powers.is_empty() {
            return Err(Error::domain("allocation must cover at least one symbol"));
        }
        if let Some((i, p)) = powers
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::domain(format!(
                "power P_{} = {p} must be nonnegative",
                i + 1
            )));
        }
        let total: f64 = powers.iter().sum();
        let cap = powers.len() as f64 * budget;
        if total > cap + FEASIBILITY_SLACK {
            return Err(Error::domain(format!(
                "allocation uses {total} but the budget allows {cap}"
            )));
        }
        Ok(Self { powers, budget })
    }

    pub fn uniform(n: usize, budget: f64) -> Result<Self> {
        Self::new(vec![budget; n], budget)
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Trajectory of `J_0..J_n` and the increments `ξ_0..ξ_n` (`ξ_0 = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionTrace {
    pub j: Vec<f64>,
    pub xi: Vec<f64>,
    pub per_symbol_rate: f64,
}

impl RecursionTrace {
    fn from_increments(xi: Vec<f64>) -> Self {
        let mut j = Vec::with_capacity(xi.len());
        let mut acc = 0.0;
        j.push(0.0);
        for x in &xi[1..] {
            acc += 2.0 * x;
            j.push(acc);
        }
        let n = (xi.len() - 1) as f64;
        let per_symbol_rate = xi[1..].iter().sum::<f64>() / n;
        Self {
            j,
            xi,
            per_symbol_rate,
        }
    }

    pub fn n(&self) -> usize {
        self.j.len() - 1
    }

    pub fn j_n(&self) -> f64 {
        *self.j.last().expect("trace has J_0")
    }
}

fn check_alpha_closed(alpha: f64) -> Result<()> {
    ensure_finite("alpha", alpha)?;
    if alpha.abs() > 1.0 {
        return Err(Error::domain(format!("need |alpha| <= 1, got {alpha}")));
    }
    Ok(())
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    ensure_finite("alpha", alpha)?;
    if alpha.abs() >= 1.0 {
        return Err(Error::domain(format!("need |alpha| < 1, got {alpha}")));
    }
    Ok(())
}

/// `ψ(ξ, ζ) = ½ ln(1 + (√ζ + |α| √(1 - e^{-2ξ}))²)`.
pub fn ma1_psi(alpha: f64, xi: f64, zeta: f64) -> f64 {
    let t = zeta.sqrt() + alpha.abs() * (-(-2.0 * xi).exp_m1()).max(0.0).sqrt();
    0.5 * (t * t).ln_1p()
}

/// `φ(ξ, ζ₁, ζ₂) = ½ ln(1 + (√ζ₁ + |α| √ζ₂ e^{-ξ})²)`.
pub fn ar1_phi(alpha: f64, xi: f64, zeta_now: f64, zeta_prev: f64) -> f64 {
    let t = zeta_now.sqrt() + alpha.abs() * zeta_prev.sqrt() * (-xi).exp();
    0.5 * (t * t).ln_1p()
}

/// `J_n` recursion for MA(1) noise with the time-zero innovation revealed.
/// `J_1 = ln(1 + P_1)` directly; later steps use the previous increment.
pub fn ma1_recursion(alpha: f64, alloc: &PowerAllocation) -> Result<RecursionTrace> {
    check_alpha_closed(alpha)?;
    let mut xi = Vec::with_capacity(alloc.len() + 1);
    xi.push(0.0);
    for &p in alloc.powers() {
        let prev = *xi.last().expect("non-empty");
        xi.push(ma1_psi(alpha, prev, p));
    }
    Ok(RecursionTrace::from_increments(xi))
}

/// `J_n` recursion of the linear scheme on AR(1) noise, with `P_0 = 0`.
pub fn ar1_recursion(alpha: f64, alloc: &PowerAllocation) -> Result<RecursionTrace> {
    check_alpha_open(alpha)?;
    let mut xi = Vec::with_capacity(alloc.len() + 1);
    xi.push(0.0);
    let mut prev_power = 0.0;
    for &p in alloc.powers() {
        let prev = *xi.last().expect("non-empty");
        xi.push(ar1_phi(alpha, prev, p, prev_power));
        prev_power = p;
    }
    Ok(RecursionTrace::from_increments(xi))
}

/// Limit `ξ*` of `ξ_i = ψ(ξ_{i-1}, P)` from `ξ_0 = 0`.
pub fn ma1_fixed_point(alpha: f64, snr: f64) -> Result<FixedPoint> {
    check_alpha_closed(alpha)?;
    ensure_positive("snr", snr)?;
    roots::iterate_fixed_point(|x| ma1_psi(alpha, x, snr), 0.0)
}

/// Limit of `ξ_i = φ(ξ_{i-1}, P, P)` from `ξ_0 = 0`.
pub fn ar1_fixed_point(alpha: f64, snr: f64) -> Result<FixedPoint> {
    check_alpha_open(alpha)?;
    ensure_positive("snr", snr)?;
    roots::iterate_fixed_point(|x| ar1_phi(alpha, x, snr, snr), 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ma1,
    Ar1,
}

impl ModelKind {
    pub fn trace(self, alpha: f64, alloc: &PowerAllocation) -> Result<RecursionTrace> {
        match self {
            ModelKind::Ma1 => ma1_recursion(alpha, alloc),
            ModelKind::Ar1 => ar1_recursion(alpha, alloc),
        }
    }
}

/// Best allocation found by [`optimize_allocation`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationOptimum {
    pub allocation: PowerAllocation,
    pub trace: RecursionTrace,
    /// Per-symbol rate reached from each start (uniform start first).
    pub start_rates: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub const MAX_ALLOCATION_N: usize = 512;
const RANDOM_STARTS: u64 = 8;
const ALLOC_MAX_ITER: usize = 20_000;
const ALLOC_GRAD_TOL: f64 = 1e-12;
const ALLOC_SEED: u64 = 0x5eed;

/// Sum of increments `Σ ξ_i` (= `J_n / 2`) and its gradient with respect to
/// the amplitudes `a_i = √P_i`, by a reverse sweep over the recursion.
fn objective_and_gradient(kind: ModelKind, alpha: f64, amps: &[f64]) -> (f64, Vec<f64>) {
    let n = amps.len();
    let c = alpha.abs();
    let mut xi = vec![0.0_f64; n + 1];
    // r_i = t_i / (1 + t_i²), the derivative of ½ln(1+t²)
    let mut r = vec![0.0; n + 1];
    for i in 1..=n {
        let t = match kind {
            ModelKind::Ma1 => amps[i - 1] + c * (-(-2.0 * xi[i - 1]).exp_m1()).max(0.0).sqrt(),
            ModelKind::Ar1 => {
                let prev = if i >= 2 { amps[i - 2] } else { 0.0 };
                amps[i - 1] + c * prev * (-xi[i - 1]).exp()
            }
        };
        xi[i] = 0.5 * (t * t).ln_1p();
        r[i] = t / (1.0 + t * t);
    }
    // dξ_{i+1}/dξ_i
    let dnext = |i: usize| -> f64 {
        match kind {
            ModelKind::Ma1 => {
                let s = (-(-2.0 * xi[i]).exp_m1()).max(1e-300);
                r[i + 1] * c * (-2.0 * xi[i]).exp() / s.sqrt()
            }
            ModelKind::Ar1 => -r[i + 1] * c * amps[i - 1] * (-xi[i]).exp(),
        }
    };
    let mut lambda = vec![0.0; n + 2];
    lambda[n] = 1.0;
    for i in (1..n).rev() {
        lambda[i] = 1.0 + lambda[i + 1] * dnext(i);
    }
    let grad = (1..=n)
        .map(|i| {
            let mut g = lambda[i] * r[i];
            if kind == ModelKind::Ar1 && i < n {
                g += lambda[i + 1] * r[i + 1] * c * (-xi[i]).exp();
            }
            g
        })
        .collect();
    (xi[1..].iter().sum(), grad)
}

/// Projection onto `{a ≥ 0, ‖a‖² = radius²}`.
fn project_amplitudes(a: &mut [f64], radius: f64) {
    for v in a.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        a.iter_mut().for_each(|v| *v *= radius / norm);
    } else {
        let u = radius / (a.len() as f64).sqrt();
        a.iter_mut().for_each(|v| *v = u);
    }
}

struct AscentOutcome {
    amps: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn tangent_norm(a: &[f64], g: &[f64]) -> f64 {
    let aa: f64 = a.iter().map(|v| v * v).sum();
    let ga: f64 = a.iter().zip(g).map(|(x, y)| x * y).sum();
    a.iter()
        .zip(g)
        .map(|(x, y)| {
            let t = y - ga / aa * x;
            // at the nonnegativity bound only ascent directions count
            if *x == 0.0 && t < 0.0 {
                0.0
            } else {
                t * t
            }
        })
        .sum::<f64>()
        .sqrt()
}

fn ascend(kind: ModelKind, alpha: f64, mut amps: Vec<f64>, radius: f64) -> AscentOutcome {
    project_amplitudes(&mut amps, radius);
    let (mut value, mut grad) = objective_and_gradient(kind, alpha, &amps);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < ALLOC_MAX_ITER {
        iterations += 1;
        if tangent_norm(&amps, &grad) < ALLOC_GRAD_TOL * (1.0 + radius) {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand: Vec<f64> = amps.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            project_amplitudes(&mut cand, radius);
            let (cv, cg) = objective_and_gradient(kind, alpha, &cand);
            if cv > value {
                amps = cand;
                value = cv;
                grad = cg;
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent direction left at working precision
            converged = tangent_norm(&amps, &grad) < 1e-8 * (1.0 + radius);
            break;
        }
    }
    AscentOutcome {
        amps,
        value,
        iterations,
        converged,
    }
}

/// Maximizes `J_n / 2n` over allocations with `Σ P_i = nP` by projected
/// gradient ascent in amplitude coordinates, from the uniform allocation and
/// eight seeded random starts; the best start wins.
pub fn optimize_allocation(
    kind: ModelKind,
    alpha: f64,
    n: usize,
    budget: f64,
) -> Result<AllocationOptimum> {
    match kind {
        ModelKind::Ma1 => check_alpha_closed(alpha)?,
        ModelKind::Ar1 => check_alpha_open(alpha)?,
    }
    ensure_positive("budget", budget)?;
    if n == 0 || n > MAX_ALLOCATION_N {
        return Err(Error::domain(format!(
            "block length must be in 1..={MAX_ALLOCATION_N}, got {n}"
        )));
    }
    let radius = (n as f64 * budget).sqrt();
    let starts: Vec<Vec<f64>> = std::iter::once(vec![budget.sqrt(); n])
        .chain((0..RANDOM_STARTS).map(|s| {
            let mut r = rng::stream(ALLOC_SEED, s);
            (0..n).map(|_| r.random::<f64>() + 0.05).collect()
        }))
        .collect();
    let outcomes: Vec<AscentOutcome> = starts
        .into_par_iter()
        .map(|a| ascend(kind, alpha, a, radius))
        .collect();
    let start_rates: Vec<f64> = outcomes.iter().map(|o| o.value / n as f64).collect();
    let best = outcomes
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.value.total_cmp(&y.1.value).then(y.0.cmp(&x.0)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let out = &outcomes[best];
    // rescale so rounding never pushes the total over the budget
    let mut powers: Vec<f64> = out.amps.iter().map(|a| a * a).collect();
    let total: f64 = powers.iter().sum();
    let cap = n as f64 * budget;
    if total > cap {
        powers.iter_mut().for_each(|p| *p *= cap / total);
    }
    let allocation = PowerAllocation::new(powers, budget)?;
    let trace = kind.trace(alpha, &allocation)?;
    Ok(AllocationOptimum {
        allocation,
        trace,
        start_rates,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        converged: out.converged,
    })
}
