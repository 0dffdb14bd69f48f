//! Scalar root and fixed-point solvers with residual bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of a bracketed root solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub root: f64,
    pub residual: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

pub const MAX_BISECTIONS: u32 = 128;

/// Bisection on `[lo, hi]` followed by up to two Newton steps that are only
/// kept if they stay inside the final bracket and shrink the residual.
pub fn bisect_polished<F, D>(f: F, df: D, lo: f64, hi: f64) -> Result<RootReport>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(RootReport {
            root: a,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, hi),
        });
    }
    if fb == 0.0 {
        return Ok(RootReport {
            root: b,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, hi),
        });
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::numerical(
            format!("no sign change on [{lo}, {hi}]"),
            fa.abs().min(fb.abs()),
        ));
    }
    let neg_at_a = fa < 0.0;
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        let fm = f(mid);
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if (fm < 0.0) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut x = if f(a).abs() <= f(b).abs() { a } else { b };
    let mut fx = f(x);
    for _ in 0..2 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() || fx == 0.0 {
            break;
        }
        let cand = x - fx / d;
        let fc = f(cand);
        if cand >= a.min(b) - (b - a).abs()
            && cand <= a.max(b) + (b - a).abs()
            && fc.abs() < fx.abs()
        {
            x = cand;
            fx = fc;
        }
    }
    Ok(RootReport {
        root: x,
        residual: fx,
        iterations,
        bracket: (a, b),
    })
}

/// Result of a monotone fixed-point iteration started at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub value: f64,
    pub iterations: u64,
    /// Whether every iterate was at least as large as its predecessor.
    pub monotone: bool,
    pub last_step: f64,
}

pub const FIXED_POINT_TOL: f64 = 1e-14;
pub const FIXED_POINT_MAX_ITER: u64 = 1_000_000;

pub fn iterate_fixed_point<M: Fn(f64) -> f64>(map: M, start: f64) -> Result<FixedPoint> {
    let mut x = start;
    let mut monotone = true;
    for it in 1..=FIXED_POINT_MAX_ITER {
        let next = map(x);
        if !next.is_finite() {
            return Err(Error::numerical(
                "fixed-point map returned a non-finite value",
                f64::NAN,
            ));
        }
        let step = next - x;
        if step < 0.0 {
            monotone = false;
        }
        x = next;
        if step.abs() < FIXED_POINT_TOL {
            return Ok(FixedPoint {
                value: x,
                iterations: it,
                monotone,
                last_step: step,
            });
        }
    }
    Err(Error::numerical(
        "fixed-point iteration cap exceeded",
        (map(x) - x).abs(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect_polished(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.residual.abs() < 1e-15);
        assert!(r.iterations <= MAX_BISECTIONS);
    }

    #[test]
    fn bisection_rejects_missing_sign_change() {
        assert!(bisect_polished(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0).is_err());
    }

    #[test]
    fn fixed_point_of_cosine() {
        let fp = iterate_fixed_point(f64::cos, 0.0).unwrap();
        assert!((fp.value - fp.value.cos()).abs() < 1e-13);
        assert!(!fp.monotone);
    }
}
