//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Integrable endpoint singularities (such as `ln|ω - π|`) are handled by
//! repeated bisection since the rule never samples the endpoints.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(WGK[..7].iter()).enumerate() {
        let fsum = f(center - half * x) + f(center + half * x);
        k += w * fsum;
        if j % 2 == 1 {
            g += WG[j / 2] * fsum;
        }
    }
    Segment {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        let value: f64 = segments.iter().map(|s| s.value).sum();
        if !value.is_finite() {
            return Err(Error::numerical(
                "integrand produced a non-finite value",
                total_err,
            ));
        }
        if total_err <= abs_tol {
            return Ok(Quadrature {
                value,
                error_estimate: total_err,
                intervals: segments.len(),
            });
        }
        if segments.len() >= max_intervals {
            return Err(Error::numerical(
                "adaptive quadrature exceeded its interval budget",
                total_err,
            ));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("segment list is never empty");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::numerical("quadrature interval underflow", total_err));
        }
        segments.push(kronrod15(&f, s.a, mid));
        segments.push(kronrod15(&f, mid, s.b));
    }
}

/// Integrates over consecutive sub-intervals given by `breakpoints`, with the
/// tolerance split evenly. Known singular points belong in `breakpoints`.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    if breakpoints.len() < 2 {
        return Err(Error::domain("need at least two breakpoints"));
    }
    let pieces = (breakpoints.len() - 1) as f64;
    let mut total = Quadrature {
        value: 0.0,
        error_estimate: 0.0,
        intervals: 0,
    };
    for w in breakpoints.windows(2) {
        let q = integrate(&f, w[0], w[1], abs_tol / pieces, max_intervals)?;
        total.value += q.value;
        total.error_estimate += q.error_estimate;
        total.intervals += q.intervals;
    }
    Ok(total)
}
