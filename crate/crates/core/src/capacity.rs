//! Closed-form capacities and achievable rates.
//!
//! Every rate here is `-ln x0` where `x0` is the unique root in `(0, 1)` of a
//! low-order polynomial. The MA(1), AR(1) and ARMA(1,1) polynomials share the
//! form `P x² (1 + b x)² - (1 - x²)(1 - a x)²`, so the reductions between them
//! evaluate the identical function.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::roots::{self, RootReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub rate_nats: f64,
    pub x0: f64,
    pub polynomial_residual: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

impl CapacityResult {
    fn from_root(r: RootReport) -> Self {
        Self {
            rate_nats: -r.root.ln(),
            x0: r.root,
            polynomial_residual: r.residual,
            iterations: r.iterations,
            bracket: r.bracket,
        }
    }

    pub fn rate_bits(&self) -> f64 {
        self.rate_nats / std::f64::consts::LN_2
    }
}

/// Capacity-type polynomial whose positive root determines a rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatePolynomial {
    /// `P x² (1 + b x)² - (1 - x²)(1 - a x)²`
    Quartic { snr: f64, a: f64, b: f64 },
    /// `P x² - (1 - x²)(1 - a x²)²`
    Sextic { snr: f64, a: f64 },
}

impl RatePolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RatePolynomial::Quartic { snr, a, b } => {
                let d = 1.0 + b * x;
                let m = 1.0 - a * x;
                snr * x * x * d * d - (1.0 - x * x) * m * m
            }
            RatePolynomial::Sextic { snr, a } => {
                let m = 1.0 - a * x * x;
                snr * x * x - (1.0 - x * x) * m * m
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            RatePolynomial::Quartic { snr, a, b } => {
                let d = 1.0 + b * x;
                let m = 1.0 - a * x;
                2.0 * snr * x * d * d
                    + 2.0 * snr * x * x * d * b
                    + 2.0 * x * m * m
                    + 2.0 * a * (1.0 - x * x) * m
            }
            RatePolynomial::Sextic { snr, a } => {
                let m = 1.0 - a * x * x;
                2.0 * snr * x + 2.0 * x * m * m + 4.0 * a * x * (1.0 - x * x) * m
            }
        }
    }

    pub fn solve(&self) -> Result<CapacityResult> {
        let r = roots::bisect_polished(|x| self.eval(x), |x| self.derivative(x), 0.0, 1.0)?;
        let res = CapacityResult::from_root(r);
        debug_assert!(res.x0 > 0.0 && res.x0 <= 1.0);
        Ok(res)
    }
}

fn check_snr(snr: f64) -> Result<()> {
    ensure_positive("snr", snr)
}

fn check_closed(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x.abs() > 1.0 {
        return Err(Error::domain(format!("need |{name}| <= 1, got {x}")));
    }
    Ok(())
}

fn check_open(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x.abs() >= 1.0 {
        return Err(Error::domain(format!("need |{name}| < 1, got {x}")));
    }
    Ok(())
}

/// Feedback capacity of the MA(1) channel with `|α| ≤ 1`.
pub fn ma1_feedback_capacity(alpha: f64, snr: f64) -> Result<CapacityResult> {
    check_closed("alpha", alpha)?;
    check_snr(snr)?;
    RatePolynomial::Quartic {
        snr,
        a: alpha.abs(),
        b: 0.0,
    }
    .solve()
}

/// Butman's achievable rate for the AR(1) channel.
pub fn ar1_achievable_rate(alpha: f64, snr: f64) -> Result<CapacityResult> {
    check_open("alpha", alpha)?;
    check_snr(snr)?;
    RatePolynomial::Quartic {
        snr,
        a: 0.0,
        b: alpha.abs(),
    }
    .solve()
}

/// Sign selector for the ARMA(1,1) rate; ties (`α + β = 0`) take `+1`.
pub fn arma11_sign(alpha: f64, beta: f64) -> f64 {
    if alpha + beta >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Conjectured feedback capacity (rate of the linear Schalkwijk–Kailath–Butman
/// scheme) for ARMA(1,1) noise.
pub fn arma11_conjectured_rate(alpha: f64, beta: f64, snr: f64) -> Result<CapacityResult> {
    check_open("alpha", alpha)?;
    check_open("beta", beta)?;
    check_snr(snr)?;
    let sigma = arma11_sign(alpha, beta);
    RatePolynomial::Quartic {
        snr,
        a: sigma * alpha,
        b: sigma * beta,
    }
    .solve()
}

/// Rate reached by sequential (greedy) optimization on the interleaved MA(2)
/// channel `Z_i = U_i + α U_{i-2}`. This is *not* that channel's capacity,
/// which equals [`ma1_feedback_capacity`].
pub fn interleaved_ma2_greedy_rate(alpha: f64, snr: f64) -> Result<CapacityResult> {
    check_closed("alpha", alpha)?;
    check_snr(snr)?;
    RatePolynomial::Sextic {
        snr,
        a: alpha.abs(),
    }
    .solve()
}

/// `½ ln(1 + P)`.
pub fn white_capacity(snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::domain(format!("snr must be nonnegative, got {snr}")));
    }
    Ok(0.5 * snr.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_reduction_closed_form() {
        let r = ma1_feedback_capacity(0.0, 3.0).unwrap();
        assert!((r.x0 - 0.5).abs() < 1e-15);
        assert!((r.rate_nats - 2f64.ln()).abs() < 1e-15);
        assert!((r.rate_bits() - 1.0).abs() < 1e-14);
        for p in [0.1, 1.0, 10.0] {
            let r = ma1_feedback_capacity(0.0, p).unwrap();
            assert!((r.rate_nats - 0.5 * (1.0 + p).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn white_capacity_values() {
        assert_eq!(white_capacity(0.0).unwrap(), 0.0);
        assert!((white_capacity(3.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((white_capacity(1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(white_capacity(-1.0).is_err());
    }

    #[test]
    fn ar1_white_reduction() {
        let r = ar1_achievable_rate(0.0, 3.0).unwrap();
        assert!((r.rate_nats - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(ma1_feedback_capacity(0.5, 0.0).is_err());
        assert!(ma1_feedback_capacity(0.5, -1.0).is_err());
        assert!(ma1_feedback_capacity(1.5, 1.0).is_err());
        assert!(ar1_achievable_rate(1.0, 1.0).is_err());
        assert!(arma11_conjectured_rate(0.2, -1.0, 1.0).is_err());
        assert!(interleaved_ma2_greedy_rate(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn arma_sign_tie_break() {
        assert_eq!(arma11_sign(0.3, -0.3), 1.0);
        assert_eq!(arma11_sign(0.3, -0.6), -1.0);
    }

    #[test]
    fn residual_and_rate_invariants() {
        for (a, p) in [(0.9, 1.0), (1.0, 0.01), (-0.4, 100.0)] {
            let r = ma1_feedback_capacity(a, p).unwrap();
            assert!(r.polynomial_residual.abs() <= 1e-12);
            assert!((r.rate_nats + r.x0.ln()).abs() <= 1e-12);
            assert!(r.x0 > 0.0 && r.x0 <= 1.0);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let polys = [
            RatePolynomial::Quartic {
                snr: 2.0,
                a: 0.3,
                b: -0.6,
            },
            RatePolynomial::Sextic { snr: 5.0, a: 0.8 },
        ];
        for p in polys {
            for x in [0.1, 0.45, 0.9] {
                let h = 1e-6;
                let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
                assert!((fd - p.derivative(x)).abs() < 1e-7);
            }
        }
    }
}
