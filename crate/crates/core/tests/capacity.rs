use fbcap::capacity::*;
use proptest::prelude::*;

fn ln2() -> f64 {
    std::f64::consts::LN_2
}

#[test]
fn white_reductions() {
    let r = ma1_feedback_capacity(0.0, 3.0).unwrap();
    assert!((r.x0 - 0.5).abs() < 1e-15);
    assert!((r.rate_nats - ln2()).abs() < 1e-15);
    for p in [0.1, 1.0, 10.0] {
        let r = ma1_feedback_capacity(0.0, p).unwrap();
        assert!((r.rate_nats - 0.5 * (1.0f64 + p).ln()).abs() < 1e-14);
    }
    assert!((ar1_achievable_rate(0.0, 3.0).unwrap().rate_nats - ln2()).abs() < 1e-15);
    assert_eq!(white_capacity(0.0).unwrap(), 0.0);
    assert!((white_capacity(3.0).unwrap() - ln2()).abs() < 1e-15);
    assert!((white_capacity(1.0).unwrap() - 0.5 * ln2()).abs() < 1e-15);
}

#[test]
fn rejects_bad_inputs() {
    assert!(ma1_feedback_capacity(0.5, 0.0).is_err());
    assert!(ma1_feedback_capacity(0.5, -1.0).is_err());
    assert!(ma1_feedback_capacity(1.2, 1.0).is_err());
    assert!(ma1_feedback_capacity(f64::NAN, 1.0).is_err());
    assert!(ar1_achievable_rate(1.0, 1.0).is_err());
    assert!(arma11_conjectured_rate(0.2, -1.0, 1.0).is_err());
    assert!(interleaved_ma2_greedy_rate(1.01, 1.0).is_err());
    assert!(white_capacity(-1.0).is_err());
}

#[test]
fn unit_alpha_is_solvable() {
    for a in [1.0, -1.0] {
        let r = ma1_feedback_capacity(a, 1.0).unwrap();
        assert!(r.x0 > 0.0 && r.x0 < 1.0);
        assert!(r.polynomial_residual.abs() <= 1e-12);
    }
}

#[test]
fn arma_negative_sign_branch() {
    assert_eq!(arma11_sign(0.3, -0.6), -1.0);
    assert_eq!(arma11_sign(0.3, -0.3), 1.0);
    let r = arma11_conjectured_rate(0.3, -0.6, 1.0).unwrap();
    // σ = −1: P x² (1 + 0.6x)² = (1 − x²)(1 + 0.3x)²
    let x = r.x0;
    let lhs = x * x * (1.0 + 0.6 * x).powi(2);
    let rhs = (1.0 - x * x) * (1.0 + 0.3 * x).powi(2);
    assert!((lhs - rhs).abs() < 1e-14);
    assert!(r.rate_nats > 0.0);
}

#[test]
fn interleaved_counterexample_at_p5() {
    let g = interleaved_ma2_greedy_rate(0.8, 5.0).unwrap();
    let c = ma1_feedback_capacity(0.8, 5.0).unwrap();
    assert!(g.rate_nats < c.rate_nats);
    let x = g.x0;
    assert!((5.0 * x * x - (1.0 - x * x) * (1.0 - 0.8 * x * x).powi(2)).abs() < 1e-14);
}

#[test]
fn ma1_rate_at_point_nine_matches_fixed_point() {
    let r = ma1_feedback_capacity(0.9, 1.0).unwrap();
    let fp = fbcap::recursion::ma1_fixed_point(0.9, 1.0).unwrap();
    assert!((r.rate_nats - fp.value).abs() < 1e-10);
}

#[test]
fn ar1_rate_matches_fixed_point() {
    let r = ar1_achievable_rate(0.5, 2.0).unwrap();
    let fp = fbcap::recursion::ar1_fixed_point(0.5, 2.0).unwrap();
    assert!((r.rate_nats - fp.value).abs() < 1e-10);
}

#[test]
fn monotonicity_grids() {
    let ps = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0];
    let alphas = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    for &a in &alphas {
        for w in ps.windows(2) {
            assert!(
                ma1_feedback_capacity(a, w[0]).unwrap().rate_nats
                    < ma1_feedback_capacity(a, w[1]).unwrap().rate_nats
            );
            assert!(
                ar1_achievable_rate(a, w[0]).unwrap().rate_nats
                    < ar1_achievable_rate(a, w[1]).unwrap().rate_nats
            );
            assert!(
                interleaved_ma2_greedy_rate(a, w[0]).unwrap().rate_nats
                    < interleaved_ma2_greedy_rate(a, w[1]).unwrap().rate_nats
            );
        }
    }
    for &p in &ps {
        for w in alphas.windows(2) {
            // larger |α| means more noise memory to exploit
            assert!(
                ma1_feedback_capacity(w[0], p).unwrap().rate_nats
                    <= ma1_feedback_capacity(w[1], p).unwrap().rate_nats
            );
            assert!(
                ar1_achievable_rate(w[0], p).unwrap().rate_nats
                    <= ar1_achievable_rate(w[1], p).unwrap().rate_nats
            );
        }
    }
}

#[test]
fn feedback_gain_over_white() {
    for p in [0.1, 1.0, 10.0] {
        let w = white_capacity(p).unwrap();
        assert!((ma1_feedback_capacity(0.0, p).unwrap().rate_nats - w).abs() < 1e-14);
        for a in [-0.9, -0.2, 0.2, 0.9] {
            assert!(ma1_feedback_capacity(a, p).unwrap().rate_nats > w + 1e-6);
        }
    }
}

fn sign_changes(f: impl Fn(f64) -> f64) -> usize {
    let mut changes = 0;
    let mut prev = f(1e-4);
    for i in 2..10_000 {
        let v = f(i as f64 * 1e-4);
        if v.signum() != prev.signum() && v != 0.0 {
            changes += 1;
        }
        prev = v;
    }
    changes
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn residuals_and_uniqueness(a in -0.999f64..0.999, b in -0.999f64..0.999, p in 0.01f64..100.0) {
        let polys = [
            RatePolynomial::Quartic { snr: p, a: a.abs(), b: 0.0 },
            RatePolynomial::Quartic { snr: p, a: 0.0, b: a.abs() },
            RatePolynomial::Quartic { snr: p, a: arma11_sign(a, b) * a, b: arma11_sign(a, b) * b },
            RatePolynomial::Sextic { snr: p, a: a.abs() },
        ];
        let results = [
            ma1_feedback_capacity(a, p).unwrap(),
            ar1_achievable_rate(a, p).unwrap(),
            arma11_conjectured_rate(a, b, p).unwrap(),
            interleaved_ma2_greedy_rate(a, p).unwrap(),
        ];
        for (poly, r) in polys.iter().zip(&results) {
            prop_assert!(r.polynomial_residual.abs() <= 1e-12);
            prop_assert!(poly.eval(r.x0).abs() <= 1e-12);
            prop_assert!(r.x0 > 0.0 && r.x0 <= 1.0);
            prop_assert!((r.rate_nats + r.x0.ln()).abs() <= 1e-12);
            prop_assert_eq!(sign_changes(|x| poly.eval(x)), 1);
        }
    }

    #[test]
    fn arma_reductions(a in -0.999f64..0.999, p in 0.01f64..100.0) {
        let m = ma1_feedback_capacity(a, p).unwrap().rate_nats;
        prop_assert!((arma11_conjectured_rate(a, 0.0, p).unwrap().rate_nats - m).abs() <= 1e-12);
        let r = ar1_achievable_rate(a, p).unwrap().rate_nats;
        prop_assert!((arma11_conjectured_rate(0.0, a, p).unwrap().rate_nats - r).abs() <= 1e-12);
    }

    #[test]
    fn interleaved_below_capacity(a in 0.05f64..1.0, p in 0.01f64..100.0) {
        let g = interleaved_ma2_greedy_rate(a, p).unwrap().rate_nats;
        let c = ma1_feedback_capacity(a, p).unwrap().rate_nats;
        prop_assert!(g < c);
    }
}
