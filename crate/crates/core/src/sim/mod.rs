//! Monte Carlo simulation of the stationary-filter feedback coding scheme
//! over the MA(1) channel: encoder, maximum-likelihood decoder, error and
//! mean-square-error measurement, and the output spectrum.

mod montecarlo;
mod scheme;
mod spectrum;

pub use montecarlo::{
    run_montecarlo, run_montecarlo_with, sample_innovations, spectrum_relative_error, tail_slope,
    Innovations, SimOptions, SimReport, SpectrumPoint, MIN_TRIALS,
};
pub use scheme::{
    decode_ml, dense_model, encode, erfc_error_estimate, gaussian_error_estimate, sgn, Decoded,
    DecoderModel, SchemeParams, Transmission,
};
pub use spectrum::{
    entropy_gap, output_spectrum_forms, output_spectrum_theoretical, EntropyGap, OutputSpectrum,
};

use crate::error::Result;
use crate::oracle::{self, GenericOptions};

/// Best nonfeedback n-block rate on the stationary MA(1) covariance: the
/// generic optimizer with `B` frozen at zero.
pub fn nonfeedback_baseline(alpha: f64, snr: f64, n: usize) -> Result<f64> {
    let opts = GenericOptions {
        feedback: false,
        ..GenericOptions::default()
    };
    let (_, est) = oracle::generic_optimize_with(alpha, n, snr, false, &opts)?;
    Ok(est.rate_nats)
}
