use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scheme::SchemeParams;
use crate::error::{Error, Result};
use crate::noise::{self, NoiseModel};

/// The stationary output spectrum in its three algebraically equal forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpectrum {
    /// `|1 + α e^{-jω} + σ e^{-jω} / (1 − β e^{-jω})|²`
    pub direct: f64,
    /// `|(1 + αβ² e^{-jω})(1 − β^{-1} e^{-jω}) / (1 − β e^{-jω})|²`
    pub factored: f64,
    /// `β^{-2} |1 + αβ² e^{-jω}|²`
    pub simplified: f64,
}

impl OutputSpectrum {
    pub fn max_discrepancy(&self) -> f64 {
        let d1 = (self.direct - self.simplified).abs();
        let d2 = (self.factored - self.simplified).abs();
        d1.max(d2) / self.simplified.abs().max(1.0)
    }
}

fn mod2(re: f64, im: f64) -> f64 {
    re * re + im * im
}

pub fn output_spectrum_forms(params: &SchemeParams, omega: f64) -> Result<OutputSpectrum> {
    if !omega.is_finite() {
        return Err(Error::domain("omega must be finite"));
    }
    let (a, b, s) = (params.alpha, params.beta, params.sigma);
    if b == 0.0 {
        return Ok(OutputSpectrum {
            direct: 1.0,
            factored: 1.0,
            simplified: 1.0,
        });
    }
    let (c, sn) = (omega.cos(), -omega.sin());
    // 1 − β z with z = e^{-jω}
    let (dre, dim) = (1.0 - b * c, -b * sn);
    let den = mod2(dre, dim);
    // σ z / (1 − β z)
    let (qre, qim) = (
        (s * c * dre + s * sn * dim) / den,
        (s * sn * dre - s * c * dim) / den,
    );
    let direct = mod2(1.0 + a * c + qre, a * sn + qim);
    let factored = noise::one_plus_mod2(a * b * b, omega) * noise::one_plus_mod2(-1.0 / b, omega)
        / noise::one_plus_mod2(-b, omega);
    let simplified = noise::one_plus_mod2(a * b * b, omega) / (b * b);
    Ok(OutputSpectrum {
        direct,
        factored,
        simplified,
    })
}

/// `β^{-2} |1 + αβ² e^{-jω}|²`; the white branch returns 1 when `β = 0`.
pub fn output_spectrum_theoretical(params: &SchemeParams, omega: f64) -> Result<f64> {
    Ok(output_spectrum_forms(params, omega)?.simplified)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyGap {
    /// `(1/4π) ∫ ln(2πe S_Y)`
    pub output_entropy_rate: f64,
    /// `(1/4π) ∫ ln(2πe S_Z)`
    pub noise_entropy_rate: f64,
    pub quadrature_error: f64,
}

impl EntropyGap {
    pub fn gap(&self) -> f64 {
        self.output_entropy_rate - self.noise_entropy_rate
    }
}

/// Entropy rates of the output and noise processes by quadrature of their
/// spectra, using the direct (unsimplified) form of the output spectrum.
pub fn entropy_gap(params: &SchemeParams) -> Result<EntropyGap> {
    let base = 0.5 * (2.0 * PI * std::f64::consts::E).ln();
    let out = noise::log_spectrum_integral(|w| {
        output_spectrum_forms(params, w).map_or(f64::NAN, |s| s.direct)
    })?;
    let nz = noise::log_spectrum_integral(|w| {
        noise::spectral_density_unchecked(&NoiseModel::ma1(params.alpha), w)
    })?;
    Ok(EntropyGap {
        output_entropy_rate: base + out.value,
        noise_entropy_rate: base + nz.value,
        quadrature_error: out.error_estimate + nz.error_estimate,
    })
}
