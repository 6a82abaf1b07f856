use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;

/// g_bs(x) = Σ_{k=1..5} c_k x^k mapping drive amplitude to beamsplitter rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePolynomial {
    /// Coefficients of x¹ through x⁵.
    pub coefficients: [f64; 5],
    pub residual_rms: f64,
    pub max_residual: f64,
    /// Whether the fit is strictly monotone over the fitted amplitude range.
    pub monotonic: bool,
}

impl AmplitudePolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| (acc + c) * x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coefficients.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * x + (k + 1) as f64 * c)
    }
}

/// Least-squares degree-5 fit with the intercept pinned at zero.
pub fn fit_amplitude_polynomial(amps: &[f64], g_bs: &[f64]) -> Result<AmplitudePolynomial> {
    if amps.len() != g_bs.len() {
        return Err(Error::InvalidArgument(format!("{} amplitudes vs {} rates", amps.len(), g_bs.len())));
    }
    if amps.len() < 6 {
        return Err(Error::Fit(format!("degree-5 fit needs at least 6 points, got {}", amps.len())));
    }
    if amps.iter().chain(g_bs).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite calibration data".into()));
    }
    // Scale x to O(1) so the Vandermonde columns are comparable.
    let scale = amps.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Fit("all amplitudes are zero".into()));
    }
    let design = DMatrix::from_fn(amps.len(), 5, |r, c| (amps[r] / scale).powi(c as i32 + 1));
    let beta = least_squares(&design, g_bs)?;
    let coefficients: [f64; 5] = std::array::from_fn(|k| beta[k] / scale.powi(k as i32 + 1));
    let mut poly = AmplitudePolynomial { coefficients, residual_rms: 0.0, max_residual: 0.0, monotonic: true };
    let res: Vec<f64> = amps.iter().zip(g_bs).map(|(&x, &y)| poly.eval(x) - y).collect();
    poly.residual_rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    poly.max_residual = res.iter().fold(0.0, |m, r| m.max(r.abs()));
    let lo = amps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = amps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d: Vec<f64> = (0..=200).map(|i| poly.derivative(lo + (hi - lo) * i as f64 / 200.0)).collect();
    poly.monotonic = d.iter().all(|&v| v > 0.0) || d.iter().all(|&v| v < 0.0);
    Ok(poly)
}
