use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{CollapseSet, EvolveOptions, Propagator};
use crate::fit::golden_min;
use crate::hilbert::{CVector, ModeLayout, C64};
use crate::par;
use crate::pulses::{AncillaVariant, ChoppedGaussian, Dispersive, DriveSchedule, PlacedPulse, PulseShape};
use crate::spin::{larmor_frequency, transition_frequencies_symmetric};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerRabiSettings {
    /// Total Gaussian length, µs.
    pub duration: f64,
    pub n_chop: f64,
    /// Largest amplitude as a multiple of the unit-element π amplitude.
    pub max_amplitude_factor: f64,
    pub amplitude_points: usize,
}

impl Default for PowerRabiSettings {
    fn default() -> Self {
        Self { duration: 14.8, n_chop: 2.0, max_amplitude_factor: 2.5, amplitude_points: 41 }
    }
}

/// Fit of P(a) = B (1 − cos κa).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    pub kappa: f64,
    pub contrast: f64,
    pub rms_residual: f64,
}

/// Least-squares fit of P(a) = B (1 − cos κa) by a dense κ scan (B solved
/// linearly at each κ) refined with golden section. `None` when the data
/// show no oscillation: B below `min_contrast` or less than a quarter period
/// over the amplitude range.
pub fn fit_rabi(amps: &[f64], p: &[f64], kappa_max: f64, min_contrast: f64) -> Result<Option<RabiFit>> {
    if amps.len() != p.len() || amps.len() < 4 {
        return Err(Error::Fit("Rabi fit needs at least 4 matching samples".into()));
    }
    let a_max = amps.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let sse = |k: f64| -> (f64, f64) {
        let (mut fy, mut ff) = (0.0, 0.0);
        for (a, y) in amps.iter().zip(p) {
            let f = 1.0 - (k * a).cos();
            fy += f * y;
            ff += f * f;
        }
        let b = if ff > 0.0 { fy / ff } else { 0.0 };
        let r = amps.iter().zip(p).map(|(a, y)| (y - b * (1.0 - (k * a).cos())).powi(2)).sum();
        (r, b)
    };
    let steps = 2000;
    let dk = kappa_max / steps as f64;
    let best = (1..=steps)
        .map(|i| i as f64 * dk)
        .min_by(|&x, &y| sse(x).0.total_cmp(&sse(y).0))
        .expect("nonempty scan");
    let (kappa, r) = golden_min(|k| sse(k).0, (best - dk).max(0.0), best + dk, 1e-12 * kappa_max, 200);
    let contrast = sse(kappa).1;
    if contrast < min_contrast || kappa * a_max < PI / 2.0 {
        return Ok(None);
    }
    Ok(Some(RabiFit { kappa, contrast, rms_residual: (r / amps.len() as f64).sqrt() }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerRabiPoint {
    pub g_bs: f64,
    pub delta_m: i32,
    pub frequency: f64,
    /// κ in units of the unit-element value, then divided by the anchor.
    pub normalized_rate: Option<f64>,
    pub predicted: f64,
    pub fit: Option<RabiFit>,
}

impl PowerRabiPoint {
    pub fn relative_error(&self) -> Option<f64> {
        self.normalized_rate.map(|r| (r - self.predicted).abs() / self.predicted)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerRabiStudy {
    pub chi: f64,
    pub settings: PowerRabiSettings,
    pub amplitudes: Vec<f64>,
    /// Unit-element rate at the (g_bs = 0, δm = −1) anchor.
    pub anchor_rate: f64,
    pub points: Vec<PowerRabiPoint>,
    /// Largest relative error over non-null points.
    pub max_relative_error: f64,
}

/// Closed-form normalized rate: g/Ω for δm = 0 and (|χ|/2)/Ω for δm = −1.
pub fn predicted_rabi_rate(delta_m: i32, g_bs: f64, chi: f64) -> Result<f64> {
    let omega = larmor_frequency(g_bs, chi);
    match delta_m {
        0 => Ok(g_bs.abs() / omega),
        -1 => Ok(0.5 * chi.abs() / omega),
        _ => Err(Error::InvalidArgument(format!("power-Rabi transition δm = {delta_m} is not modelled"))),
    }
}

/// Final P(e) for a Gaussian of each amplitude resonant with one N = 1 line.
fn rabi_curve(chi: f64, g_bs: f64, freq: f64, amps: &[f64], s: &PowerRabiSettings, opts: EvolveOptions) -> Result<Vec<f64>> {
    let layout = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    // Equal weight on both ground-manifold eigenstates for every g_bs.
    let mut psi = CVector::zeros(layout.dim());
    psi[layout.index(0, 1, 0)] = C64::new(FRAC_1_SQRT_2, 0.0);
    psi[layout.index(1, 0, 0)] = C64::new(0.0, FRAC_1_SQRT_2);
    let opts = EvolveOptions { monitor_truncation: false, ..opts };
    let sigma = s.duration / (2.0 * s.n_chop);
    amps.iter()
        .map(|&a| {
            if a == 0.0 {
                return Ok(0.0);
            }
            let pulse = PlacedPulse {
                start: 0.0,
                shape: PulseShape::Gaussian(ChoppedGaussian { amplitude: a, sigma, n_chop: s.n_chop, detuning: freq, phase: 0.0 }),
            };
            let sch = DriveSchedule::constant_beamsplitter(
                g_bs,
                chi / 2.0,
                0.0,
                s.duration,
                vec![pulse],
                AncillaVariant::Ge,
                Dispersive::ge(chi),
            )?;
            let prop = Propagator::new(&sch, layout, &CollapseSet::default(), opts)?;
            let (v, _) = prop.run_pure(&psi, &[s.duration])?;
            Ok((0..layout.dim()).filter(|i| i % 2 == 1).map(|i| v[0][i].norm_sqr()).sum())
        })
        .collect()
}

/// Power-Rabi rates of the δm = 0 and δm = −1 lines of the N = 1 manifold at
/// symmetric detuning, drive frequencies taken from the oracle.
pub fn study_power_rabi(chi: f64, g_values: &[f64], settings: PowerRabiSettings, opts: EvolveOptions) -> Result<PowerRabiStudy> {
    if settings.amplitude_points < 4 || !(settings.duration > 0.0) || !(settings.max_amplitude_factor > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid power-Rabi settings {settings:?}")));
    }
    let sigma = settings.duration / (2.0 * settings.n_chop);
    let unit = ChoppedGaussian { amplitude: 1.0, sigma, n_chop: settings.n_chop, detuning: 0.0, phase: 0.0 };
    let a_pi = PI / (2.0 * unit.area());
    // P = (1 − cos κa)/2 reaches 1 at a_pi for a unit matrix element.
    let kappa_unit = PI / a_pi;
    let a_max = settings.max_amplitude_factor * a_pi;
    let n = settings.amplitude_points;
    let amps: Vec<f64> = (0..n).map(|i| a_max * i as f64 / (n - 1) as f64).collect();

    let line = |g: f64, dm: i32| -> f64 {
        transition_frequencies_symmetric(1, g, chi)
            .into_iter()
            .find(|l| l.delta_m == dm)
            .expect("N = 1 has δm ∈ {−1, 0, 1}")
            .frequency
    };
    let mut jobs = vec![(0.0, -1)];
    for &g in g_values {
        jobs.push((g, 0));
        jobs.push((g, -1));
    }
    let fits = par::try_map(&jobs, |&(g, dm)| -> Result<(f64, Option<RabiFit>)> {
        let f = line(g, dm);
        let p = rabi_curve(chi, g, f, &amps, &settings, opts)?;
        Ok((f, fit_rabi(&amps, &p, 1.5 * kappa_unit, 0.02)?))
    })?;
    let anchor = fits[0]
        .1
        .ok_or_else(|| Error::Fit("no oscillation at the g_bs = 0, δm = −1 anchor".into()))?;
    let anchor_rate = anchor.kappa / kappa_unit;
    let points = jobs[1..]
        .iter()
        .zip(&fits[1..])
        .map(|(&(g, dm), &(frequency, fit))| {
            Ok(PowerRabiPoint {
                g_bs: g,
                delta_m: dm,
                frequency,
                normalized_rate: fit.map(|f| f.kappa / kappa_unit / anchor_rate),
                predicted: predicted_rabi_rate(dm, g, chi)?,
                fit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_relative_error = points.iter().filter_map(PowerRabiPoint::relative_error).fold(0.0, f64::max);
    Ok(PowerRabiStudy { chi, settings, amplitudes: amps, anchor_rate, points, max_relative_error })
}
