use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{CollapseSet, EvolveOptions, Propagator};
use crate::fit::{golden_max, golden_min};
use crate::hilbert::{CVector, C64};
use crate::par;
use crate::protocols::{CheckDesign, CheckParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussianTuneConfig {
    pub chi: f64,
    pub g_bs_start: f64,
    pub g_bs_max: f64,
    pub n_chop: f64,
    pub sigma_start: f64,
    pub sigma_max: f64,
    /// Geometric step of the selectivity sweep.
    pub sigma_factor: f64,
    /// Largest tolerated ancilla excitation from a logical input.
    pub excitation_threshold: f64,
    /// Summed return infidelity of the logical inputs at which the loop stops.
    pub infidelity_target: f64,
    pub min_excitation_00: f64,
    pub max_loops: usize,
    /// Adds |1,1⟩ to the selectivity and revolution steps.
    pub include_11: bool,
}

impl Default for GaussianTuneConfig {
    fn default() -> Self {
        let chi = -2.0 * PI * 1.066;
        Self {
            chi,
            g_bs_start: 1.2 * chi.abs(),
            g_bs_max: 2.0 * PI * 2.05,
            n_chop: 4.0,
            sigma_start: 0.25,
            sigma_max: 2.0,
            sigma_factor: 1.1,
            excitation_threshold: 2e-5,
            infidelity_target: 1e-4,
            min_excitation_00: 0.999,
            max_loops: 12,
            include_11: false,
        }
    }
}

impl GaussianTuneConfig {
    pub fn validate(&self) -> Result<()> {
        let lo = 0.75f64.sqrt() * self.chi.abs();
        if !(self.g_bs_start > lo && self.g_bs_start < self.g_bs_max) {
            return Err(Error::InvalidArgument(format!(
                "g_bs start {} must lie in ({lo}, {}) rad/µs",
                self.g_bs_start, self.g_bs_max
            )));
        }
        if !(self.n_chop > 0.0 && self.sigma_start > 0.0 && self.sigma_max > self.sigma_start && self.sigma_factor > 1.0) {
            return Err(Error::InvalidArgument("invalid Gaussian sweep settings".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTuneReport {
    pub params: CheckParams,
    pub sigma: f64,
    pub n_chop: f64,
    /// (σ, largest logical-state excitation) from the selectivity sweep.
    pub sigma_sweep: Vec<(f64, f64)>,
    /// Beamsplitter revolutions over the pulse at the final parameters.
    pub revolutions: f64,
    pub p_excite_00: f64,
    pub return_infidelity: f64,
    /// Return infidelity after each pass through the revolution step.
    pub cost_trace: Vec<f64>,
    pub loops: usize,
    pub converged: bool,
}

/// Per-input (P(u), 1 − return fidelity) for |0,0⟩, |0,1⟩, |1,0⟩ (and |1,1⟩).
pub(crate) fn probe(design: &CheckDesign, p: &CheckParams, include_11: bool) -> Result<Vec<(f64, f64)>> {
    let layout = design.layout(if include_11 { 2 } else { 1 });
    let schedule = design.schedule(p)?;
    let opts = EvolveOptions { monitor_truncation: false, ..Default::default() };
    let prop = Propagator::new(&schedule, layout, &CollapseSet::default(), opts)?;
    let upper = design.variant.upper().index();
    let mut inputs = vec![(0, 0), (0, 1), (1, 0)];
    if include_11 {
        inputs.push((1, 1));
    }
    let t = [schedule.duration];
    par::try_map(&inputs, |&(na, nb)| -> Result<(f64, f64)> {
        let mut psi = CVector::zeros(layout.dim());
        psi[layout.index(na, nb, 0)] = C64::new(1.0, 0.0);
        let (v, _) = prop.run_pure(&psi, &t)?;
        let v = &v[0];
        let p_up: f64 = (0..layout.dim()).filter(|i| i % layout.dim_q == upper).map(|i| v[i].norm_sqr()).sum();
        Ok((p_up, (1.0 - v[layout.index(na, nb, 0)].norm_sqr()).max(0.0)))
    })
}

fn logical_excitation(r: &[(f64, f64)]) -> f64 {
    r[1..].iter().map(|x| x.0).fold(0.0, f64::max)
}

fn return_infidelity(r: &[(f64, f64)]) -> f64 {
    r[1..].iter().map(|x| x.1).sum()
}

fn params(cfg: &GaussianTuneConfig, g: f64, sigma: f64, amplitude: f64) -> CheckParams {
    CheckParams { g_bs: g, delta: cfg.chi / 2.0, t_p: 2.0 * cfg.n_chop * sigma, amplitude, delta_omega: 0.0 }
}

/// Maximizes P(u | 0,0) over the amplitude around the area-theorem value.
fn calibrate_amplitude(design: &CheckDesign, p: CheckParams) -> Result<(f64, f64)> {
    let a0 = design.pi_amplitude(p.t_p);
    let mut err = None;
    let (a, pe) = golden_max(
        |a| match probe(design, &CheckParams { amplitude: a, ..p }, false) {
            Ok(r) => r[0].0,
            Err(e) => {
                err = Some(e);
                f64::NEG_INFINITY
            }
        },
        0.7 * a0,
        1.3 * a0,
        1e-7 * a0,
        80,
    );
    match err {
        Some(e) => Err(e),
        None => Ok((a, pe)),
    }
}

/// Beamsplitter revolutions Ω T / 2π with the ancilla in |g⟩ at Δ = χ/2.
fn revolutions(chi: f64, g: f64, t_p: f64) -> f64 {
    g.hypot(chi / 2.0) * t_p / (2.0 * PI)
}

/// Chopped-Gaussian check tune-up: π-pulse calibration on |0,0⟩, a
/// selectivity sweep in σ at fixed A·σ, then alternating revolution
/// matching and amplitude recalibration until the logical states return.
pub fn tune_gaussian_erasure_check(cfg: &GaussianTuneConfig) -> Result<GaussianTuneReport> {
    cfg.validate()?;
    let design = CheckDesign::gaussian(cfg.chi, cfg.n_chop);
    let mut g = cfg.g_bs_start;
    let mut sigma = cfg.sigma_start;
    let (mut amp, _) = calibrate_amplitude(&design, params(cfg, g, sigma, 0.0))?;

    let area = amp * sigma;
    let mut sigma_sweep = Vec::new();
    let mut chosen = None;
    let mut s = cfg.sigma_start;
    while s <= cfg.sigma_max * (1.0 + 1e-12) {
        let r = probe(&design, &params(cfg, g, s, area / s), cfg.include_11)?;
        let x = logical_excitation(&r);
        sigma_sweep.push((s, x));
        if x < cfg.excitation_threshold {
            chosen = Some(s);
            break;
        }
        s *= cfg.sigma_factor;
    }
    sigma = chosen.ok_or_else(|| {
        Error::Numerical(format!("no σ up to {} µs brings logical excitation below {}", cfg.sigma_max, cfg.excitation_threshold))
    })?;
    amp = area / sigma;

    let mut cost_trace = Vec::new();
    for loops in 1..=cfg.max_loops {
        let t_p = 2.0 * cfg.n_chop * sigma;
        let r0 = revolutions(cfg.chi, g, t_p);
        let m = if (r0 - r0.round()).abs() < 0.15 { r0.round() } else { r0.ceil() }.max(1.0);
        let g_target = ((2.0 * PI * m / t_p).powi(2) - cfg.chi.powi(2) / 4.0).max(0.0).sqrt();
        let mut err = None;
        let mut ret = |p: CheckParams| match probe(&design, &p, cfg.include_11) {
            Ok(r) => return_infidelity(&r),
            Err(e) => {
                err = Some(e);
                f64::INFINITY
            }
        };
        if g_target <= cfg.g_bs_max {
            let w = 0.05 * g_target;
            let hi = (g_target + w).min(cfg.g_bs_max);
            g = golden_min(|x| ret(params(cfg, x, sigma, amp)), g_target - w, hi, 1e-9 * g_target, 80).0;
        } else {
            // Same g: stretch the pulse to the next whole revolution.
            let s_target = PI * m / (cfg.n_chop * g.hypot(cfg.chi / 2.0));
            let w = 0.05 * s_target;
            let cur_area = amp * sigma;
            sigma = golden_min(|x| ret(params(cfg, g, x, cur_area / x)), s_target - w, s_target + w, 1e-9 * s_target, 80).0;
            amp = cur_area / sigma;
        }
        if let Some(e) = err {
            return Err(e);
        }
        let (a, _) = calibrate_amplitude(&design, params(cfg, g, sigma, amp))?;
        amp = a;
        let p = params(cfg, g, sigma, amp);
        let r = probe(&design, &p, cfg.include_11)?;
        let inf = return_infidelity(&r);
        cost_trace.push(inf);
        if inf < cfg.infidelity_target && r[0].0 > cfg.min_excitation_00 {
            return Ok(GaussianTuneReport {
                params: p,
                sigma,
                n_chop: cfg.n_chop,
                sigma_sweep,
                revolutions: revolutions(cfg.chi, g, p.t_p),
                p_excite_00: r[0].0,
                return_infidelity: inf,
                cost_trace,
                loops,
                converged: true,
            });
        }
    }
    Err(Error::IterationCap(cfg.max_loops))
}
