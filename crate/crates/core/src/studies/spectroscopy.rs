use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{CollapseSet, EvolveOptions, Propagator};
use crate::fit::golden_max;
use crate::hilbert::{CVector, ModeLayout, C64};
use crate::par;
use crate::pulses::{AncillaVariant, Dispersive, DriveSchedule, PlacedPulse, PulseShape, SquarePulse};
use crate::spin::transition_frequencies_general;

/// Weak square probe under a constant beamsplitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub amplitude: f64,
    pub duration: f64,
}

impl Probe {
    /// A π-pulse on a unit matrix element lasting `periods`·2π/|χ|.
    pub fn pi_pulse(chi: f64, periods: f64) -> Self {
        let duration = periods * 2.0 * PI / chi.abs();
        Self { amplitude: PI / (2.0 * duration), duration }
    }

    /// Half width at half maximum of the π-pulse line,
    /// P(δ) = Ω²/(Ω²+δ²) sin²(√(Ω²+δ²) T/2) with ΩT = π.
    pub fn half_linewidth(&self) -> f64 {
        let t = self.duration;
        let w = PI / t;
        let p = |d: f64| {
            let r = w.hypot(d);
            (w / r).powi(2) * (0.5 * r * t).sin().powi(2)
        };
        let (mut lo, mut hi) = (0.0, 2.0 * PI / t);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if p(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Binomial input Σ_k √C(N,k) |k, N−k⟩ / 2^{N/2}: |0,0⟩, (|0,1⟩+|1,0⟩)/√2, …
pub fn spectroscopy_input(n: u32, layout: ModeLayout) -> CVector {
    let n = n as usize;
    let mut v = CVector::zeros(layout.dim());
    let mut binom = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        v[layout.index(k, n - k, 0)] = C64::new((binom / 2f64.powi(n as i32)).sqrt(), 0.0);
    }
    v
}

struct Spectrometer {
    chi: f64,
    delta: f64,
    probe: Probe,
    layout: ModeLayout,
    psi: CVector,
    opts: EvolveOptions,
}

impl Spectrometer {
    fn new(n: u32, chi: f64, delta: f64, probe: Probe, opts: EvolveOptions) -> Self {
        let d = n as usize + 2;
        // One level above N keeps every manifold up to N exact.
        let layout = ModeLayout { dim_a: d, dim_b: d, dim_q: 2 };
        Self {
            chi,
            delta,
            probe,
            layout,
            psi: spectroscopy_input(n, layout),
            opts: EvolveOptions { monitor_truncation: false, ..opts },
        }
    }

    fn p_e(&self, g_bs: f64, detuning: f64) -> Result<f64> {
        let pulse = PlacedPulse {
            start: 0.0,
            shape: PulseShape::Square(SquarePulse {
                amplitude: self.probe.amplitude,
                duration: self.probe.duration,
                ramp: 0.0,
                detuning,
                phase: 0.0,
            }),
        };
        let s = DriveSchedule::constant_beamsplitter(
            g_bs,
            self.delta,
            0.0,
            self.probe.duration,
            vec![pulse],
            AncillaVariant::Ge,
            Dispersive::ge(self.chi),
        )?;
        let prop = Propagator::new(&s, self.layout, &CollapseSet::default(), self.opts)?;
        let (v, _) = prop.run_pure(&self.psi, &[s.duration])?;
        Ok((0..self.layout.dim()).filter(|i| i % 2 == 1).map(|i| v[0][i].norm_sqr()).sum())
    }
}

/// One extracted peak next to its predicted line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub g_bs: f64,
    /// m_e − m_g of the predicted line (any representative when degenerate).
    pub delta_m: i32,
    pub predicted: f64,
    pub measured: f64,
    pub height: f64,
}

impl Ridge {
    pub fn deviation(&self) -> f64 {
        (self.measured - self.predicted).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyMap {
    pub n_photons: u32,
    pub chi: f64,
    pub delta: f64,
    pub probe: Probe,
    pub g_values: Vec<f64>,
    pub detunings: Vec<f64>,
    /// `p_e[i][j]` at `g_values[i]`, `detunings[j]`.
    pub p_e: Vec<Vec<f64>>,
    pub ridges: Vec<Ridge>,
    /// Lines skipped because a neighbour sits within two linewidths.
    pub unresolved: usize,
    pub half_linewidth: f64,
    pub max_deviation: f64,
}

impl SpectroscopyMap {
    /// Distinct ridges found at the largest g_bs.
    pub fn ridges_at_last_g(&self) -> Vec<&Ridge> {
        let g = *self.g_values.last().expect("nonempty grid");
        self.ridges.iter().filter(|r| r.g_bs == g).collect()
    }
}

/// Peaks smaller than this are treated as absent.
pub const MIN_RIDGE_HEIGHT: f64 = 0.02;

/// Distinct predicted lines (m_e − m_g, frequency), merging exact degeneracies.
fn distinct_lines(n: u32, g: f64, delta: f64, chi: f64) -> Vec<(i32, f64)> {
    let mut lines: Vec<(i32, f64)> = transition_frequencies_general(n, g, delta, chi)
        .into_iter()
        .map(|l| ((l.m_e.twice() - l.m_g.twice()) / 2, l.frequency))
        .collect();
    lines.sort_by(|a, b| a.1.total_cmp(&b.1));
    lines.dedup_by(|a, b| (a.1 - b.1).abs() < 1e-9 * chi.abs());
    lines
}

/// P(e) after the probe on a (g_bs × δω) grid, plus peak positions found
/// near each predicted line by a local scan refined with golden section.
pub fn study_spectroscopy_map(
    n: u32,
    chi: f64,
    delta: f64,
    g_values: &[f64],
    detunings: &[f64],
    probe: Probe,
    opts: EvolveOptions,
) -> Result<SpectroscopyMap> {
    if g_values.is_empty() || detunings.is_empty() {
        return Err(Error::InvalidArgument("spectroscopy grids must be nonempty".into()));
    }
    let strongest = g_values.iter().fold(chi.abs(), |m, g| m.max(g.abs()));
    if probe.amplitude > 0.1 * strongest {
        log::warn!("probe amplitude {} rad/µs is not small against max(g_bs, |χ|) = {strongest}", probe.amplitude);
    }
    let sp = Spectrometer::new(n, chi, delta, probe, opts);
    let jobs: Vec<(f64, f64)> = g_values.iter().flat_map(|&g| detunings.iter().map(move |&d| (g, d))).collect();
    let flat = par::try_map(&jobs, |&(g, d)| sp.p_e(g, d))?;
    let p_e: Vec<Vec<f64>> = flat.chunks(detunings.len()).map(<[f64]>::to_vec).collect();

    let hwhm = probe.half_linewidth();
    let mut targets = Vec::new();
    let mut unresolved = 0;
    for &g in g_values {
        let lines = distinct_lines(n, g, delta, chi);
        for (k, &(dm, f)) in lines.iter().enumerate() {
            let gap = lines
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, l)| (l.1 - f).abs())
                .fold(f64::INFINITY, f64::min);
            let w = (0.5 * gap).min(0.25 * chi.abs());
            if w < 2.0 * hwhm {
                unresolved += 1;
                continue;
            }
            targets.push((g, dm, f, w));
        }
    }
    let found = par::try_map(&targets, |&(g, dm, f, w)| -> Result<Option<Ridge>> {
        let scan: Vec<f64> = (0..=40).map(|i| f - w + 2.0 * w * i as f64 / 40.0).collect();
        let vals = scan.iter().map(|&d| sp.p_e(g, d)).collect::<Result<Vec<_>>>()?;
        let k = (0..scan.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("nonempty scan");
        if vals[k] < MIN_RIDGE_HEIGHT {
            return Ok(None);
        }
        let step = scan[1] - scan[0];
        let mut err = None;
        let (x, h) = golden_max(
            |d| {
                sp.p_e(g, d).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    f64::NEG_INFINITY
                })
            },
            scan[k] - step,
            scan[k] + step,
            1e-6 * hwhm,
            100,
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Some(Ridge { g_bs: g, delta_m: dm, predicted: f, measured: x, height: h }))
    })?;
    let ridges: Vec<Ridge> = found.into_iter().flatten().collect();
    let max_deviation = ridges.iter().map(Ridge::deviation).fold(0.0, f64::max);
    Ok(SpectroscopyMap {
        n_photons: n,
        chi,
        delta,
        probe,
        g_values: g_values.to_vec(),
        detunings: detunings.to_vec(),
        p_e,
        ridges,
        unresolved,
        half_linewidth: hwhm,
        max_deviation,
    })
}

/// The Δ = χ map: the N = 1 degeneracy splits into four lines.
pub fn study_nonsymmetric_spectrum(
    chi: f64,
    g_values: &[f64],
    detunings: &[f64],
    probe: Probe,
    opts: EvolveOptions,
) -> Result<SpectroscopyMap> {
    study_spectroscopy_map(1, chi, chi, g_values, detunings, probe, opts)
}
