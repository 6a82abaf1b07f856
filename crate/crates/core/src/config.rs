//! Study configuration. Files use MHz (ordinary frequency) and µs; the
//! resolved [`SystemParams`] hold angular frequencies in rad/µs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{linspace, EvolveOptions, NoiseParams};
use crate::protocols::{CheckParams, GateKind, ReadoutModel};
use crate::studies::{PowerRabiSettings, ScalingSettings, ScalingTune};
use crate::units::{mhz, to_mhz};

/// Device constants as written in a config file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub chi_bob_mhz: f64,
    pub chi_alice_mhz: f64,
    pub kappa_readout_mhz: f64,
    pub alpha_mhz: f64,
    pub chi_tr_mhz: f64,
    pub chi_ct_mhz: f64,
    pub g_bs_max_mhz: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            chi_bob_mhz: -1.066,
            chi_alice_mhz: 0.7773,
            kappa_readout_mhz: 1.77,
            alpha_mhz: -185.0,
            chi_tr_mhz: -0.86,
            chi_ct_mhz: -1.066,
            g_bs_max_mhz: 2.05,
        }
    }
}

/// Device constants in rad/µs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub chi_bob: f64,
    pub chi_alice: f64,
    pub kappa_readout: f64,
    pub alpha: f64,
    pub chi_tr: f64,
    pub chi_ct: f64,
    pub g_bs_max: f64,
}

impl SystemParams {
    /// Caps |g_bs| at `g_bs_max`, logging a warning when it does.
    pub fn clip_g_bs(&self, g_bs: f64) -> f64 {
        if g_bs.abs() > self.g_bs_max {
            log::warn!(
                "g_bs/2π = {:.4} MHz exceeds the {:.4} MHz limit; clipping",
                to_mhz(g_bs.abs()),
                to_mhz(self.g_bs_max)
            );
            self.g_bs_max.copysign(g_bs)
        } else {
            g_bs
        }
    }
}

impl From<&SystemConfig> for SystemParams {
    fn from(c: &SystemConfig) -> Self {
        Self {
            chi_bob: mhz(c.chi_bob_mhz),
            chi_alice: mhz(c.chi_alice_mhz),
            kappa_readout: mhz(c.kappa_readout_mhz),
            alpha: mhz(c.alpha_mhz),
            chi_tr: mhz(c.chi_tr_mhz),
            chi_ct: mhz(c.chi_ct_mhz),
            g_bs_max: mhz(c.g_bs_max_mhz),
        }
    }
}

/// Inclusive uniform grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.points == 0 || !self.start.is_finite() || !self.stop.is_finite() || (self.points > 1 && self.stop < self.start) {
            return Err(Error::Config(format!("grid {name} must be finite and increasing with at least one point")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10 }
    }
}

/// Spectroscopy maps, in units of |χ|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectroscopyConfig {
    pub photon_numbers: Vec<u32>,
    pub g_over_chi: Grid,
    pub detuning_over_chi: Grid,
    /// Beamsplitter detuning Δ/χ; 0.5 is the symmetric point.
    pub delta_over_chi: f64,
    /// Probe length in units of 2π/|χ|.
    pub probe_periods: f64,
    /// Probe amplitude in units of |χ|; absent means a π-pulse, π/(2T).
    pub probe_amplitude_over_chi: Option<f64>,
}

impl Default for SpectroscopyConfig {
    fn default() -> Self {
        Self {
            photon_numbers: vec![0, 1, 2],
            g_over_chi: Grid::new(0.0, 1.9, 30),
            detuning_over_chi: Grid::new(-2.5, 2.5, 40),
            delta_over_chi: 0.5,
            probe_periods: 20.0,
            probe_amplitude_over_chi: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerRabiConfig {
    pub g_over_chi: Grid,
    pub pulse_duration_us: f64,
    pub n_chop: f64,
    /// Largest amplitude, in multiples of the unit-element π amplitude.
    pub max_amplitude_factor: f64,
    pub amplitude_points: usize,
}

impl Default for PowerRabiConfig {
    fn default() -> Self {
        Self {
            g_over_chi: Grid::new(0.25, 2.0, 8),
            pulse_duration_us: 14.8,
            n_chop: 2.0,
            max_amplitude_factor: 2.5,
            amplitude_points: 41,
        }
    }
}

impl PowerRabiConfig {
    pub fn settings(&self) -> PowerRabiSettings {
        PowerRabiSettings {
            duration: self.pulse_duration_us,
            n_chop: self.n_chop,
            max_amplitude_factor: self.max_amplitude_factor,
            amplitude_points: self.amplitude_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub n_values: Vec<u32>,
    /// Erasure runs use m = n × this.
    pub erasure_m_factor: u32,
    /// Pauli runs use m = n × each of these.
    pub pauli_m_factors: Vec<u32>,
    /// Transmon error rates in units of |χ|.
    pub rates_over_chi: Vec<f64>,
    /// Points from the long-pulse end used in the power-law fits.
    pub fit_last: usize,
    /// Upper g_bs bound for local optimization, in units of |χ|.
    pub g_max_over_chi: f64,
    pub tune: ScalingTune,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n_values: vec![1, 2, 3, 4, 5],
            erasure_m_factor: 5,
            pauli_m_factors: vec![3, 4, 5],
            rates_over_chi: vec![0.0, 0.00025, 0.0005, 0.00075, 0.001],
            fit_last: 3,
            g_max_over_chi: 10.0,
            tune: ScalingTune::BeamsplitterAndDuration,
        }
    }
}

impl ScalingConfig {
    pub fn settings(&self) -> ScalingSettings {
        ScalingSettings {
            n_values: self.n_values.clone(),
            erasure_m_factor: self.erasure_m_factor,
            pauli_m_factors: self.pauli_m_factors.clone(),
            rates_over_chi: self.rates_over_chi.clone(),
            fit_last: self.fit_last,
            g_max_over_chi: self.g_max_over_chi,
            tune: self.tune,
        }
    }
}

/// The erasure-check operating point; unset fields come from the tune-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub n: u32,
    pub m: u32,
    pub bs_ramp_us: f64,
    pub pulse_ramp_us: f64,
    pub g_bs_mhz: Option<f64>,
    pub t_p_us: Option<f64>,
    pub tau_ro_us: f64,
    pub readout_dephasing: f64,
    pub n_checks: usize,
    pub echo: bool,
    /// Extra idle between consecutive checks, µs.
    pub inter_check_idle_us: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            n: 1,
            m: 2,
            bs_ramp_us: 0.12,
            pulse_ramp_us: 0.024,
            g_bs_mhz: None,
            t_p_us: None,
            tau_ro_us: 1.0,
            readout_dephasing: 0.0,
            n_checks: 30,
            echo: true,
            inter_check_idle_us: 0.0,
        }
    }
}

impl CheckConfig {
    pub fn readout(&self) -> ReadoutModel {
        ReadoutModel { tau_ro: self.tau_ro_us, readout_dephasing: self.readout_dephasing }
    }
}

/// The scheme comparison and the longer-coherence projection share the square pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub g_bs_mhz: f64,
    pub t_p_us: f64,
    /// g_bs used by the projection study.
    pub projection_g_bs_mhz: f64,
    pub projection_transmon_us: f64,
    pub projection_cavity_us: f64,
    pub tau_ro_us: f64,
    pub readout_nbar: f64,
    pub readout_duration_us: f64,
    /// Cavity–resonator cross-Kerr as stated alongside the estimate, kHz.
    pub readout_chi_khz: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            g_bs_mhz: 1.04,
            t_p_us: 1.699,
            projection_g_bs_mhz: 1.038,
            projection_transmon_us: 200.0,
            projection_cavity_us: 1000.0,
            tau_ro_us: 1.0,
            readout_nbar: 10.0,
            readout_duration_us: 1.0,
            readout_chi_khz: 2.5,
        }
    }
}

/// The gate reuses the Gaussian tune-up with |1,1⟩ included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CphaseConfig {
    pub g_bs_start_mhz: f64,
    pub n_chop: f64,
    pub sigma_start_us: f64,
    pub excitation_threshold: f64,
    /// Summed return infidelity of |0,1⟩, |1,0⟩ and |1,1⟩ at which tuning stops.
    pub infidelity_target: f64,
    pub thetas: Vec<f64>,
    pub analysis_phases: usize,
    pub with_noise: bool,
}

impl Default for CphaseConfig {
    fn default() -> Self {
        Self {
            g_bs_start_mhz: 1.7,
            n_chop: 4.0,
            sigma_start_us: 0.25,
            excitation_threshold: 2e-5,
            infidelity_target: 1e-3,
            thetas: vec![0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI],
            analysis_phases: 16,
            with_noise: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub p: f64,
    pub erasure_ratio: f64,
    pub p_fn: f64,
    pub gate: GateKind,
    pub draws: u64,
    pub chunks: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { p: 0.01, erasure_ratio: 0.9, p_fn: 0.037, gate: GateKind::Cz, draws: 1_000_000, chunks: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronConfig {
    pub g_bs_mhz: f64,
    pub time: Grid,
    /// Drive detuning from resonance, MHz.
    pub detuning_mhz: Grid,
    pub ramp_us: f64,
    pub with_noise: bool,
}

impl Default for ChevronConfig {
    fn default() -> Self {
        Self {
            g_bs_mhz: 0.5,
            time: Grid::new(0.0, 4.0, 81),
            detuning_mhz: Grid::new(-1.5, 1.5, 31),
            ramp_us: 0.0,
            with_noise: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub seed: u64,
    pub system: SystemConfig,
    /// Coherence times in µs and thermal populations.
    pub noise: NoiseParams,
    pub integrator: IntegratorConfig,
    pub spectroscopy: SpectroscopyConfig,
    pub power_rabi: PowerRabiConfig,
    pub scaling: ScalingConfig,
    pub check: CheckConfig,
    pub comparison: ComparisonConfig,
    pub cphase: CphaseConfig,
    pub sampler: SamplerConfig,
    pub chevron: ChevronConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            system: SystemConfig::default(),
            noise: NoiseParams::measured(),
            integrator: IntegratorConfig::default(),
            spectroscopy: SpectroscopyConfig::default(),
            power_rabi: PowerRabiConfig::default(),
            scaling: ScalingConfig::default(),
            check: CheckConfig::default(),
            comparison: ComparisonConfig::default(),
            cphase: CphaseConfig::default(),
            sampler: SamplerConfig::default(),
            chevron: ChevronConfig::default(),
        }
    }
}

impl StudyConfig {
    /// Reads a TOML file, or the built-in defaults for the literal `defaults`.
    pub fn load(path: &str) -> Result<Self> {
        if path == "defaults" {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(Path::new(path))
            .map_err(|e| Error::Config(format!("cannot read config {path}: {e}")))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{path}: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn system(&self) -> SystemParams {
        SystemParams::from(&self.system)
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions { rtol: self.integrator.rtol, atol: self.integrator.atol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        let nonzero = [("chi_bob_mhz", s.chi_bob_mhz), ("chi_alice_mhz", s.chi_alice_mhz), ("alpha_mhz", s.alpha_mhz)];
        for (name, v) in nonzero {
            if !(v.is_finite() && v != 0.0) {
                return Err(Error::Config(format!("system.{name} must be finite and nonzero")));
            }
        }
        for (name, v) in [("kappa_readout_mhz", s.kappa_readout_mhz), ("g_bs_max_mhz", s.g_bs_max_mhz)] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("system.{name} must be positive")));
            }
        }
        if !(s.chi_tr_mhz.is_finite() && s.chi_ct_mhz.is_finite()) {
            return Err(Error::Config("system chi_tr/chi_ct must be finite".into()));
        }
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.integrator.rtol > 0.0 && self.integrator.atol > 0.0) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        let sp = &self.spectroscopy;
        sp.g_over_chi.validate("spectroscopy.g_over_chi")?;
        sp.detuning_over_chi.validate("spectroscopy.detuning_over_chi")?;
        if !(sp.probe_periods > 0.0) || sp.probe_amplitude_over_chi.is_some_and(|a| !(a > 0.0)) {
            return Err(Error::Config("spectroscopy probe length and amplitude must be positive".into()));
        }
        if sp.photon_numbers.iter().any(|&n| n > 4) {
            return Err(Error::Config("spectroscopy supports N <= 4".into()));
        }
        let pr = &self.power_rabi;
        pr.g_over_chi.validate("power_rabi.g_over_chi")?;
        if !(pr.pulse_duration_us > 0.0 && pr.n_chop > 0.0 && pr.max_amplitude_factor > 0.0) || pr.amplitude_points < 8 {
            return Err(Error::Config("power_rabi needs a positive pulse and >= 8 amplitudes".into()));
        }
        let sc = &self.scaling;
        if sc.n_values.is_empty() || sc.n_values.contains(&0) || sc.rates_over_chi.len() < 3 || sc.rates_over_chi.iter().any(|r| *r < 0.0) {
            return Err(Error::Config("scaling needs n >= 1 and at least three nonnegative rates".into()));
        }
        if sc.fit_last < 2 || sc.fit_last > sc.n_values.len() {
            return Err(Error::Config("scaling.fit_last must lie in [2, number of n values]".into()));
        }
        let ck = &self.check;
        ck.readout().validate().map_err(|e| Error::Config(e.to_string()))?;
        if ck.n == 0 || ck.n_checks < 2 || ck.bs_ramp_us < 0.0 || ck.pulse_ramp_us < 0.0 || ck.inter_check_idle_us < 0.0 {
            return Err(Error::Config("check needs n >= 1, n_checks >= 2 and nonnegative times".into()));
        }
        let cp = &self.comparison;
        if [cp.g_bs_mhz, cp.t_p_us, cp.projection_g_bs_mhz, cp.projection_transmon_us, cp.projection_cavity_us]
            .iter()
            .any(|v| !(*v > 0.0))
            || cp.tau_ro_us < 0.0
        {
            return Err(Error::Config("comparison parameters must be positive".into()));
        }
        if !(self.cphase.sigma_start_us > 0.0 && self.cphase.n_chop > 0.0 && self.cphase.g_bs_start_mhz > 0.0 && self.cphase.analysis_phases >= 3 && self.cphase.infidelity_target > 0.0) {
            return Err(Error::Config("cphase needs positive σ, n_chop and >= 3 analysis phases".into()));
        }
        let sa = &self.sampler;
        if !(0.0..=1.0).contains(&sa.p) || !(0.0..=1.0).contains(&sa.erasure_ratio) || !(0.0..=1.0).contains(&sa.p_fn) || sa.chunks == 0 {
            return Err(Error::Config("sampler probabilities must lie in [0, 1] with >= 1 chunk".into()));
        }
        self.chevron.time.validate("chevron.time")?;
        self.chevron.detuning_mhz.validate("chevron.detuning_mhz")?;
        Ok(())
    }

    /// Square-check parameters at an explicit operating point.
    pub fn comparison_params(&self, g_bs_mhz: f64, t_p: f64) -> CheckParams {
        let chi = self.system().chi_bob;
        CheckParams { g_bs: mhz(g_bs_mhz), delta: chi / 2.0, t_p, amplitude: std::f64::consts::PI / (2.0 * t_p), delta_omega: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = StudyConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(StudyConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = StudyConfig::from_toml("seed = 7\n[system]\nchi_bob_mhz = -1.0\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.system.chi_alice_mhz, 0.7773);
        assert!((c.system().chi_bob + 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(StudyConfig::from_toml("[system]\nchi = 1\n"), Err(Error::Config(_))));
    }

    #[test]
    fn g_bs_is_clipped() {
        let s = StudyConfig::default().system();
        assert_eq!(s.clip_g_bs(2.0 * s.g_bs_max), s.g_bs_max);
        assert_eq!(s.clip_g_bs(-2.0 * s.g_bs_max), -s.g_bs_max);
        assert_eq!(s.clip_g_bs(0.5), 0.5);
    }
}
