use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{EvolveOptions, NoiseParams};
use crate::fit::{least_squares, linear_fit, nelder_mead, polyfit, power_law_fit, NelderMeadOptions};
use crate::hilbert::ModeLayout;
use crate::par;
use crate::protocols::{CheckChannel, CheckDesign, CheckParams, ReadoutModel, CODE_SUBSPACE};
use crate::pulses::erasure_check_guess;
use crate::tuneup::{transfer_infidelities, tune_square_erasure_check, CheckBounds, TuneOptions};

/// The single transmon channel switched on in a scaling sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmonChannel {
    Dephasing,
    Decay,
}

impl TransmonChannel {
    pub const ALL: [TransmonChannel; 2] = [TransmonChannel::Dephasing, TransmonChannel::Decay];

    /// Noise with rate γ (1/µs) on this channel only.
    pub fn noise(self, gamma: f64) -> NoiseParams {
        let t = (gamma > 0.0).then(|| 1.0 / gamma);
        match self {
            Self::Dephasing => NoiseParams { tphi_ge: t, ..NoiseParams::none() },
            Self::Decay => NoiseParams { t1_ge: t, ..NoiseParams::none() },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dephasing => "dephasing",
            Self::Decay => "decay",
        }
    }
}

/// Which check parameters the per-point tune-up may move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingTune {
    /// g_bs and T_p, with A = π/(2T_p), Δ = χ/2 and δω = 0 held at the guess.
    BeamsplitterAndDuration,
    /// All five square-check parameters.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSettings {
    pub n_values: Vec<u32>,
    pub erasure_m_factor: u32,
    pub pauli_m_factors: Vec<u32>,
    /// Noise rates γ/|χ|, small enough that γT_p ≪ 1 up to n = 5.
    pub rates_over_chi: Vec<f64>,
    /// Exponents use the last `fit_last` values of n.
    pub fit_last: usize,
    pub g_max_over_chi: f64,
    pub tune: ScalingTune,
}

impl Default for ScalingSettings {
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

/// Linear sensitivities of one tuned check to one channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: u32,
    pub m: u32,
    pub channel: TransmonChannel,
    pub params: CheckParams,
    pub tune_cost: f64,
    /// Mean flag probability per rate.
    pub erasure: Vec<f64>,
    /// (3/2)(1 − F̄) per rate.
    pub pauli: Vec<f64>,
    /// Linear coefficients of quadratic fits against γ/|χ|.
    pub erasure_slope: f64,
    pub pauli_slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelExponents {
    pub channel: TransmonChannel,
    pub erasure_vs_tp: f64,
    pub pauli_vs_g: f64,
    pub pauli_vs_tp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub chi: f64,
    pub settings: ScalingSettings,
    pub points: Vec<ScalingPoint>,
    pub exponents: Vec<ChannelExponents>,
}

struct Tuned {
    n: u32,
    m: u32,
    params: CheckParams,
    cost: f64,
}

fn tune(design: &CheckDesign, n: u32, m: u32, g_max: f64, mode: ScalingTune) -> Result<Tuned> {
    let guess = CheckParams::from_guess(&erasure_check_guess(design.chi, n, m)?);
    let bounds = CheckBounds::around(&guess, design.chi, g_max);
    let opts = TuneOptions::default();
    let (params, cost) = match mode {
        ScalingTune::Full => {
            let r = tune_square_erasure_check(design, &guess, &bounds, &opts)?;
            (r.params, r.final_cost)
        }
        ScalingTune::BeamsplitterAndDuration => {
            let at = |x: &[f64]| CheckParams { g_bs: x[0], t_p: x[1], amplitude: design.pi_amplitude(x[1]), ..guess };
            let cost = |x: &[f64]| match transfer_infidelities(design, &at(x), false) {
                Ok(v) => v.iter().sum(),
                Err(_) => f64::INFINITY,
            };
            let (lo, hi) = (bounds.lower, bounds.upper);
            let nm = NelderMeadOptions { max_iter: opts.max_iter, target_cost: opts.target_cost, x_tol: 1e-10, f_tol: 1e-14 };
            let r = nelder_mead(
                cost,
                &[guess.g_bs, guess.t_p],
                &[opts.rel_step * guess.g_bs, opts.rel_step * guess.t_p],
                &[lo.g_bs, lo.t_p],
                &[hi.g_bs, hi.t_p],
                &nm,
            );
            (at(&r.x), r.cost)
        }
    };
    if cost >= opts.converged_below {
        log::warn!("tune-up for n = {n}, m = {m} stopped at cost {cost:.3e}");
    }
    Ok(Tuned { n, m, params, cost })
}

fn sweep(design: &CheckDesign, t: &Tuned, channel: TransmonChannel, rates: &[f64], opts: EvolveOptions) -> Result<ScalingPoint> {
    let layout = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    // One integrator for every rate; the slopes sit far below the default tolerance.
    let opts = EvolveOptions {
        monitor_truncation: false,
        exact_flat_segments: false,
        rtol: opts.rtol.min(1e-12),
        atol: opts.atol.min(1e-12),
        ..opts
    };
    let schedule = design.schedule(&t.params)?;
    let chi = design.chi.abs();
    let mut erasure = Vec::with_capacity(rates.len());
    let mut pauli = Vec::with_capacity(rates.len());
    for &r in rates {
        let ch = CheckChannel::build(
            &schedule,
            layout,
            &channel.noise(r * chi),
            ReadoutModel::instantaneous(),
            &CODE_SUBSPACE,
            opts,
        )?;
        let s = ch.single_check_rates()?;
        erasure.push(s.p_flag);
        pauli.push(s.p_pauli);
    }
    Ok(ScalingPoint {
        n: t.n,
        m: t.m,
        channel,
        params: t.params,
        tune_cost: t.cost,
        erasure_slope: polyfit(rates, &erasure, 2)?[1],
        pauli_slope: polyfit(rates, &pauli, 2)?[1],
        erasure,
        pauli,
    })
}

/// Fits ln y = p ln x + c_k with one exponent shared across groups; returns
/// p and the per-group offsets.
pub fn shared_exponent_fit(groups: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, Vec<f64>)> {
    let rows: usize = groups.iter().map(|g| g.0.len()).sum();
    let k = groups.len();
    let mut design = DMatrix::zeros(rows, k + 1);
    let mut y = Vec::with_capacity(rows);
    let mut r = 0;
    for (gi, (xs, ys)) in groups.iter().enumerate() {
        if xs.len() != ys.len() {
            return Err(Error::Fit("mismatched group lengths".into()));
        }
        for (&x, &v) in xs.iter().zip(ys) {
            if !(x > 0.0 && v > 0.0) {
                return Err(Error::Fit(format!("shared power-law fit needs positive data, got ({x}, {v})")));
            }
            design[(r, 0)] = x.ln();
            design[(r, gi + 1)] = 1.0;
            y.push(v.ln());
            r += 1;
        }
    }
    let b = least_squares(&design, &y)?;
    Ok((b[0], b[1..].to_vec()))
}

/// Erasure and Pauli sensitivities of the tuned square check to transmon
/// decay and dephasing, and their power laws in T_p|χ| and g_bs/|χ|.
pub fn study_error_scaling(chi: f64, settings: &ScalingSettings, opts: EvolveOptions) -> Result<ScalingStudy> {
    let s = settings;
    if s.n_values.len() < s.fit_last || s.fit_last < 2 || s.rates_over_chi.len() < 3 || s.pauli_m_factors.len() < 2 {
        return Err(Error::InvalidArgument(format!("scaling grid too small for the fits: {s:?}")));
    }
    let design = CheckDesign::square(chi);
    let g_max = s.g_max_over_chi * chi.abs();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for &n in &s.n_values {
        for f in std::iter::once(s.erasure_m_factor).chain(s.pauli_m_factors.iter().copied()) {
            if !pairs.contains(&(n, f * n)) {
                pairs.push((n, f * n));
            }
        }
    }
    let tuned = par::try_map(&pairs, |&(n, m)| tune(&design, n, m, g_max, s.tune))?;
    let jobs: Vec<(usize, TransmonChannel)> = (0..tuned.len())
        .flat_map(|i| TransmonChannel::ALL.into_iter().map(move |c| (i, c)))
        .collect();
    let points = par::try_map(&jobs, |&(i, c)| sweep(&design, &tuned[i], c, &s.rates_over_chi, opts))?;

    let fit_ns = &s.n_values[s.n_values.len() - s.fit_last..];
    let find = |c: TransmonChannel, n: u32, m: u32| {
        points.iter().find(|p| p.channel == c && p.n == n && p.m == m).expect("every pair was swept")
    };
    let mut exponents = Vec::new();
    for c in TransmonChannel::ALL {
        let (tp, er): (Vec<f64>, Vec<f64>) = fit_ns
            .iter()
            .map(|&n| {
                let p = find(c, n, s.erasure_m_factor * n);
                (p.params.t_p * chi.abs(), p.erasure_slope)
            })
            .unzip();
        let (erasure_vs_tp, _) = power_law_fit(&tp, &er)?;
        let groups: Vec<(Vec<f64>, Vec<f64>)> = fit_ns
            .iter()
            .map(|&n| {
                s.pauli_m_factors
                    .iter()
                    .map(|&f| {
                        let p = find(c, n, f * n);
                        (p.params.g_bs / chi.abs(), p.pauli_slope)
                    })
                    .unzip()
            })
            .collect();
        let (pauli_vs_g, offsets) = shared_exponent_fit(&groups)?;
        let tp_n: Vec<f64> = fit_ns
            .iter()
            .map(|&n| (find(c, n, s.pauli_m_factors[0] * n).params.t_p * chi.abs()).ln())
            .collect();
        let (pauli_vs_tp, _) = linear_fit(&tp_n, &offsets)?;
        exponents.push(ChannelExponents { channel: c, erasure_vs_tp, pauli_vs_g, pauli_vs_tp });
    }
    Ok(ScalingStudy { chi, settings: s.clone(), points, exponents })
}
