use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evolver::{EvolveOptions, NoiseParams};
use crate::hilbert::ModeLayout;
use crate::protocols::{
    cardinal_on_subspace, error_budget, false_negative_rate, repeated_check_experiment, CheckChannel, CheckDesign,
    CheckParams, CheckPulse, DualRailLabel, ErrorBudget, ReadoutModel, RepeatedCheckTrace, LEAKAGE_SUBSPACE,
};
use crate::pulses::erasure_check_guess;
use crate::tuneup::{tune_square_erasure_check, CheckBounds, TuneOptions, TuneupResult};

/// A square check tuned from the analytic guess for (n, m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedCheck {
    pub design: CheckDesign,
    pub params: CheckParams,
    pub tune: Option<TuneupResult>,
}

/// Tunes a square check with the given ramps. With `fixed` = (g_bs, T_p)
/// the tune-up is skipped and the guess is evaluated at that point.
pub fn tuned_square_check(
    chi: f64,
    n: u32,
    m: u32,
    bs_ramp: f64,
    pulse_ramp: f64,
    g_max: f64,
    fixed: Option<(f64, f64)>,
) -> Result<TunedCheck> {
    let design = CheckDesign { bs_ramp, pulse: CheckPulse::Square { ramp: pulse_ramp }, ..CheckDesign::square(chi) };
    let mut start = CheckParams::from_guess(&erasure_check_guess(chi, n, m)?);
    if let Some((g, t_p)) = fixed {
        start.g_bs = g;
        start.t_p = t_p;
    }
    start.amplitude = design.pi_amplitude(start.t_p);
    if fixed.is_some() {
        return Ok(TunedCheck { design, params: start, tune: None });
    }
    let bounds = CheckBounds::around(&start, chi, g_max);
    let tune = tune_square_erasure_check(&design, &start, &bounds, &TuneOptions::default())?;
    if !tune.converged {
        log::warn!("square tune-up stopped at cost {:.3e}", tune.final_cost);
    }
    Ok(TunedCheck { design, params: tune.params, tune: Some(tune) })
}

/// Channel of one check on {|0,0⟩, |1,0⟩, |0,1⟩}. Idle time between checks
/// is folded into the readout idle.
pub fn leakage_channel(
    check: &TunedCheck,
    noise: &NoiseParams,
    readout: ReadoutModel,
    inter_check_idle: f64,
    opts: EvolveOptions,
) -> Result<CheckChannel> {
    let layout = ModeLayout { dim_a: 2, dim_b: 2, dim_q: check.design.variant.dim_q() };
    let readout = ReadoutModel { tau_ro: readout.tau_ro + inter_check_idle, ..readout };
    let opts = EvolveOptions { monitor_truncation: false, ..opts };
    CheckChannel::build(&check.design.schedule(&check.params)?, layout, noise, readout, &LEAKAGE_SUBSPACE, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCheckRow {
    pub label: DualRailLabel,
    pub p_flag: f64,
    /// Post-selected fidelity of the passing branch to the input.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCheckReport {
    pub rows: Vec<SingleCheckRow>,
    /// Flag probability for a |0,0⟩ input.
    pub p_flag_vacuum: f64,
    pub p_fn: f64,
    pub duration: f64,
}

pub fn single_check_report(channel: &CheckChannel) -> Result<SingleCheckReport> {
    let rows = DualRailLabel::ALL
        .iter()
        .map(|&label| {
            let psi = cardinal_on_subspace(label, &channel.subspace)?;
            let rho = CheckChannel::pure_input(&psi);
            let pass = channel.apply_pass(&rho);
            Ok(SingleCheckRow {
                label,
                p_flag: channel.apply_flag(&rho).trace().re,
                fidelity: channel.logical_fidelity(&pass, &psi)?.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let i00 = channel.subspace.iter().position(|&s| s == (0, 0));
    let p_flag_vacuum = match i00 {
        Some(i) => {
            let mut rho = crate::hilbert::CMatrix::zeros(channel.dim(), channel.dim());
            rho[(i, i)] = crate::hilbert::ONE;
            channel.apply_flag(&rho).trace().re
        }
        None => f64::NAN,
    };
    Ok(SingleCheckReport { rows, p_flag_vacuum, p_fn: false_negative_rate(channel)?, duration: channel.duration })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatedChecksStudy {
    pub check: TunedCheck,
    pub budget: ErrorBudget,
    pub traces: Vec<RepeatedCheckTrace>,
}

/// Repeated checks on the six cardinal states and the per-check budget.
pub fn study_repeated_checks(
    check: TunedCheck,
    noise: &NoiseParams,
    readout: ReadoutModel,
    inter_check_idle: f64,
    n_checks: usize,
    echo: bool,
    opts: EvolveOptions,
) -> Result<RepeatedChecksStudy> {
    let ch = leakage_channel(&check, noise, readout, inter_check_idle, opts)?;
    let budget = error_budget(&ch, n_checks, echo)?;
    let traces = DualRailLabel::ALL
        .iter()
        .map(|&l| repeated_check_experiment(&ch, l, n_checks, echo))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepeatedChecksStudy { check, budget, traces })
}
