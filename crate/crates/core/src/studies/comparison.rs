use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evolver::{EvolveOptions, NoiseParams};
use crate::hilbert::{CMatrix, ModeLayout};
use crate::par;
use crate::protocols::{
    cardinal_on_subspace, chi_estimate, pauli_rate_from_fidelity, readout_induced_dephasing, CheckChannel, CheckDesign,
    CheckParams, DualRailLabel, ReadoutDephasing, ReadoutModel, CODE_SUBSPACE, LEAKAGE_SUBSPACE,
};
use crate::pulses::{joint_parity_schedule, AncillaVariant, DriveSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    JointPhotonNumber,
    JointParity,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::JointPhotonNumber => "joint_photon_number",
            Self::JointParity => "joint_parity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub scheme: Scheme,
    pub variant: AncillaVariant,
    pub p_erasure: f64,
    pub p_pauli: f64,
    pub duration: f64,
}

/// Square joint-photon-number checks at `params` and idealized joint-parity
/// checks, each on g–e and g–f ancillas with the same χ, under the given
/// noise. Rates are single-check averages over the six cardinal states.
pub fn study_scheme_comparison(
    chi: f64,
    params: &CheckParams,
    noise: &NoiseParams,
    opts: EvolveOptions,
) -> Result<Vec<SchemeRow>> {
    let opts = EvolveOptions { monitor_truncation: false, ..opts };
    let cells = [
        (Scheme::JointPhotonNumber, AncillaVariant::Ge),
        (Scheme::JointPhotonNumber, AncillaVariant::Gf),
        (Scheme::JointParity, AncillaVariant::Ge),
        (Scheme::JointParity, AncillaVariant::Gf),
    ];
    par::try_map(&cells, |&(scheme, variant)| {
        let schedule = match scheme {
            Scheme::JointPhotonNumber => CheckDesign::square(chi).with_variant(variant).schedule(params)?,
            Scheme::JointParity => joint_parity_schedule(chi, variant, true, 0.0)?,
        };
        let layout = ModeLayout { dim_a: 2, dim_b: 2, dim_q: variant.dim_q() };
        let ch = CheckChannel::build(&schedule, layout, noise, ReadoutModel::instantaneous(), &CODE_SUBSPACE, opts)?;
        let r = ch.single_check_rates()?;
        Ok(SchemeRow { scheme, variant, p_erasure: r.p_flag, p_pauli: r.p_pauli, duration: schedule.duration })
    })
}

/// Readout resonator seen by a cavity during a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutResonator {
    pub nbar: f64,
    pub kappa: f64,
    /// Cavity–resonator cross-Kerr.
    pub chi: f64,
    pub duration: f64,
}

/// Transmon couplings entering the cross-Kerr estimate χ_tr χ_ct / α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmonCouplings {
    pub chi_tr: f64,
    pub chi_ct: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutAddendum {
    pub resonator: ReadoutResonator,
    pub dephasing: ReadoutDephasing,
    /// χ_tr χ_ct / α for comparison with `resonator.chi`.
    pub chi_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSettings {
    pub params: CheckParams,
    pub tau_ro: f64,
    pub transmon_t1: f64,
    pub transmon_tphi: f64,
    pub cavity_t1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProjection {
    pub settings: ProjectionSettings,
    /// Mean |0,0⟩ population after idle plus check.
    pub p_intrinsic: f64,
    /// (3/2)(1 − F̄) post-selected on a passing check and one photon.
    pub p_pauli_induced: f64,
    /// Mean flag probability without cavity loss.
    pub p_fp: f64,
    pub readout: ReadoutAddendum,
}

/// Mean (P00, flag, post-selected fidelity) over the cardinals for an idle
/// of `tau_ro` followed by the check.
fn idle_then_check(
    schedule: &DriveSchedule,
    tau_ro: f64,
    noise: &NoiseParams,
    opts: EvolveOptions,
) -> Result<(f64, f64, f64)> {
    let layout = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let check = CheckChannel::build(schedule, layout, noise, ReadoutModel::instantaneous(), &LEAKAGE_SUBSPACE, opts)?;
    let idle = if tau_ro > 0.0 {
        Some(CheckChannel::idle(
            tau_ro,
            layout,
            schedule.variant,
            schedule.dispersive,
            noise,
            &LEAKAGE_SUBSPACE,
            opts,
        )?)
    } else {
        None
    };
    let (mut p00, mut flag, mut fid) = (0.0, 0.0, 0.0);
    for &l in &DualRailLabel::ALL {
        let psi = cardinal_on_subspace(l, &LEAKAGE_SUBSPACE)?;
        let mut rho: CMatrix = CheckChannel::pure_input(&psi);
        if let Some(idle) = &idle {
            rho = idle.apply_total(&rho);
        }
        let pass = check.apply_pass(&rho);
        let f = check.apply_flag(&rho);
        p00 += (pass[(0, 0)] + f[(0, 0)]).re;
        flag += f.trace().re;
        fid += check.logical_fidelity(&pass, &psi)?.0;
    }
    let m = DualRailLabel::ALL.len() as f64;
    Ok((p00 / m, flag / m, fid / m))
}

/// Error rates of the square check with longer coherence times, plus the
/// shot-noise dephasing from a readout resonator.
pub fn study_performance_projection(
    chi: f64,
    settings: ProjectionSettings,
    resonator: ReadoutResonator,
    couplings: TransmonCouplings,
    opts: EvolveOptions,
) -> Result<PerformanceProjection> {
    let opts = EvolveOptions { monitor_truncation: false, ..opts };
    let noise = NoiseParams {
        t1_a: Some(settings.cavity_t1),
        t1_b: Some(settings.cavity_t1),
        t1_ge: Some(settings.transmon_t1),
        tphi_ge: Some(settings.transmon_tphi),
        ..NoiseParams::none()
    };
    let schedule = CheckDesign::square(chi).schedule(&settings.params)?;
    let (p00, _, fid) = idle_then_check(&schedule, settings.tau_ro, &noise, opts)?;
    let (_, p_fp, _) = idle_then_check(&schedule, settings.tau_ro, &noise.without_cavities(), opts)?;
    let r = resonator;
    Ok(PerformanceProjection {
        settings,
        p_intrinsic: p00,
        p_pauli_induced: pauli_rate_from_fidelity(fid.clamp(0.0, 1.0))?,
        p_fp,
        readout: ReadoutAddendum {
            resonator: r,
            dephasing: readout_induced_dephasing(r.nbar, r.kappa, r.chi, r.duration)?,
            chi_estimate: chi_estimate(couplings.chi_tr, couplings.chi_ct, couplings.alpha)?,
        },
    })
}
