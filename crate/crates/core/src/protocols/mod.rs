//! Dual-rail protocols built on the evolver: erasure and joint-parity checks,
//! repeated-check channels, the joint-SNAP CPHASE and the gate error sampler.

mod channel;
mod check;
mod cphase;
mod parity;
mod readout;
mod sampler;

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

pub use channel::{
    error_budget, false_negative_rate, repeated_check_experiment, CheckChannel, ErrorBudget, RepeatedCheckTrace, SingleCheckRates,
    CODE_SUBSPACE,
    LEAKAGE_SUBSPACE,
};
pub use check::{run_check, run_erasure_check, CheckDesign, CheckOutcome, CheckParams, CheckPulse, ReadoutModel};
pub use cphase::{cphase_joint_snap, ramsey_phase_probe, CphaseDesign, CphaseSummary, RamseyTrace};
pub use parity::run_joint_parity_check;
pub use readout::{chi_estimate, readout_induced_dephasing, ReadoutDephasing};
pub use sampler::{sample_gate_error_channel, sample_many, GateErrorSample, GateKind, Pauli, SamplerStats};

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, CMatrix, CVector, Level, ModeLayout, PureState, State, Subsystem, C64};

/// The six logical cardinal states, with |0_L⟩ = |1,0⟩ and |1_L⟩ = |0,1⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DualRailLabel {
    #[serde(rename = "+X")]
    PlusX,
    #[serde(rename = "-X")]
    MinusX,
    #[serde(rename = "+Y")]
    PlusY,
    #[serde(rename = "-Y")]
    MinusY,
    #[serde(rename = "+Z")]
    PlusZ,
    #[serde(rename = "-Z")]
    MinusZ,
}

impl DualRailLabel {
    pub const ALL: [DualRailLabel; 6] = [
        DualRailLabel::PlusX,
        DualRailLabel::MinusX,
        DualRailLabel::PlusY,
        DualRailLabel::MinusY,
        DualRailLabel::PlusZ,
        DualRailLabel::MinusZ,
    ];

    /// Amplitudes on (|0_L⟩, |1_L⟩).
    pub fn logical_amplitudes(self) -> [C64; 2] {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            DualRailLabel::PlusZ => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            DualRailLabel::MinusZ => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            DualRailLabel::PlusX => [h, h],
            DualRailLabel::MinusX => [h, -h],
            DualRailLabel::PlusY => [h, C64::new(0.0, FRAC_1_SQRT_2)],
            DualRailLabel::MinusY => [h, C64::new(0.0, -FRAC_1_SQRT_2)],
        }
    }

    /// Image under the logical X (the cavity swap).
    pub fn flipped(self) -> Self {
        match self {
            DualRailLabel::PlusZ => DualRailLabel::MinusZ,
            DualRailLabel::MinusZ => DualRailLabel::PlusZ,
            DualRailLabel::PlusY => DualRailLabel::MinusY,
            DualRailLabel::MinusY => DualRailLabel::PlusY,
            x => x,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DualRailLabel::PlusX => "+X",
            DualRailLabel::MinusX => "-X",
            DualRailLabel::PlusY => "+Y",
            DualRailLabel::MinusY => "-Y",
            DualRailLabel::PlusZ => "+Z",
            DualRailLabel::MinusZ => "-Z",
        }
    }
}

impl std::fmt::Display for DualRailLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DualRailLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DualRailLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown cardinal label {s:?}")))
    }
}

pub fn prepare_cardinal(label: DualRailLabel, layout: ModeLayout) -> Result<PureState> {
    let [c0, c1] = label.logical_amplitudes();
    PureState::from_components(layout, &[(1, 0, Level::G, c0), (0, 1, Level::G, c1)])
}

/// (3/2)(1 − F̄): the Pauli probability of a depolarizing channel with
/// average state fidelity F̄ over the cardinal states.
pub fn pauli_rate_from_fidelity(mean_fidelity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mean_fidelity) {
        return Err(Error::InvalidArgument(format!("fidelity {mean_fidelity} outside [0, 1]")));
    }
    Ok(1.5 * (1.0 - mean_fidelity))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalAxis {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalMeasurement {
    pub expectation: f64,
    pub pass_probability: f64,
}

/// Ideal dual-rail measurement: an exact 50:50 beamsplitter pre-rotation for
/// X and Y, then Fock-basis readout of both cavities. Outcomes outside the
/// single-photon manifold fail; with `post_select` the expectation is
/// renormalized to the passing shots, otherwise they count as zero.
pub fn logical_measurement(state: &State, axis: LogicalAxis, post_select: bool) -> Result<LogicalMeasurement> {
    let layout = state.layout();
    let cav = partial_trace(&state.to_density(), &[Subsystem::Alice, Subsystem::Bob]).matrix;
    let rotated = match axis {
        LogicalAxis::Z => cav,
        LogicalAxis::X => {
            let u = cavity_beamsplitter(layout, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_4);
            &u * cav * u.adjoint()
        }
        LogicalAxis::Y => {
            let u = cavity_beamsplitter(layout, 0.0, std::f64::consts::FRAC_PI_4);
            &u * cav * u.adjoint()
        }
    };
    let i10 = layout.dim_b;
    let i01 = 1;
    let p_plus = rotated[(i10, i10)].re;
    let p_minus = rotated[(i01, i01)].re;
    let pass = p_plus + p_minus;
    let expectation = if post_select {
        if pass > 0.0 {
            (p_plus - p_minus) / pass
        } else {
            0.0
        }
    } else {
        p_plus - p_minus
    };
    Ok(LogicalMeasurement { expectation, pass_probability: pass })
}

/// exp(−i θ G) on the two-cavity space with G = e^{iφ} a b† + e^{−iφ} a† b.
pub fn cavity_beamsplitter(layout: ModeLayout, phi: f64, theta: f64) -> CMatrix {
    let (da, db) = (layout.dim_a, layout.dim_b);
    let d = da * db;
    let mut g = CMatrix::zeros(d, d);
    // a b† |na, nb⟩ = √na √(nb+1) |na−1, nb+1⟩
    for na in 1..da {
        for nb in 0..db - 1 {
            let from = na * db + nb;
            let to = (na - 1) * db + nb + 1;
            let amp = ((na * (nb + 1)) as f64).sqrt();
            g[(to, from)] += C64::from_polar(amp, phi);
            g[(from, to)] += C64::from_polar(amp, -phi);
        }
    }
    let eig = g.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -theta * l)));
    v * phases * v.adjoint()
}

/// A logical state as a vector on the given cavity subspace.
pub(crate) fn cardinal_on_subspace(label: DualRailLabel, subspace: &[(usize, usize)]) -> Result<CVector> {
    let [c0, c1] = label.logical_amplitudes();
    let pos = |p: (usize, usize)| {
        subspace
            .iter()
            .position(|&s| s == p)
            .ok_or_else(|| Error::InvalidArgument(format!("subspace lacks |{},{}⟩", p.0, p.1)))
    };
    let mut v = CVector::zeros(subspace.len());
    v[pos((1, 0))?] = c0;
    v[pos((0, 1))?] = c1;
    Ok(v)
}
