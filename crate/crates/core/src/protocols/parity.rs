use super::check::{run_check, CheckOutcome, ReadoutModel};
use crate::error::Result;
use crate::evolver::{EvolveOptions, NoiseParams};
use crate::hilbert::State;
use crate::pulses::{joint_parity_schedule, AncillaVariant};

/// Joint-parity check: even total photon number leaves the ancilla excited
/// (flag), odd returns it to |g⟩. For the g–f variant a decay to |e⟩ also
/// reads as a flag.
#[allow(clippy::too_many_arguments)]
pub fn run_joint_parity_check(
    state: &State,
    chi: f64,
    variant: AncillaVariant,
    noise: &NoiseParams,
    idealized: bool,
    width: f64,
    readout: ReadoutModel,
    opts: EvolveOptions,
) -> Result<CheckOutcome> {
    let schedule = joint_parity_schedule(chi, variant, idealized, width)?;
    run_check(&schedule, state, noise, readout, opts)
}
