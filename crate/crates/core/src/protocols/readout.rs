use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutDephasing {
    /// Γφ in 1/µs.
    pub gamma_phi: f64,
    pub p_pauli: f64,
}

/// Shot-noise dephasing of a cavity from n̄ photons in a readout resonator
/// of linewidth κ with cross-Kerr χ: Γφ = n̄κχ²/(κ²+χ²), p = Γφ t / 2.
/// κ = χ = 0 gives Γφ = 0.
pub fn readout_induced_dephasing(nbar: f64, kappa: f64, chi: f64, duration: f64) -> Result<ReadoutDephasing> {
    if [nbar, kappa, duration].iter().any(|v| !(*v >= 0.0)) || !chi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "readout dephasing needs nonnegative n̄, κ, t (got {nbar}, {kappa}, {duration}) and finite χ"
        )));
    }
    let denom = kappa * kappa + chi * chi;
    let gamma_phi = if denom == 0.0 { 0.0 } else { nbar * kappa * chi * chi / denom };
    Ok(ReadoutDephasing { gamma_phi, p_pauli: gamma_phi * duration / 2.0 })
}

/// Cavity–resonator cross-Kerr estimated from the transmon couplings,
/// χ ≈ χ_tr χ_ct / α.
pub fn chi_estimate(chi_tr: f64, chi_ct: f64, alpha: f64) -> Result<f64> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument("anharmonicity must be finite and nonzero".into()));
    }
    Ok(chi_tr * chi_ct / alpha)
}
