use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{collapse_operators, CollapseSet, EvolveOptions, NoiseParams, Propagator};
use crate::hilbert::{CMatrix, CVector, ModeLayout, C64};
use crate::pulses::{AncillaVariant, ChoppedGaussian, Dispersive, DriveSchedule, PlacedPulse, PulseShape};

/// Two back-to-back N = 0 selective Gaussian π-pulses under a constant
/// beamsplitter. The second pulse carries phase π + θ + `phase_correction`,
/// which puts a geometric phase θ on |0,0⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CphaseDesign {
    pub chi: f64,
    pub g_bs: f64,
    pub delta: f64,
    pub sigma: f64,
    pub n_chop: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub delta_omega: f64,
    #[serde(default)]
    pub phase_correction: f64,
}

impl CphaseDesign {
    pub fn pulse_duration(&self) -> f64 {
        2.0 * self.n_chop * self.sigma
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.pulse_duration()
    }

    /// Alice and Bob each hold up to one photon, so N ≤ 2 must be exact.
    pub fn layout(&self) -> ModeLayout {
        ModeLayout { dim_a: 3, dim_b: 3, dim_q: 2 }
    }

    fn pulse(&self, start: f64, phase: f64) -> PlacedPulse {
        PlacedPulse {
            start,
            shape: PulseShape::Gaussian(ChoppedGaussian {
                amplitude: self.amplitude,
                sigma: self.sigma,
                n_chop: self.n_chop,
                detuning: self.delta_omega,
                phase,
            }),
        }
    }

    pub fn schedule(&self, theta: f64) -> Result<DriveSchedule> {
        let tp = self.pulse_duration();
        let pulses = vec![self.pulse(0.0, 0.0), self.pulse(tp, PI + theta + self.phase_correction)];
        DriveSchedule::constant_beamsplitter(
            self.g_bs,
            self.delta,
            0.0,
            self.duration(),
            pulses,
            AncillaVariant::Ge,
            Dispersive::ge(self.chi),
        )
    }

    /// Beamsplitter alone for the same time; phases are quoted against it.
    pub fn reference(&self) -> Result<DriveSchedule> {
        DriveSchedule::constant_beamsplitter(
            self.g_bs,
            self.delta,
            0.0,
            self.duration(),
            Vec::new(),
            AncillaVariant::Ge,
            Dispersive::ge(self.chi),
        )
    }

    /// Sets `phase_correction` so that θ = 0 yields no conditional phase.
    pub fn calibrate(mut self, opts: EvolveOptions) -> Result<Self> {
        for _ in 0..3 {
            let s = cphase_joint_snap(0.0, &self, &NoiseParams::none(), opts)?;
            if s.conditional_phase.abs() < 1e-6 {
                break;
            }
            self.phase_correction -= s.conditional_phase;
        }
        Ok(self)
    }
}

const BASIS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CphaseSummary {
    pub theta: f64,
    /// arg(u00 u11 / (u01 u10)) relative to the beamsplitter reference.
    pub conditional_phase: f64,
    /// Noiseless phases on |0,0⟩, |0,1⟩, |1,0⟩, |1,1⟩ relative to the reference.
    pub phases: [f64; 4],
    /// Largest probability of leaving the ancilla excited over the four inputs.
    pub ancilla_excited: f64,
    /// Largest population leaving the input basis state within the ancilla-g sector.
    pub leakage: f64,
    pub truncation: bool,
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

struct Runs {
    layout: ModeLayout,
    gate: Propagator,
    reference: Propagator,
    samples: [f64; 1],
}

impl Runs {
    fn new(design: &CphaseDesign, theta: f64, collapse: &CollapseSet, opts: EvolveOptions) -> Result<Self> {
        let layout = design.layout();
        let opts = EvolveOptions { monitor_truncation: false, ..opts };
        Ok(Self {
            layout,
            gate: Propagator::new(&design.schedule(theta)?, layout, collapse, opts)?,
            reference: Propagator::new(&design.reference()?, layout, &CollapseSet::default(), opts)?,
            samples: [design.duration()],
        })
    }

    fn basis(&self, na: usize, nb: usize) -> CVector {
        let mut v = CVector::zeros(self.layout.dim());
        v[self.layout.index(na, nb, 0)] = C64::new(1.0, 0.0);
        v
    }

    /// Unit-modulus reference phase factors for the four basis states.
    fn reference_phases(&self) -> Result<[C64; 4]> {
        let mut r = [C64::new(1.0, 0.0); 4];
        for (k, &(na, nb)) in BASIS.iter().enumerate() {
            let (v, _) = self.reference.run_pure(&self.basis(na, nb), &self.samples)?;
            let z = v[0][self.layout.index(na, nb, 0)];
            if z.norm() < 1e-6 {
                return Err(Error::Numerical(format!(
                    "beamsplitter reference does not return |{na},{nb}⟩; choose integer revolutions"
                )));
            }
            r[k] = z / z.norm();
        }
        Ok(r)
    }
}

/// Runs the joint-SNAP gate on the four two-cavity Fock inputs. Phases come
/// from noiseless amplitudes; with noise the conditional phase and ancilla
/// excitation are taken from a Lindblad run of the uniform superposition.
pub fn cphase_joint_snap(theta: f64, design: &CphaseDesign, noise: &NoiseParams, opts: EvolveOptions) -> Result<CphaseSummary> {
    let runs = Runs::new(design, theta, &CollapseSet::default(), opts)?;
    let l = runs.layout;
    let r = runs.reference_phases()?;
    let mut u = [C64::new(0.0, 0.0); 4];
    let mut ancilla_excited: f64 = 0.0;
    let mut leakage: f64 = 0.0;
    let mut truncation = false;
    for (k, &(na, nb)) in BASIS.iter().enumerate() {
        let (v, t) = runs.gate.run_pure(&runs.basis(na, nb), &runs.samples)?;
        truncation |= t;
        let v = &v[0];
        u[k] = v[l.index(na, nb, 0)] * r[k].conj();
        let excited: f64 = (0..l.dim()).filter(|i| i % l.dim_q != 0).map(|i| v[i].norm_sqr()).sum();
        ancilla_excited = ancilla_excited.max(excited);
        leakage = leakage.max(1.0 - excited - u[k].norm_sqr());
    }
    let phases = [u[0].arg(), u[1].arg(), u[2].arg(), u[3].arg()];
    let mut conditional_phase = wrap((u[0] * u[3] / (u[1] * u[2])).arg());
    if !noise.is_noiseless() {
        let collapse = collapse_operators(noise, l)?;
        let noisy = Runs::new(design, theta, &collapse, opts)?;
        let mut psi = CVector::zeros(l.dim());
        for &(na, nb) in &BASIS {
            psi[l.index(na, nb, 0)] = C64::new(0.5, 0.0);
        }
        let (m, t) = noisy.gate.run_operator(&(&psi * psi.adjoint()), &noisy.samples)?;
        truncation |= t;
        let rho = corrected_coherences(&m[0], l, &r);
        conditional_phase = wrap((rho[(0, 1)] * rho[(3, 2)]).arg());
        let excited: f64 = (0..l.dim()).filter(|i| i % l.dim_q != 0).map(|i| m[0][(i, i)].re).sum();
        ancilla_excited = ancilla_excited.max(excited);
    }
    Ok(CphaseSummary { theta, conditional_phase, phases, ancilla_excited, leakage, truncation })
}

/// The 4×4 ancilla-g block on the Fock basis with reference phases removed.
fn corrected_coherences(m: &CMatrix, l: ModeLayout, r: &[C64; 4]) -> CMatrix {
    CMatrix::from_fn(4, 4, |a, b| {
        let (ia, ib) = (l.index(BASIS[a].0, BASIS[a].1, 0), l.index(BASIS[b].0, BASIS[b].1, 0));
        m[(ia, ib)] * r[a].conj() * r[b]
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyTrace {
    pub theta: f64,
    pub alice: usize,
    pub phases: Vec<f64>,
    /// Probability of the analysis outcome, ½ + Re(e^{iφ} ρ_{a0,a1}).
    pub signal: Vec<f64>,
    /// Fitted phase ψ with signal ≈ ½ + c cos(φ + ψ).
    pub offset: f64,
}

/// Bob starts in (|0⟩+|1⟩)/√2 with Alice in |alice⟩; after the gate Bob's
/// coherence is read out against an analysis phase φ. Encode and decode
/// pulses are taken as ideal.
pub fn ramsey_phase_probe(
    theta: f64,
    alice: usize,
    phases: &[f64],
    design: &CphaseDesign,
    noise: &NoiseParams,
    opts: EvolveOptions,
) -> Result<RamseyTrace> {
    if alice > 1 {
        return Err(Error::InvalidArgument(format!("Alice must be 0 or 1, got {alice}")));
    }
    if phases.is_empty() {
        return Err(Error::InvalidArgument("empty analysis-phase grid".into()));
    }
    let l = design.layout();
    let collapse = collapse_operators(noise, l)?;
    let runs = Runs::new(design, theta, &collapse, opts)?;
    let r = runs.reference_phases()?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let psi = (runs.basis(alice, 0) + runs.basis(alice, 1)) * h;
    let (m, _) = runs.gate.run_operator(&(&psi * psi.adjoint()), &runs.samples)?;
    let rho = corrected_coherences(&m[0], l, &r);
    let (k0, k1) = (2 * alice, 2 * alice + 1);
    let c = rho[(k0, k1)];
    let signal: Vec<f64> = phases.iter().map(|&p| 0.5 + (C64::from_polar(1.0, p) * c).re).collect();
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let z: C64 = phases.iter().zip(&signal).map(|(&p, &s)| C64::from_polar(s - mean, -p)).sum();
    Ok(RamseyTrace { theta, alice, phases: phases.to_vec(), signal, offset: z.arg() })
}
