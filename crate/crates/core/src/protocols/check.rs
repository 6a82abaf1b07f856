use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{collapse_operators, CollapseSet, EvolveOptions, NoiseParams, Propagator};
use crate::hilbert::{CMatrix, CVector, MixedState, ModeLayout, State, C64};
use crate::pulses::{
    AncillaVariant, ChoppedGaussian, Dispersive, DriveSchedule, ErasureCheckGuess, PulseShape, SquarePulse,
};

/// Transmon pulse family used for the check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CheckPulse {
    Square { ramp: f64 },
    Gaussian { n_chop: f64 },
}

/// Fixed hardware choices for an erasure check; `CheckParams` holds the tunables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckDesign {
    pub chi: f64,
    pub variant: AncillaVariant,
    pub bs_ramp: f64,
    #[serde(default)]
    pub phi: f64,
    pub pulse: CheckPulse,
    #[serde(default)]
    pub alignment_offset: f64,
}

impl CheckDesign {
    /// Unramped square pulse on the g–e transition.
    pub fn square(chi: f64) -> Self {
        Self {
            chi,
            variant: AncillaVariant::Ge,
            bs_ramp: 0.0,
            phi: 0.0,
            pulse: CheckPulse::Square { ramp: 0.0 },
            alignment_offset: 0.0,
        }
    }

    pub fn gaussian(chi: f64, n_chop: f64) -> Self {
        Self { pulse: CheckPulse::Gaussian { n_chop }, ..Self::square(chi) }
    }

    pub fn with_variant(mut self, variant: AncillaVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn dispersive(&self) -> Dispersive {
        match self.variant {
            AncillaVariant::Ge => Dispersive::ge(self.chi),
            AncillaVariant::Gf => Dispersive::gf(self.chi),
        }
    }

    /// Smallest layout holding every manifold up to `n_max` photons exactly.
    pub fn layout(&self, n_max: usize) -> ModeLayout {
        ModeLayout { dim_a: n_max + 1, dim_b: n_max + 1, dim_q: self.variant.dim_q() }
    }

    pub fn pulse_shape(&self, p: &CheckParams) -> Result<PulseShape> {
        let shape = match self.pulse {
            CheckPulse::Square { ramp } => PulseShape::Square(SquarePulse {
                amplitude: p.amplitude,
                duration: p.t_p,
                ramp,
                detuning: p.delta_omega,
                phase: 0.0,
            }),
            CheckPulse::Gaussian { n_chop } => PulseShape::Gaussian(ChoppedGaussian {
                amplitude: p.amplitude,
                sigma: p.t_p / (2.0 * n_chop),
                n_chop,
                detuning: p.delta_omega,
                phase: 0.0,
            }),
        };
        Ok(shape)
    }

    pub fn schedule(&self, p: &CheckParams) -> Result<DriveSchedule> {
        p.validate()?;
        let shape = self.pulse_shape(p)?;
        let (g_bs, bs_ramp) = match self.pulse {
            // Gaussian envelopes have no flat top to align against.
            CheckPulse::Gaussian { .. } => (p.g_bs, self.bs_ramp.min(p.t_p)),
            CheckPulse::Square { .. } => (p.g_bs, self.bs_ramp),
        };
        DriveSchedule::aligned_with_offset(
            g_bs,
            p.delta,
            self.phi,
            bs_ramp,
            shape,
            self.variant,
            self.dispersive(),
            self.alignment_offset,
        )
    }

    /// π-pulse amplitude for the addressed N = 0 transition.
    pub fn pi_amplitude(&self, t_p: f64) -> f64 {
        match self.pulse {
            CheckPulse::Square { ramp } => PI / (2.0 * (t_p - ramp)),
            CheckPulse::Gaussian { n_chop } => {
                let unit = ChoppedGaussian { amplitude: 1.0, sigma: t_p / (2.0 * n_chop), n_chop, detuning: 0.0, phase: 0.0 };
                PI / (2.0 * unit.area())
            }
        }
    }
}

/// The tunable parameters of a check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub g_bs: f64,
    /// Beamsplitter detuning Δ, set by the beamsplitter drive frequency.
    pub delta: f64,
    pub t_p: f64,
    pub amplitude: f64,
    pub delta_omega: f64,
}

impl CheckParams {
    pub const NAMES: [&'static str; 5] = ["g_bs", "delta", "t_p", "amplitude", "delta_omega"];

    pub fn from_guess(g: &ErasureCheckGuess) -> Self {
        Self { g_bs: g.g_bs, delta: g.delta, t_p: g.t_p, amplitude: g.amplitude, delta_omega: g.delta_omega }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.g_bs, self.delta, self.t_p, self.amplitude, self.delta_omega]
    }

    pub fn from_array(a: &[f64]) -> Self {
        Self { g_bs: a[0], delta: a[1], t_p: a[2], amplitude: a[3], delta_omega: a[4] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) || !(self.t_p > 0.0) || self.g_bs < 0.0 {
            return Err(Error::InvalidArgument(format!("invalid check parameters {self:?}")));
        }
        Ok(())
    }
}

/// Ancilla readout: instantaneous projection, then `tau_ro` of noisy idling,
/// then an ideal reset to |g⟩. `readout_dephasing` is an extra Pauli
/// probability p applied as a (1 − 2p) factor on Bob's number coherences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadoutModel {
    pub tau_ro: f64,
    pub readout_dephasing: f64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self { tau_ro: 1.0, readout_dephasing: 0.0 }
    }
}

impl ReadoutModel {
    pub fn instantaneous() -> Self {
        Self { tau_ro: 0.0, readout_dephasing: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_ro >= 0.0) || !(0.0..=0.5).contains(&self.readout_dephasing) {
            return Err(Error::InvalidArgument(format!("invalid readout model {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    /// Probability the ancilla is read out of |g⟩, i.e. an erasure flag.
    pub p_flag: f64,
    /// Probability of finding the addressed level u (e or f).
    pub p_upper: f64,
    /// States after readout and reset, normalized; `None` for a null branch.
    pub pass_state: Option<MixedState>,
    pub flag_state: Option<MixedState>,
    pub truncation: bool,
}

impl CheckOutcome {
    pub fn p_pass(&self) -> f64 {
        1.0 - self.p_flag
    }
}

/// Unnormalized cavity operators for the two readout branches.
pub(crate) struct Branches {
    pub pass: CMatrix,
    pub flag: CMatrix,
    pub p_upper: f64,
    pub truncation: bool,
}

/// A check schedule and readout compiled once for repeated use.
pub(crate) struct CheckRunner {
    layout: ModeLayout,
    check: Propagator,
    idle: Option<Propagator>,
    collapse_empty: bool,
    readout: ReadoutModel,
    upper: usize,
    samples: [f64; 1],
    idle_samples: [f64; 1],
}

impl CheckRunner {
    pub fn new(
        schedule: &DriveSchedule,
        layout: ModeLayout,
        noise: &NoiseParams,
        readout: ReadoutModel,
        opts: EvolveOptions,
    ) -> Result<Self> {
        readout.validate()?;
        let collapse = collapse_operators(noise, layout)?;
        Self::with_collapse(schedule, layout, &collapse, readout, opts)
    }

    pub fn with_collapse(
        schedule: &DriveSchedule,
        layout: ModeLayout,
        collapse: &CollapseSet,
        readout: ReadoutModel,
        opts: EvolveOptions,
    ) -> Result<Self> {
        let check = Propagator::new(schedule, layout, collapse, opts)?;
        // The readout idle runs in the cavity frame; the switch from the
        // beamsplitter frame is a known virtual Z and is not tracked.
        let idle = if readout.tau_ro > 0.0 {
            let s = DriveSchedule::idle(readout.tau_ro, schedule.variant, schedule.dispersive);
            Some(Propagator::new(&s, layout, collapse, opts)?)
        } else {
            None
        };
        Ok(Self {
            layout,
            check,
            idle,
            collapse_empty: collapse.is_empty(),
            readout,
            upper: schedule.variant.upper().index(),
            samples: [schedule.duration],
            idle_samples: [readout.tau_ro],
        })
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    /// Evolves a pure input through check and readout.
    pub fn run_pure(&self, psi: &CVector) -> Result<Branches> {
        if self.collapse_empty {
            let (v, trunc) = self.check.run_pure(psi, &self.samples)?;
            let v = &v[0];
            self.readout_branches(v * v.adjoint(), trunc)
        } else {
            self.run_density(&(psi * psi.adjoint()))
        }
    }

    pub fn run_density(&self, rho: &CMatrix) -> Result<Branches> {
        let (m, trunc) = self.check.run_operator(rho, &self.samples)?;
        self.readout_branches(m.into_iter().next().expect("one sample"), trunc)
    }

    fn readout_branches(&self, rho: CMatrix, mut truncation: bool) -> Result<Branches> {
        let l = self.layout;
        let d = l.dim();
        let mut pass = CMatrix::zeros(d, d);
        let mut flag = CMatrix::zeros(d, d);
        let mut p_upper = 0.0;
        for i in 0..d {
            let qi = i % l.dim_q;
            if qi == self.upper {
                p_upper += rho[(i, i)].re;
            }
            for j in 0..d {
                let qj = j % l.dim_q;
                if qi == 0 && qj == 0 {
                    pass[(i, j)] = rho[(i, j)];
                } else if qi == qj {
                    flag[(i, j)] = rho[(i, j)];
                }
            }
        }
        let mut out = [pass, flag];
        if let Some(idle) = &self.idle {
            for m in out.iter_mut() {
                let (r, t) = idle.run_operator(m, &self.idle_samples)?;
                truncation |= t;
                *m = r.into_iter().next().expect("one sample");
            }
        }
        let [pass, flag] = out;
        Ok(Branches {
            pass: self.reset(&pass),
            flag: self.reset(&flag),
            p_upper,
            truncation,
        })
    }

    /// Trace out the ancilla and apply the optional readout dephasing.
    fn reset(&self, m: &CMatrix) -> CMatrix {
        let l = self.layout;
        let dc = l.dim_a * l.dim_b;
        let dq = l.dim_q;
        let factor = 1.0 - 2.0 * self.readout.readout_dephasing;
        CMatrix::from_fn(dc, dc, |i, j| {
            let mut s = C64::new(0.0, 0.0);
            for q in 0..dq {
                s += m[(i * dq + q, j * dq + q)];
            }
            if i % l.dim_b != j % l.dim_b {
                s *= factor;
            }
            s
        })
    }
}

/// Embeds a cavity operator with the ancilla in |g⟩.
pub(crate) fn with_ground_ancilla(layout: ModeLayout, cav: &CMatrix) -> CMatrix {
    let dq = layout.dim_q;
    let d = layout.dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..cav.nrows() {
        for j in 0..cav.ncols() {
            m[(i * dq, j * dq)] = cav[(i, j)];
        }
    }
    m
}

fn normalized(layout: ModeLayout, cav: &CMatrix) -> (f64, Option<MixedState>) {
    let full = with_ground_ancilla(layout, cav);
    match MixedState::from_unnormalized(layout, full) {
        Some((tr, s)) if tr > 1e-14 => (tr, Some(s)),
        Some((tr, _)) => (tr.max(0.0), None),
        None => (0.0, None),
    }
}

/// One check on an arbitrary input state.
pub fn run_check(
    schedule: &DriveSchedule,
    state: &State,
    noise: &NoiseParams,
    readout: ReadoutModel,
    opts: EvolveOptions,
) -> Result<CheckOutcome> {
    let layout = state.layout();
    let runner = CheckRunner::new(schedule, layout, noise, readout, opts)?;
    let b = match state {
        State::Pure(p) => runner.run_pure(p.amplitudes())?,
        State::Mixed(m) => runner.run_density(m.matrix())?,
    };
    let (p_pass, pass_state) = normalized(layout, &b.pass);
    let (p_flag, flag_state) = normalized(layout, &b.flag);
    let total = p_pass + p_flag;
    Ok(CheckOutcome { p_flag: p_flag / total, p_upper: b.p_upper, pass_state, flag_state, truncation: b.truncation })
}

/// The joint-photon-number erasure check for a tuned design.
pub fn run_erasure_check(
    state: &State,
    design: &CheckDesign,
    params: &CheckParams,
    noise: &NoiseParams,
    readout: ReadoutModel,
    opts: EvolveOptions,
) -> Result<CheckOutcome> {
    if state.layout().dim_q < design.variant.dim_q() {
        return Err(Error::Layout(format!("{:?} check needs a {}-level ancilla", design.variant, design.variant.dim_q())));
    }
    run_check(&design.schedule(params)?, state, noise, readout, opts)
}
