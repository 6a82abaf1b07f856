//! Drive envelopes, schedules and analytic starting points.
//!
//! The transmon drive enters as f(t)(e^{i(δω t + θ)}|g⟩⟨u| + h.c.) with u the
//! addressed upper level, so a resonant pulse rotates by 2∫f dt.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, Level, ModeOperators, OperatorMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquarePulse {
    pub amplitude: f64,
    pub duration: f64,
    pub ramp: f64,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub phase: f64,
}

impl SquarePulse {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || self.ramp < 0.0 || 2.0 * self.ramp > self.duration + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "square pulse needs 0 <= 2 t_r <= T_p, got t_r = {}, T_p = {}",
                self.ramp, self.duration
            )));
        }
        Ok(())
    }

    fn value(&self, t: f64) -> f64 {
        let (a, tp, tr) = (self.amplitude, self.duration, self.ramp);
        if tr > 0.0 && t < tr {
            0.5 * a * (1.0 - (PI * t / tr).cos())
        } else if tr > 0.0 && t > tp - tr {
            0.5 * a * (1.0 + (PI * (t - tp + tr) / tr).cos())
        } else {
            a
        }
    }

    /// ∫f dt over the whole pulse.
    pub fn area(&self) -> f64 {
        self.amplitude * (self.duration - self.ramp)
    }
}

/// Cosine-ramped square envelope.
pub fn square_envelope(t: f64, p: &SquarePulse) -> Result<f64> {
    p.validate()?;
    check_window(t, p.duration)?;
    Ok(p.value(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoppedGaussian {
    pub amplitude: f64,
    pub sigma: f64,
    pub n_chop: f64,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub phase: f64,
}

impl ChoppedGaussian {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.n_chop > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Gaussian needs sigma > 0 and n_chop > 0, got {} and {}",
                self.sigma, self.n_chop
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.n_chop * self.sigma
    }

    fn value(&self, t: f64) -> f64 {
        let x = (t - self.n_chop * self.sigma) / self.sigma;
        self.amplitude * ((-0.5 * x * x).exp() - (-0.5 * self.n_chop * self.n_chop).exp())
    }

    /// ∫f dt in closed form.
    pub fn area(&self) -> f64 {
        let erf_term = erf(self.n_chop / std::f64::consts::SQRT_2);
        self.amplitude
            * self.sigma
            * ((2.0 * PI).sqrt() * erf_term - 2.0 * self.n_chop * (-0.5 * self.n_chop * self.n_chop).exp())
    }
}

pub fn gaussian_envelope(t: f64, p: &ChoppedGaussian) -> Result<f64> {
    p.validate()?;
    check_window(t, p.duration())?;
    Ok(p.value(t))
}

fn check_window(t: f64, duration: f64) -> Result<()> {
    if t < -1e-12 || t > duration + 1e-12 || !t.is_finite() {
        return Err(Error::TimeOutOfRange { t, duration });
    }
    Ok(())
}

/// Error function: Taylor series below |x| = 2, continued fraction above.
fn erf(x: f64) -> f64 {
    if x.abs() < 2.0 {
        let mut sum = x;
        let mut term = x;
        let x2 = x * x;
        let mut n = 0.0;
        while term.abs() > 1e-17 * sum.abs() {
            n += 1.0;
            term *= -x2 / n;
            sum += term / (2.0 * n + 1.0);
        }
        2.0 / PI.sqrt() * sum
    } else {
        1.0_f64.copysign(x) * (1.0 - erfc_asymptotic(x.abs()))
    }
}

/// erfc by Lentz's continued fraction, for x >= 2.
fn erfc_asymptotic(x: f64) -> f64 {
    let mut f = x;
    let tiny = 1e-300;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

/// An instantaneous rotation by `angle` about the drive axis at `phase`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kick {
    pub angle: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub detuning: f64,
}

/// Two rotations separated in time, the joint-parity sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPair {
    pub angle: f64,
    pub separation: f64,
    #[serde(default)]
    pub phases: [f64; 2],
    #[serde(default)]
    pub detuning: f64,
}

impl DeltaPair {
    /// Fourier weight of the pair at transition frequency ω: cos(ωT/2).
    pub fn spectrum(&self, omega: f64) -> f64 {
        (omega * self.separation / 2.0).cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseShape {
    Square(SquarePulse),
    Gaussian(ChoppedGaussian),
    Kick(Kick),
}

impl PulseShape {
    pub fn duration(&self) -> f64 {
        match self {
            PulseShape::Square(p) => p.duration,
            PulseShape::Gaussian(p) => p.duration(),
            PulseShape::Kick(_) => 0.0,
        }
    }

    pub fn detuning(&self) -> f64 {
        match self {
            PulseShape::Square(p) => p.detuning,
            PulseShape::Gaussian(p) => p.detuning,
            PulseShape::Kick(k) => k.detuning,
        }
    }

    pub fn phase(&self) -> f64 {
        match self {
            PulseShape::Square(p) => p.phase,
            PulseShape::Gaussian(p) => p.phase,
            PulseShape::Kick(k) => k.phase,
        }
    }

    fn ramp(&self) -> f64 {
        match self {
            PulseShape::Square(p) => p.ramp,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PulseShape::Square(p) => p.validate(),
            PulseShape::Gaussian(p) => p.validate(),
            PulseShape::Kick(k) if !k.angle.is_finite() => {
                Err(Error::InvalidArgument("kick angle must be finite".into()))
            }
            PulseShape::Kick(_) => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedPulse {
    pub start: f64,
    pub shape: PulseShape,
}

impl PlacedPulse {
    pub fn end(&self) -> f64 {
        self.start + self.shape.duration()
    }

    /// Real envelope at absolute time t (zero outside the pulse).
    pub fn envelope(&self, t: f64) -> f64 {
        let local = t - self.start;
        match &self.shape {
            PulseShape::Square(p) if (0.0..=p.duration).contains(&local) => p.value(local),
            PulseShape::Gaussian(p) if (0.0..=p.duration()).contains(&local) => p.value(local),
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BeamsplitterDrive {
    pub g_bs: f64,
    pub detuning: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub ramp: f64,
    pub hold: f64,
}

impl BeamsplitterDrive {
    pub fn span(&self) -> f64 {
        2.0 * self.ramp + self.hold
    }

    pub fn validate(&self) -> Result<()> {
        if self.g_bs < 0.0 || self.ramp < 0.0 || self.hold < 0.0 || !self.g_bs.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beamsplitter needs g_bs, ramp, hold >= 0 (got {}, {}, {})",
                self.g_bs, self.ramp, self.hold
            )));
        }
        Ok(())
    }

    /// g_bs(t) relative to the drive start.
    pub fn amplitude(&self, local: f64) -> f64 {
        let (g, tr, end) = (self.g_bs, self.ramp, self.span());
        if local < 0.0 || local > end {
            0.0
        } else if tr > 0.0 && local < tr {
            0.5 * g * (1.0 - (PI * local / tr).cos())
        } else if tr > 0.0 && local > end - tr {
            0.5 * g * (1.0 + (PI * (local - end + tr) / tr).cos())
        } else {
            g
        }
    }
}

/// Which ancilla transition the transmon drive addresses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AncillaVariant {
    #[default]
    Ge,
    Gf,
}

impl AncillaVariant {
    pub fn upper(self) -> Level {
        match self {
            AncillaVariant::Ge => Level::E,
            AncillaVariant::Gf => Level::F,
        }
    }

    pub fn dim_q(self) -> usize {
        match self {
            AncillaVariant::Ge => 2,
            AncillaVariant::Gf => 3,
        }
    }
}

/// Dispersive shifts of Bob's cavity per ancilla level, rad/µs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dispersive {
    pub chi_e: f64,
    #[serde(default)]
    pub chi_f: f64,
}

impl Dispersive {
    /// Two-level operation; the f shift only matters with a three-level ancilla.
    pub fn ge(chi: f64) -> Self {
        Self { chi_e: chi, chi_f: 2.0 * chi }
    }

    /// g–f operation with the f shift equal to the g–e value of the two-level
    /// scheme and e sitting halfway.
    pub fn gf(chi: f64) -> Self {
        Self { chi_e: chi / 2.0, chi_f: chi }
    }

    /// Shift of the level the drive addresses.
    pub fn addressed(&self, variant: AncillaVariant) -> f64 {
        match variant {
            AncillaVariant::Ge => self.chi_e,
            AncillaVariant::Gf => self.chi_f,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub beamsplitter: BeamsplitterDrive,
    #[serde(default)]
    pub beamsplitter_start: f64,
    pub pulses: Vec<PlacedPulse>,
    #[serde(default)]
    pub variant: AncillaVariant,
    pub dispersive: Dispersive,
    /// Shift of the transmon start away from ramp-center alignment, µs.
    #[serde(default)]
    pub alignment_offset: f64,
    pub duration: f64,
}

/// Drive coefficients at one instant: H_drive = c_bs a b† + c_d |g⟩⟨u| + h.c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveCoefficients {
    pub c_bs: C64,
    pub c_d: C64,
}

impl DriveSchedule {
    /// Beamsplitter plus one transmon pulse with ramp centers aligned; the
    /// beamsplitter hold is chosen so both ramp-down centers coincide too.
    pub fn aligned(
        g_bs: f64,
        delta: f64,
        phi: f64,
        bs_ramp: f64,
        pulse: PulseShape,
        variant: AncillaVariant,
        dispersive: Dispersive,
    ) -> Result<Self> {
        Self::aligned_with_offset(g_bs, delta, phi, bs_ramp, pulse, variant, dispersive, 0.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn aligned_with_offset(
        g_bs: f64,
        delta: f64,
        phi: f64,
        bs_ramp: f64,
        pulse: PulseShape,
        variant: AncillaVariant,
        dispersive: Dispersive,
        offset: f64,
    ) -> Result<Self> {
        pulse.validate()?;
        let tp = pulse.duration();
        let tr = pulse.ramp();
        let hold = tp - tr - bs_ramp;
        if hold < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "pulse of {tp} µs is too short for a {bs_ramp} µs beamsplitter ramp"
            )));
        }
        let bs = BeamsplitterDrive { g_bs, detuning: delta, phase: phi, ramp: bs_ramp, hold: hold.max(0.0) };
        bs.validate()?;
        let mut pulse_start = 0.5 * (bs_ramp - tr) + offset;
        let mut bs_start = 0.0;
        if pulse_start < 0.0 {
            bs_start = -pulse_start;
            pulse_start = 0.0;
        }
        let duration = (bs_start + bs.span()).max(pulse_start + tp);
        Ok(Self {
            beamsplitter: bs,
            beamsplitter_start: bs_start,
            pulses: vec![PlacedPulse { start: pulse_start, shape: pulse }],
            variant,
            dispersive,
            alignment_offset: offset,
            duration,
        })
    }

    /// Free evolution with no drives, in the frame co-rotating with both cavities.
    pub fn idle(duration: f64, variant: AncillaVariant, dispersive: Dispersive) -> Self {
        Self {
            beamsplitter: BeamsplitterDrive { hold: duration, ..Default::default() },
            beamsplitter_start: 0.0,
            pulses: Vec::new(),
            variant,
            dispersive,
            alignment_offset: 0.0,
            duration,
        }
    }

    /// Constant beamsplitter with a list of pulses, no alignment bookkeeping.
    pub fn constant_beamsplitter(
        g_bs: f64,
        delta: f64,
        phi: f64,
        duration: f64,
        pulses: Vec<PlacedPulse>,
        variant: AncillaVariant,
        dispersive: Dispersive,
    ) -> Result<Self> {
        let bs = BeamsplitterDrive { g_bs, detuning: delta, phase: phi, ramp: 0.0, hold: duration };
        bs.validate()?;
        for p in &pulses {
            p.shape.validate()?;
            if p.start < -1e-12 || p.end() > duration + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "pulse [{}, {}] outside schedule of {duration} µs",
                    p.start,
                    p.end()
                )));
            }
        }
        Ok(Self {
            beamsplitter: bs,
            beamsplitter_start: 0.0,
            pulses,
            variant,
            dispersive,
            alignment_offset: 0.0,
            duration,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.beamsplitter.validate()?;
        for p in &self.pulses {
            p.shape.validate()?;
        }
        if !(self.duration >= 0.0) {
            return Err(Error::InvalidArgument("negative schedule duration".into()));
        }
        Ok(())
    }

    pub fn g_bs_at(&self, t: f64) -> f64 {
        self.beamsplitter.amplitude(t - self.beamsplitter_start)
    }

    /// Complex drive coefficients in the frame rotating at `frame` on the addressed level.
    pub fn coefficients(&self, t: f64, frame: f64) -> DriveCoefficients {
        let g = self.g_bs_at(t);
        let c_bs = C64::from_polar(0.5 * g, self.beamsplitter.phase);
        let mut c_d = C64::new(0.0, 0.0);
        for p in &self.pulses {
            let f = p.envelope(t);
            if f != 0.0 {
                c_d += C64::from_polar(f, (p.shape.detuning() - frame) * t + p.shape.phase());
            }
        }
        DriveCoefficients { c_bs, c_d }
    }

    /// Detuning shared by every transmon pulse, if any; used as the propagation frame.
    pub fn common_detuning(&self) -> Option<f64> {
        let first = self.pulses.first()?.shape.detuning();
        self.pulses.iter().all(|p| p.shape.detuning() == first).then_some(first)
    }

    /// Instants where an envelope derivative may jump, including kick times.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.duration];
        let bs = &self.beamsplitter;
        let s = self.beamsplitter_start;
        pts.extend([s, s + bs.ramp, s + bs.ramp + bs.hold, s + bs.span()]);
        for p in &self.pulses {
            pts.push(p.start);
            pts.push(p.end());
            if let PulseShape::Square(sq) = p.shape {
                pts.push(p.start + sq.ramp);
                pts.push(p.end() - sq.ramp);
            }
        }
        pts.retain(|t| (0.0..=self.duration).contains(t));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }

    /// Instantaneous rotations as (time, kick).
    pub fn kicks(&self) -> Vec<(f64, Kick)> {
        let mut k: Vec<(f64, Kick)> = self
            .pulses
            .iter()
            .filter_map(|p| match p.shape {
                PulseShape::Kick(k) => Some((p.start, k)),
                _ => None,
            })
            .collect();
        k.sort_by(|a, b| a.0.total_cmp(&b.0));
        k
    }

    /// True when every drive envelope is flat on the open interval (t0, t1).
    pub fn is_flat_between(&self, t0: f64, t1: f64) -> bool {
        let mid = 0.5 * (t0 + t1);
        let bs = &self.beamsplitter;
        let local = mid - self.beamsplitter_start;
        let bs_flat = bs.g_bs == 0.0
            || bs.ramp == 0.0
            || local < 0.0
            || local > bs.span()
            || (local >= bs.ramp && local <= bs.ramp + bs.hold);
        let pulses_flat = self.pulses.iter().all(|p| {
            let l = mid - p.start;
            match p.shape {
                PulseShape::Square(sq) => {
                    l < 0.0 || l > sq.duration || sq.ramp == 0.0 || (l >= sq.ramp && l <= sq.duration - sq.ramp)
                }
                PulseShape::Gaussian(g) => l < 0.0 || l > g.duration(),
                PulseShape::Kick(_) => true,
            }
        });
        bs_flat && pulses_flat
    }

    pub fn transmon_span(&self) -> (f64, f64) {
        let start = self.pulses.iter().map(|p| p.start).fold(f64::INFINITY, f64::min);
        let end = self.pulses.iter().map(|p| p.end()).fold(f64::NEG_INFINITY, f64::max);
        (start, end)
    }
}

/// Dense H(t) in rad/µs, in the reference frame of the undriven ancilla.
pub fn assemble_hamiltonian(schedule: &DriveSchedule, t: f64, ops: &ModeOperators) -> Result<OperatorMatrix> {
    if ops.layout.dim_q < schedule.variant.dim_q() {
        return Err(Error::Layout(format!(
            "{:?} variant needs dim_q >= {}",
            schedule.variant,
            schedule.variant.dim_q()
        )));
    }
    if t < -1e-12 || t > schedule.duration + 1e-12 {
        return Err(Error::TimeOutOfRange { t, duration: schedule.duration });
    }
    let terms = HamiltonianTerms::new(schedule, ops)?;
    let c = schedule.coefficients(t, 0.0);
    let mut h = terms.static_part.clone();
    h += &terms.bs * c.c_bs + terms.bs.adjoint() * c.c_bs.conj();
    h += &terms.drive * c.c_d + terms.drive.adjoint() * c.c_d.conj();
    OperatorMatrix::hermitian(ops.layout, h)
}

/// Operator pieces of the Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    /// −Δ b†b + χ_e b†b|e⟩⟨e| (+ χ_f b†b|f⟩⟨f|)
    pub static_part: CMatrix,
    /// a b†
    pub bs: CMatrix,
    /// |g⟩⟨u|
    pub drive: CMatrix,
    /// |u⟩⟨u|
    pub upper_projector: CMatrix,
}

impl HamiltonianTerms {
    pub fn new(schedule: &DriveSchedule, ops: &ModeOperators) -> Result<Self> {
        let layout = ops.layout;
        let nb = ops.n_b.matrix();
        let pe = ops.proj_e.matrix();
        let mut static_part = nb * C64::new(-schedule.beamsplitter.detuning, 0.0);
        static_part += nb * pe * C64::new(schedule.dispersive.chi_e, 0.0);
        if let Some(pf) = &ops.proj_f {
            static_part += nb * pf.matrix() * C64::new(schedule.dispersive.chi_f, 0.0);
        }
        let bs = ops.a.matrix() * ops.b.matrix().adjoint();
        let upper = schedule.variant.upper();
        let drive = crate::hilbert::ancilla_transition(&layout, Level::G, upper)?.into_matrix();
        let upper_projector = crate::hilbert::ancilla_transition(&layout, upper, upper)?.into_matrix();
        Ok(Self { static_part, bs, drive, upper_projector })
    }
}

/// Analytic square-pulse erasure-check parameters for notch order n and
/// revolution count m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureCheckGuess {
    pub t_p: f64,
    pub g_bs: f64,
    pub amplitude: f64,
    pub delta_omega: f64,
    pub delta: f64,
}

pub fn erasure_check_guess(chi: f64, n: u32, m: u32) -> Result<ErasureCheckGuess> {
    if n == 0 || chi == 0.0 || !chi.is_finite() {
        return Err(Error::InvalidArgument(format!("need n >= 1 and finite nonzero chi (n = {n}, chi = {chi})")));
    }
    let k = 4.0 * (n as f64).powi(2) - 1.0;
    let ratio = (m as f64).powi(2) / k - 0.25;
    if ratio <= 0.0 {
        return Err(Error::InvalidArgument(format!("m = {m} too small for n = {n}: imaginary g_bs")));
    }
    let t_p = 2.0 * PI * k.sqrt() / chi.abs();
    Ok(ErasureCheckGuess {
        t_p,
        g_bs: chi.abs() * ratio.sqrt(),
        // An N = 0 π-pulse; equals |χ|/(4√3) at n = 1.
        amplitude: PI / (2.0 * t_p),
        delta_omega: 0.0,
        delta: chi / 2.0,
    })
}

/// g_bs = (√3/2)|χ| where Ω = |χ| and every line sits on a multiple of χ/2.
pub fn parity_beamsplitter(chi: f64) -> f64 {
    0.75f64.sqrt() * chi.abs()
}

/// Joint-parity sequence: π/2, hold 2π/|χ|, π/2 on the addressed transition.
/// `width` is ignored when `idealized`.
pub fn joint_parity_schedule(chi: f64, variant: AncillaVariant, idealized: bool, width: f64) -> Result<DriveSchedule> {
    if chi == 0.0 || !chi.is_finite() {
        return Err(Error::InvalidArgument("chi must be finite and nonzero".into()));
    }
    let hold = 2.0 * PI / chi.abs();
    let dispersive = match variant {
        AncillaVariant::Ge => Dispersive::ge(chi),
        AncillaVariant::Gf => Dispersive::gf(chi),
    };
    let g = parity_beamsplitter(chi);
    if idealized {
        let kick = |start| PlacedPulse {
            start,
            shape: PulseShape::Kick(Kick { angle: PI / 2.0, phase: 0.0, detuning: 0.0 }),
        };
        DriveSchedule::constant_beamsplitter(g, chi / 2.0, 0.0, hold, vec![kick(0.0), kick(hold)], variant, dispersive)
    } else {
        if !(width > 0.0) {
            return Err(Error::InvalidArgument("finite-width parity pulses need width > 0".into()));
        }
        let sq = |start| PlacedPulse {
            start,
            shape: PulseShape::Square(SquarePulse {
                amplitude: PI / (4.0 * width),
                duration: width,
                ramp: 0.0,
                detuning: 0.0,
                phase: 0.0,
            }),
        };
        DriveSchedule::constant_beamsplitter(g, chi / 2.0, 0.0, hold + width, vec![sq(0.0), sq(hold)], variant, dispersive)
    }
}
