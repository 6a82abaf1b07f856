//! Closed-form predictions of the Schwinger spin-N/2 picture.
//!
//! For fixed total photon number N the two cavities behave as a spin S = N/2
//! precessing about Ω_g (ancilla in g) or Ω_e (ancilla in e). Transition
//! frequencies and strengths of the ancilla spectrum follow from the two
//! precession rates and the angle between the axes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// True for integers, false for odd halves.
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The allowed projections −j, −j+1, …, j for j = n/2.
pub fn projections(n: u32) -> impl Iterator<Item = HalfInt> {
    let n = n as i32;
    (0..=n).map(move |k| HalfInt(2 * k - n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinModelParams {
    pub n_photons: u32,
    pub g_bs: f64,
    pub delta: f64,
    pub chi: f64,
    pub phi: f64,
}

impl SpinModelParams {
    pub fn symmetric(n_photons: u32, g_bs: f64, chi: f64) -> Self {
        Self { n_photons, g_bs, delta: chi / 2.0, chi, phi: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        if [self.g_bs, self.delta, self.chi, self.phi].iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite spin parameters {self:?}")))
        }
    }

    pub fn axes(&self) -> QuantizationAxes {
        QuantizationAxes::new(self.g_bs, self.delta, self.chi, self.phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationAxes {
    pub omega_g: [f64; 3],
    pub omega_e: [f64; 3],
}

impl QuantizationAxes {
    pub fn new(g_bs: f64, delta: f64, chi: f64, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self {
            omega_g: [g_bs * c, -g_bs * s, delta],
            omega_e: [g_bs * c, -g_bs * s, delta - chi],
        }
    }

    pub fn norm_g(&self) -> f64 {
        norm3(&self.omega_g)
    }

    pub fn norm_e(&self) -> f64 {
        norm3(&self.omega_e)
    }

    /// Angle between the two axes from their dot product.
    pub fn angle(&self) -> f64 {
        let dot: f64 = self.omega_g.iter().zip(&self.omega_e).map(|(a, b)| a * b).sum();
        (dot / (self.norm_g() * self.norm_e())).clamp(-1.0, 1.0).acos()
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Ω = √(g² + (χ/2)²).
pub fn larmor_frequency(g_bs: f64, chi: f64) -> f64 {
    g_bs.hypot(chi / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricLine {
    pub delta_m: i32,
    pub frequency: f64,
    pub degeneracy: usize,
}

/// The 2N+1 distinct lines at symmetric detuning Δ = χ/2.
pub fn transition_frequencies_symmetric(n: u32, g_bs: f64, chi: f64) -> Vec<SymmetricLine> {
    let omega = larmor_frequency(g_bs, chi);
    let n_i = n as i32;
    (-n_i..=n_i)
        .map(|dm| SymmetricLine {
            delta_m: dm,
            frequency: n as f64 * chi / 2.0 + dm as f64 * omega,
            degeneracy: (n_i + 1 - dm.abs()) as usize,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralLine {
    pub m_g: HalfInt,
    pub m_e: HalfInt,
    pub frequency: f64,
}

/// Eigenenergies (E_g, E_e) indexed by ascending m.
pub fn spin_eigenenergies(n: u32, g_bs: f64, delta: f64, chi: f64) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let wg = g_bs.hypot(delta);
    let we = g_bs.hypot(delta - chi);
    let eg = projections(n).map(|m| -nf * delta / 2.0 + m.value() * wg).collect();
    let ee = projections(n).map(|m| nf * (chi - delta) / 2.0 + m.value() * we).collect();
    (eg, ee)
}

/// All (N+1)² frequencies E_e(m_e) − E_g(m_g), ordered by (m_g, m_e).
pub fn transition_frequencies_general(n: u32, g_bs: f64, delta: f64, chi: f64) -> Vec<GeneralLine> {
    let nf = n as f64;
    let wg = g_bs.hypot(delta);
    let we = g_bs.hypot(delta - chi);
    let mut out = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for m_g in projections(n) {
        for m_e in projections(n) {
            out.push(GeneralLine {
                m_g,
                m_e,
                frequency: nf * chi / 2.0 + m_e.value() * we - m_g.value() * wg,
            });
        }
    }
    out
}

/// δθ = atan(Δ/g) − atan((Δ−χ)/g), evaluated with atan2 so that g = 0 is
/// handled on the same branch.
pub fn axes_angle(g_bs: f64, delta: f64, chi: f64) -> Result<f64> {
    if g_bs == 0.0 && (delta == 0.0 || delta == chi) {
        return Err(Error::DegenerateAxis(format!(
            "g_bs = 0 with Δ = {delta} leaves one precession axis undefined"
        )));
    }
    Ok(delta.atan2(g_bs) - (delta - chi).atan2(g_bs))
}

fn ln_factorial(n: i32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner small-d element d^j_{m1,m2}(β) in the standard convention,
/// e.g. d^{1/2}_{1/2,−1/2} = −sin(β/2).
pub fn wigner_small_d(j: HalfInt, m1: HalfInt, m2: HalfInt, beta: f64) -> Result<f64> {
    let (j2, a2, b2) = (j.twice(), m1.twice(), m2.twice());
    if j2 < 0 || a2.abs() > j2 || b2.abs() > j2 || (j2 - a2) % 2 != 0 || (j2 - b2) % 2 != 0 {
        return Err(Error::QuantumNumbers(format!("j = {j}, m1 = {m1}, m2 = {m2}")));
    }
    // Integer combinations appearing in the factorial sum.
    let jpm1 = (j2 + a2) / 2;
    let jmm1 = (j2 - a2) / 2;
    let jpm2 = (j2 + b2) / 2;
    let jmm2 = (j2 - b2) / 2;
    let m1_minus_m2 = (a2 - b2) / 2;
    let prefactor = 0.5 * (ln_factorial(jpm1) + ln_factorial(jmm1) + ln_factorial(jpm2) + ln_factorial(jmm2));
    let (s, c) = (beta / 2.0).sin_cos();
    let kmin = 0.max(-m1_minus_m2);
    let kmax = jpm2.min(jmm1);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let denom = ln_factorial(jpm2 - k) + ln_factorial(k) + ln_factorial(jmm1 - k) + ln_factorial(m1_minus_m2 + k);
        let sign = if (k + m1_minus_m2) % 2 == 0 { 1.0 } else { -1.0 };
        let pc = j2 - 2 * k - m1_minus_m2;
        let ps = 2 * k + m1_minus_m2;
        sum += sign * (prefactor - denom).exp() * c.powi(pc) * s.powi(ps);
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub m_g: HalfInt,
    pub m_e: HalfInt,
    pub delta_m: i32,
    pub frequency: f64,
    pub element: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub n_photons: u32,
    pub rows: Vec<TransitionRow>,
}

impl TransitionTable {
    pub fn element(&self, m_g: HalfInt, m_e: HalfInt) -> Option<f64> {
        self.rows.iter().find(|r| r.m_g == m_g && r.m_e == m_e).map(|r| r.element)
    }
}

/// Frequencies paired with |d^{N/2}_{m_g,m_e}(δθ)|, sorted stably by (δm, m_g).
pub fn transition_matrix_elements(params: &SpinModelParams) -> Result<TransitionTable> {
    params.validate()?;
    let n = params.n_photons;
    let j = HalfInt(n as i32);
    let beta = if n == 0 { 0.0 } else { axes_angle(params.g_bs, params.delta, params.chi)? };
    let mut rows = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for line in transition_frequencies_general(n, params.g_bs, params.delta, params.chi) {
        let d = wigner_small_d(j, line.m_g, line.m_e, beta)?;
        rows.push(TransitionRow {
            m_g: line.m_g,
            m_e: line.m_e,
            delta_m: (line.m_e.twice() - line.m_g.twice()) / 2,
            frequency: line.frequency,
            element: d.abs(),
        });
    }
    rows.sort_by_key(|r| (r.delta_m, r.m_g));
    Ok(TransitionTable { n_photons: n, rows })
}
