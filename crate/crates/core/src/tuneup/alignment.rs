use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{collapse_operators, EvolveOptions, NoiseParams, Propagator};
use crate::fit::{golden_max, golden_min};
use crate::hilbert::{CMatrix, CVector, ModeLayout, C64};
use crate::par;
use crate::protocols::{CheckDesign, CheckParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub detunings: Vec<f64>,
    /// P(u) post-selected on unchanged photon number, for |0,0⟩, |0,1⟩, |1,0⟩.
    pub p_e: [Vec<f64>; 3],
    /// δω of the |0,0⟩ maximum.
    pub peak_00: f64,
    /// δω of the |0,1⟩ and |1,0⟩ minima nearest the |0,0⟩ maximum.
    pub minima: [f64; 2],
    /// Largest distance between a logical minimum and the |0,0⟩ maximum.
    pub gap: f64,
    /// Distance between the two logical minima.
    pub split: f64,
}

const INPUTS: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 0)];

struct Spectro<'a> {
    design: &'a CheckDesign,
    params: CheckParams,
    noise: &'a NoiseParams,
    layout: ModeLayout,
    opts: EvolveOptions,
}

impl Spectro<'_> {
    fn p_e(&self, delta_omega: f64, input: usize) -> Result<f64> {
        let p = CheckParams { delta_omega, ..self.params };
        let schedule = self.design.schedule(&p)?;
        let l = self.layout;
        let collapse = collapse_operators(self.noise, l)?;
        let prop = Propagator::new(&schedule, l, &collapse, self.opts)?;
        let (na, nb) = INPUTS[input];
        let mut psi = CVector::zeros(l.dim());
        psi[l.index(na, nb, 0)] = C64::new(1.0, 0.0);
        let (m, _) = prop.run_operator(&(&psi * psi.adjoint()), &[schedule.duration])?;
        let rho: &CMatrix = &m[0];
        let n = na + nb;
        let upper = self.design.variant.upper().index();
        let (mut kept, mut up) = (0.0, 0.0);
        for i in 0..l.dim() {
            let (a, b, q) = l.decompose(i);
            if a + b == n {
                kept += rho[(i, i)].re;
                if q == upper {
                    up += rho[(i, i)].re;
                }
            }
        }
        Ok(if kept > 0.0 { up / kept } else { 0.0 })
    }
}

fn refine(f: impl FnMut(f64) -> f64, grid: &[f64], k: usize, maximize: bool) -> f64 {
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let tol = 1e-6 * (hi - lo).abs().max(1e-12);
    if maximize {
        golden_max(f, lo, hi, tol, 100).0
    } else {
        golden_min(f, lo, hi, tol, 100).0
    }
}

/// Spectroscopy of a tuned check against the transmon detuning.
pub fn spectroscopy_alignment(
    design: &CheckDesign,
    params: &CheckParams,
    detunings: &[f64],
    noise: &NoiseParams,
    opts: EvolveOptions,
) -> Result<AlignmentReport> {
    if detunings.len() < 3 || detunings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("alignment needs at least 3 increasing detunings".into()));
    }
    let sp = Spectro {
        design,
        params: *params,
        noise,
        layout: design.layout(2),
        opts: EvolveOptions { monitor_truncation: false, ..opts },
    };
    let jobs: Vec<(usize, f64)> = (0..3).flat_map(|i| detunings.iter().map(move |&d| (i, d))).collect();
    let flat = par::try_map(&jobs, |&(i, d)| sp.p_e(d, i))?;
    let nd = detunings.len();
    let p_e: [Vec<f64>; 3] = std::array::from_fn(|i| flat[i * nd..(i + 1) * nd].to_vec());
    let mut err = None;
    let mut eval = |d: f64, i: usize| match sp.p_e(d, i) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    let kp = (0..nd).max_by(|&a, &b| p_e[0][a].total_cmp(&p_e[0][b])).unwrap();
    let peak_00 = refine(|d| eval(d, 0), detunings, kp, true);
    // Logical minima are searched within |χ|/4 of the |0,0⟩ maximum.
    let window = 0.25 * design.chi.abs();
    let mut minima = [0.0; 2];
    for (slot, i) in [1usize, 2].into_iter().enumerate() {
        let km = (0..nd)
            .filter(|&k| (detunings[k] - peak_00).abs() <= window)
            .min_by(|&a, &b| p_e[i][a].total_cmp(&p_e[i][b]))
            .unwrap_or(kp);
        minima[slot] = refine(|d| eval(d, i), detunings, km, false);
    }
    if let Some(e) = err {
        return Err(e);
    }
    let gap = minima.iter().map(|m| (m - peak_00).abs()).fold(0.0, f64::max);
    Ok(AlignmentReport { detunings: detunings.to_vec(), p_e, peak_00, minima, gap, split: (minima[0] - minima[1]).abs() })
}
