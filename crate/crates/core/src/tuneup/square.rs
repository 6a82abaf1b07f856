use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{CollapseSet, EvolveOptions, Propagator};
use crate::fit::{nelder_mead, NelderMeadOptions};
use crate::hilbert::{CVector, C64};
use crate::par;
use crate::protocols::{CheckDesign, CheckParams};

/// Infidelities of |0,0,g⟩→|0,0,u⟩, |0,1,g⟩→|0,1,g⟩ and |1,0,g⟩→|1,0,g⟩
/// (plus |1,1,g⟩→|1,1,g⟩ if requested) for a closed-system check.
pub fn transfer_infidelities(design: &CheckDesign, params: &CheckParams, include_11: bool) -> Result<Vec<f64>> {
    let layout = design.layout(if include_11 { 2 } else { 1 });
    let schedule = design.schedule(params)?;
    let opts = EvolveOptions { monitor_truncation: false, ..Default::default() };
    let prop = Propagator::new(&schedule, layout, &CollapseSet::default(), opts)?;
    let upper = design.variant.upper().index();
    let mut cases = vec![((0, 0), upper), ((0, 1), 0), ((1, 0), 0)];
    if include_11 {
        cases.push(((1, 1), 0));
    }
    let t = [schedule.duration];
    par::try_map(&cases, |&((na, nb), q)| -> Result<f64> {
        let mut psi = CVector::zeros(layout.dim());
        psi[layout.index(na, nb, 0)] = C64::new(1.0, 0.0);
        let (v, _) = prop.run_pure(&psi, &t)?;
        Ok((1.0 - v[0][layout.index(na, nb, q)].norm_sqr()).max(0.0))
    })
}

/// Box constraints for the tune-up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckBounds {
    pub lower: CheckParams,
    pub upper: CheckParams,
}

impl CheckBounds {
    /// A generous box around a guess; g_bs is capped at `g_max`.
    pub fn around(guess: &CheckParams, chi: f64, g_max: f64) -> Self {
        let w = 0.5 * chi.abs();
        Self {
            lower: CheckParams {
                g_bs: 0.5 * guess.g_bs,
                delta: guess.delta - w,
                t_p: 0.5 * guess.t_p,
                amplitude: 0.0,
                delta_omega: guess.delta_omega - w,
            },
            upper: CheckParams {
                g_bs: (1.5 * guess.g_bs).min(g_max),
                delta: guess.delta + w,
                t_p: 1.5 * guess.t_p,
                amplitude: 3.0 * guess.amplitude.abs(),
                delta_omega: guess.delta_omega + w,
            },
        }
    }

    pub fn contains(&self, p: &CheckParams) -> bool {
        let (lo, hi, x) = (self.lower.to_array(), self.upper.to_array(), p.to_array());
        (0..5).all(|k| lo[k] <= x[k] && x[k] <= hi[k])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneOptions {
    /// Initial simplex step relative to g_bs, T_p and A.
    pub rel_step: f64,
    /// Initial simplex step for Δ and δω, in units of |χ|.
    pub freq_step: f64,
    pub max_iter: usize,
    /// The optimizer stops once the cost drops below this.
    pub target_cost: f64,
    /// A run counts as converged when its final cost is below this.
    pub converged_below: f64,
    pub include_11: bool,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self { rel_step: 0.02, freq_step: 0.02, max_iter: 3000, target_cost: 1e-9, converged_below: 1e-5, include_11: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneupResult {
    pub params: CheckParams,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Best cost after each optimizer iteration.
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Derivative-free local search over (g_bs, Δ, T_p, A, δω) minimizing the
/// summed transfer infidelities.
pub fn tune_square_erasure_check(
    design: &CheckDesign,
    start: &CheckParams,
    bounds: &CheckBounds,
    opts: &TuneOptions,
) -> Result<TuneupResult> {
    start.validate()?;
    if !bounds.contains(start) {
        return Err(Error::InvalidArgument(format!("start {start:?} lies outside the tune-up bounds")));
    }
    let cost = |x: &[f64]| -> f64 {
        match transfer_infidelities(design, &CheckParams::from_array(x), opts.include_11) {
            Ok(v) => v.iter().sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let x0 = start.to_array();
    let f = opts.freq_step * design.chi.abs();
    let steps = [opts.rel_step * x0[0], f, opts.rel_step * x0[2], opts.rel_step * x0[3], f];
    let nm = NelderMeadOptions { max_iter: opts.max_iter, target_cost: opts.target_cost, x_tol: 1e-10, f_tol: 1e-14 };
    let r = nelder_mead(cost, &x0, &steps, &bounds.lower.to_array(), &bounds.upper.to_array(), &nm);
    let initial_cost = r.trace[0];
    Ok(TuneupResult {
        params: CheckParams::from_array(&r.x),
        initial_cost,
        final_cost: r.cost,
        converged: r.cost < opts.converged_below,
        cost_trace: r.trace,
        iterations: r.iterations,
        evaluations: r.evaluations,
    })
}
