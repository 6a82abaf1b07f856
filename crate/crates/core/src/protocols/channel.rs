use serde::{Deserialize, Serialize};

use super::check::{Branches, CheckRunner, ReadoutModel};
use super::{cardinal_on_subspace, pauli_rate_from_fidelity, DualRailLabel};
use crate::error::{Error, Result};
use crate::evolver::{EvolveOptions, NoiseParams};
use crate::fit::linear_fit;
use crate::hilbert::{CMatrix, CVector, ModeLayout, C64};
use crate::par;
use crate::pulses::{AncillaVariant, Dispersive, DriveSchedule};

/// A check as a pair of linear maps (pass, flag) on a cavity subspace, with
/// the ancilla reset to |g⟩ after readout. Density matrices are stored
/// row-major, so a k×k matrix becomes a k² vector.
#[derive(Clone, Debug)]
pub struct CheckChannel {
    pub subspace: Vec<(usize, usize)>,
    pass: CMatrix,
    flag: CMatrix,
    /// Largest trace lost outside the subspace over the basis inputs.
    pub leakage: f64,
    pub truncation: bool,
    /// Wall-clock length of one check including readout, µs.
    pub duration: f64,
    /// Deterministic logical Z angle of the pass branch, removed as a
    /// virtual frame update; mostly phase picked up during the ramps.
    pub logical_phase: f64,
}

/// Single-photon manifold plus vacuum: closed under loss without heating.
pub const LEAKAGE_SUBSPACE: [(usize, usize); 3] = [(0, 0), (1, 0), (0, 1)];
/// The dual-rail code space.
pub const CODE_SUBSPACE: [(usize, usize); 2] = [(1, 0), (0, 1)];

impl CheckChannel {
    /// Polarization from k² Hermitian inputs: basis projectors and, for each
    /// pair i < j, (|i⟩+|j⟩)/√2 and (|i⟩+i|j⟩)/√2.
    pub fn build(
        schedule: &DriveSchedule,
        layout: ModeLayout,
        noise: &NoiseParams,
        readout: ReadoutModel,
        subspace: &[(usize, usize)],
        opts: EvolveOptions,
    ) -> Result<Self> {
        let runner = CheckRunner::new(schedule, layout, noise, readout, opts)?;
        let mut ch = Self::from_runner(&runner, subspace, |b| (b.pass, b.flag))?;
        ch.duration = schedule.duration + readout.tau_ro;
        ch.remove_logical_phase();
        Ok(ch)
    }

    /// Free evolution of the same length with the same noise; never flags.
    pub fn idle(
        duration: f64,
        layout: ModeLayout,
        variant: AncillaVariant,
        dispersive: Dispersive,
        noise: &NoiseParams,
        subspace: &[(usize, usize)],
        opts: EvolveOptions,
    ) -> Result<Self> {
        let s = DriveSchedule::idle(duration, variant, dispersive);
        let runner = CheckRunner::new(&s, layout, noise, ReadoutModel::instantaneous(), opts)?;
        let mut ch = Self::from_runner(&runner, subspace, |b| (&b.pass + &b.flag, b.flag * C64::new(0.0, 0.0)))?;
        ch.duration = duration;
        Ok(ch)
    }

    fn from_runner<F>(runner: &CheckRunner, subspace: &[(usize, usize)], split: F) -> Result<Self>
    where
        F: Fn(Branches) -> (CMatrix, CMatrix) + Sync,
    {
        let layout = runner.layout();
        let k = subspace.len();
        if k == 0 {
            return Err(Error::InvalidArgument("empty subspace".into()));
        }
        for &(na, nb) in subspace {
            if na >= layout.dim_a || nb >= layout.dim_b {
                return Err(Error::InvalidArgument(format!("|{na},{nb}⟩ outside layout {layout:?}")));
            }
        }
        let cav_index: Vec<usize> = subspace.iter().map(|&(na, nb)| na * layout.dim_b + nb).collect();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut inputs: Vec<Vec<(usize, C64)>> = (0..k).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect();
        for i in 0..k {
            for j in i + 1..k {
                inputs.push(vec![(i, C64::new(h, 0.0)), (j, C64::new(h, 0.0))]);
                inputs.push(vec![(i, C64::new(h, 0.0)), (j, C64::new(0.0, h))]);
            }
        }
        let outputs = par::try_map(&inputs, |comps| -> Result<(CMatrix, CMatrix, f64, bool)> {
            let mut psi = CVector::zeros(layout.dim());
            for &(i, c) in comps {
                let (na, nb) = subspace[i];
                psi[layout.index(na, nb, 0)] = c;
            }
            let b = runner.run_pure(&psi)?;
            let trunc = b.truncation;
            let (p, f) = split(b);
            let restrict = |m: &CMatrix| CMatrix::from_fn(k, k, |r, c| m[(cav_index[r], cav_index[c])]);
            let total = (&p + &f).trace().re;
            let (rp, rf) = (restrict(&p), restrict(&f));
            let leak = total - (&rp + &rf).trace().re;
            Ok((rp, rf, leak, trunc))
        })?;
        let mut pass = CMatrix::zeros(k * k, k * k);
        let mut flag = CMatrix::zeros(k * k, k * k);
        let mut leakage: f64 = 0.0;
        let mut truncation = false;
        for o in &outputs {
            leakage = leakage.max(o.2.abs());
            truncation |= o.3;
        }
        let set_column = |target: &mut CMatrix, i: usize, j: usize, m: &CMatrix| {
            for r in 0..k {
                for c in 0..k {
                    target[(r * k + c, i * k + j)] = m[(r, c)];
                }
            }
        };
        for i in 0..k {
            set_column(&mut pass, i, i, &outputs[i].0);
            set_column(&mut flag, i, i, &outputs[i].1);
        }
        let mut idx = k;
        let w = C64::new(0.5, 0.5);
        for i in 0..k {
            for j in i + 1..k {
                for (target, sel) in [(&mut pass, 0usize), (&mut flag, 1usize)] {
                    let get = |o: &(CMatrix, CMatrix, f64, bool)| if sel == 0 { o.0.clone() } else { o.1.clone() };
                    let plus = get(&outputs[idx]);
                    let plus_i = get(&outputs[idx + 1]);
                    let diag = get(&outputs[i]) + get(&outputs[j]);
                    let eij = &plus + &plus_i * C64::new(0.0, 1.0) - &diag * w;
                    let eji = &plus - &plus_i * C64::new(0.0, 1.0) - &diag * w.conj();
                    set_column(target, i, j, &eij);
                    set_column(target, j, i, &eji);
                }
                idx += 2;
            }
        }
        Ok(Self { subspace: subspace.to_vec(), pass, flag, leakage, truncation, duration: 0.0, logical_phase: 0.0 })
    }

    /// Reads the phase the pass branch imprints on the |1,0⟩⟨0,1| coherence
    /// and undoes it with a Z rotation on the output.
    fn remove_logical_phase(&mut self) {
        let (Ok(i10), Ok(i01)) = (self.index_of((1, 0)), self.index_of((0, 1))) else {
            return;
        };
        let k = self.dim();
        let c = self.pass[(i10 * k + i01, i10 * k + i01)];
        if c.norm() == 0.0 {
            return;
        }
        let phi = c.arg();
        let u = |x: usize| if x == i01 { C64::from_polar(1.0, phi) } else { C64::new(1.0, 0.0) };
        for r in 0..k {
            for col in 0..k {
                let f = u(r) * u(col).conj();
                let mut row = self.pass.row_mut(r * k + col);
                row *= f;
            }
        }
        self.logical_phase = phi;
    }

    pub fn dim(&self) -> usize {
        self.subspace.len()
    }

    fn apply(map: &CMatrix, rho: &CMatrix) -> CMatrix {
        let k = rho.nrows();
        let v = CVector::from_iterator(k * k, (0..k * k).map(|x| rho[(x / k, x % k)]));
        let out = map * v;
        CMatrix::from_fn(k, k, |r, c| out[r * k + c])
    }

    pub fn apply_pass(&self, rho: &CMatrix) -> CMatrix {
        Self::apply(&self.pass, rho)
    }

    pub fn apply_flag(&self, rho: &CMatrix) -> CMatrix {
        Self::apply(&self.flag, rho)
    }

    pub fn apply_total(&self, rho: &CMatrix) -> CMatrix {
        self.apply_pass(rho) + self.apply_flag(rho)
    }

    pub(crate) fn index_of(&self, p: (usize, usize)) -> Result<usize> {
        self.subspace
            .iter()
            .position(|&s| s == p)
            .ok_or_else(|| Error::InvalidArgument(format!("channel subspace lacks |{},{}⟩", p.0, p.1)))
    }

    /// Input with pure state on the subspace.
    pub fn pure_input(v: &CVector) -> CMatrix {
        v * v.adjoint()
    }

    /// Ideal cavity swap |1,0⟩ ↔ |0,1⟩ on the subspace.
    fn swap(&self, rho: &CMatrix) -> Result<CMatrix> {
        let k = self.dim();
        let (i10, i01) = (self.index_of((1, 0))?, self.index_of((0, 1))?);
        let perm = |x: usize| {
            if x == i10 {
                i01
            } else if x == i01 {
                i10
            } else {
                x
            }
        };
        Ok(CMatrix::from_fn(k, k, |r, c| rho[(perm(r), perm(c))]))
    }

    /// Fidelity to a code-space target, post-selected on the single-photon
    /// manifold, together with that manifold's population.
    pub(crate) fn logical_fidelity(&self, rho: &CMatrix, target: &CVector) -> Result<(f64, f64)> {
        let (i10, i01) = (self.index_of((1, 0))?, self.index_of((0, 1))?);
        let p1 = rho[(i10, i10)].re + rho[(i01, i01)].re;
        let f = (target.adjoint() * rho * target)[(0, 0)].re;
        Ok((if p1 > 0.0 { f / p1 } else { 0.0 }, p1))
    }
}

/// One check averaged over the six cardinal states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCheckRates {
    /// Mean probability of a flag.
    pub p_flag: f64,
    /// Mean post-selected fidelity of the passing branch.
    pub mean_fidelity: f64,
    /// (3/2)(1 − F̄).
    pub p_pauli: f64,
}

impl CheckChannel {
    pub fn single_check_rates(&self) -> Result<SingleCheckRates> {
        let mut p_flag = 0.0;
        let mut fid = 0.0;
        for &l in &DualRailLabel::ALL {
            let psi = cardinal_on_subspace(l, &self.subspace)?;
            let rho = Self::pure_input(&psi);
            p_flag += self.apply_flag(&rho).trace().re;
            fid += self.logical_fidelity(&self.apply_pass(&rho), &psi)?.0;
        }
        let m = DualRailLabel::ALL.len() as f64;
        let mean_fidelity = (fid / m).clamp(0.0, 1.0);
        Ok(SingleCheckRates { p_flag: p_flag / m, mean_fidelity, p_pauli: pauli_rate_from_fidelity(mean_fidelity)? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatedCheckTrace {
    pub label: DualRailLabel,
    pub echo: bool,
    pub n: Vec<usize>,
    /// Probability of passing all n checks.
    pub success: Vec<f64>,
    /// Post-selected fidelity to the ideal output.
    pub fidelity: Vec<f64>,
    /// Unconditioned |0,0⟩ population.
    pub p00: Vec<f64>,
}

/// Runs 0..=n_max checks on one cardinal state. With `echo` a cavity swap
/// follows check ⌊n/2⌋ (before the first check when n = 0), so the target
/// is X_L|ψ⟩.
pub fn repeated_check_experiment(channel: &CheckChannel, label: DualRailLabel, n_max: usize, echo: bool) -> Result<RepeatedCheckTrace> {
    let psi = cardinal_on_subspace(label, &channel.subspace)?;
    let target = if echo { cardinal_on_subspace(label.flipped(), &channel.subspace)? } else { psi.clone() };
    let rho0 = CheckChannel::pure_input(&psi);
    let i00 = channel.index_of((0, 0)).ok();
    let ns: Vec<usize> = (0..=n_max).collect();
    let rows = par::try_map(&ns, |&n| -> Result<(f64, f64, f64)> {
        let mut pass = rho0.clone();
        let mut total = rho0.clone();
        for k in 0..=n {
            if echo && k == n / 2 {
                pass = channel.swap(&pass)?;
                total = channel.swap(&total)?;
            }
            if k < n {
                pass = channel.apply_pass(&pass);
                total = channel.apply_total(&total);
            }
        }
        let success = pass.trace().re;
        let (fid, _) = channel.logical_fidelity(&pass, &target)?;
        let p00 = i00.map_or(0.0, |i| total[(i, i)].re);
        Ok((success, fid, p00))
    })?;
    Ok(RepeatedCheckTrace {
        label,
        echo,
        n: ns,
        success: rows.iter().map(|r| r.0).collect(),
        fidelity: rows.iter().map(|r| r.1).collect(),
        p00: rows.iter().map(|r| r.2).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub p_fn: f64,
    pub p_fp: f64,
    pub p_erasure: f64,
    pub p_intrinsic: f64,
    pub p_pauli: f64,
    /// Post-selected fidelity of each cardinal state after one check, in
    /// `DualRailLabel::ALL` order.
    pub fidelities: Vec<f64>,
    pub n_max: usize,
    pub echo: bool,
    pub check_duration: f64,
}

/// Per-check rates from repeated checks on the six cardinal states:
/// erasure from the decay of the pass probability, intrinsic erasure from
/// the unconditioned |0,0⟩ growth, Pauli from the slope of (3/2)(1 − F̄)
/// over n ∈ [1, 20], false negatives from a |0,0⟩ input.
pub fn error_budget(channel: &CheckChannel, n_max: usize, echo: bool) -> Result<ErrorBudget> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("error budget needs n_max >= 2".into()));
    }
    let traces = DualRailLabel::ALL
        .iter()
        .map(|&l| repeated_check_experiment(channel, l, n_max, echo))
        .collect::<Result<Vec<_>>>()?;
    let m = traces.len() as f64;
    let ns: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    let mean = |f: &dyn Fn(&RepeatedCheckTrace, usize) -> f64, n: usize| traces.iter().map(|t| f(t, n)).sum::<f64>() / m;
    let neg_ln_success: Vec<f64> = (0..=n_max).map(|n| -mean(&|t, n| t.success[n], n).ln()).collect();
    let neg_ln_survive: Vec<f64> = (0..=n_max).map(|n| -(1.0 - mean(&|t, n| t.p00[n], n)).ln()).collect();
    let (s_erasure, _) = linear_fit(&ns, &neg_ln_success)?;
    let (s_intrinsic, _) = linear_fit(&ns, &neg_ln_survive)?;
    let p_erasure = 1.0 - (-s_erasure).exp();
    let p_intrinsic = 1.0 - (-s_intrinsic).exp();
    let n_hi = n_max.min(20);
    let pauli_n: Vec<f64> = (1..=n_hi).map(|n| n as f64).collect();
    let pauli_y = (1..=n_hi)
        .map(|n| pauli_rate_from_fidelity(mean(&|t, n| t.fidelity[n], n).clamp(0.0, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let p_pauli = if n_hi >= 2 { linear_fit(&pauli_n, &pauli_y)?.0 } else { pauli_y[0] };
    let p_fn = false_negative_rate(channel)?;
    // After one check without echo.
    let fidelities = DualRailLabel::ALL
        .iter()
        .map(|&l| {
            let psi = cardinal_on_subspace(l, &channel.subspace)?;
            let out = channel.apply_pass(&CheckChannel::pure_input(&psi));
            Ok(channel.logical_fidelity(&out, &psi)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorBudget {
        p_fn,
        p_fp: p_erasure - p_intrinsic,
        p_erasure,
        p_intrinsic,
        p_pauli,
        fidelities,
        n_max,
        echo,
        check_duration: channel.duration,
    })
}

/// P(pass | cavities remain in |0,0⟩) for a |0,0⟩ input.
pub fn false_negative_rate(channel: &CheckChannel) -> Result<f64> {
    let k = channel.dim();
    let i00 = channel.index_of((0, 0))?;
    let mut rho = CMatrix::zeros(k, k);
    rho[(i00, i00)] = C64::new(1.0, 0.0);
    let pass = channel.apply_pass(&rho)[(i00, i00)].re;
    let total = channel.apply_total(&rho)[(i00, i00)].re;
    Ok(if total > 0.0 { pass / total } else { 0.0 })
}
