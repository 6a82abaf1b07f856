//! Schrödinger and Lindblad propagation of a `DriveSchedule`.
//!
//! Operators are assembled densely and then compiled to coordinate lists for
//! the right-hand side. Propagation happens in the frame rotating with the
//! common transmon-drive detuning; states are rotated back at every sample.

mod noise;
pub mod ode;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use noise::{collapse_operators, Collapse, CollapseSet, NoiseParams};
use ode::{Dopri5, OdeOptions, OdeStats};

use crate::error::{Error, Result};
use crate::hilbert::{build_mode_operators, hermitize, CMatrix, CVector, MixedState, ModeLayout, PureState, State, C64, I};
use crate::pulses::{DriveSchedule, HamiltonianTerms, Kick};

pub const TRUNCATION_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Use exact exponentials on stretches where the Hamiltonian is constant
    /// in the drive frame (closed evolution only).
    pub exact_flat_segments: bool,
    /// Flag population on the top Fock level. Compact layouts that hold a
    /// conserved manifold exactly switch this off.
    pub monitor_truncation: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, max_step: f64::INFINITY, exact_flat_segments: true, monitor_truncation: true }
    }
}

impl EvolveOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, max_step: self.max_step, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub truncation: bool,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectories hold at least one sample")
    }
}

/// Sparse matrix whose entries are linear in the two drive coefficients:
/// value = w0 + w1 c_bs + w2 c_bs* + w3 c_d + w4 c_d*.
#[derive(Clone, Debug)]
struct DrivenOperator {
    rows: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<[C64; 5]>,
}

impl DrivenOperator {
    fn compile(parts: [&CMatrix; 5]) -> Self {
        let d = parts[0].nrows();
        let mut map: BTreeMap<(usize, usize), [C64; 5]> = BTreeMap::new();
        for (k, m) in parts.iter().enumerate() {
            for c in 0..d {
                for r in 0..d {
                    let v = m[(r, c)];
                    if v != C64::new(0.0, 0.0) {
                        map.entry((r, c)).or_insert([C64::new(0.0, 0.0); 5])[k] += v;
                    }
                }
            }
        }
        let mut rows = Vec::with_capacity(map.len());
        let mut cols = Vec::with_capacity(map.len());
        let mut weights = Vec::with_capacity(map.len());
        for ((r, c), w) in map {
            rows.push(r);
            cols.push(c);
            weights.push(w);
        }
        Self { rows, cols, weights }
    }

    fn values(&self, c_bs: C64, c_d: C64, out: &mut Vec<C64>) {
        let k = [C64::new(1.0, 0.0), c_bs, c_bs.conj(), c_d, c_d.conj()];
        out.clear();
        out.extend(self.weights.iter().map(|w| w[0] + w[1] * k[1] + w[2] * k[2] + w[3] * k[3] + w[4] * k[4]));
    }
}

#[derive(Clone, Debug)]
struct SparseOp {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != C64::new(0.0, 0.0) {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        Self { entries }
    }
}

/// A schedule compiled against a layout and collapse set.
pub struct Propagator {
    schedule: DriveSchedule,
    layout: ModeLayout,
    terms: HamiltonianTerms,
    /// −i H_eff with H_eff = H − (i/2) Σ L†L, in the drive frame.
    generator: DrivenOperator,
    jumps: Vec<SparseOp>,
    frame: f64,
    upper: Vec<bool>,
    opts: EvolveOptions,
}

impl Propagator {
    pub fn new(schedule: &DriveSchedule, layout: ModeLayout, collapse: &CollapseSet, opts: EvolveOptions) -> Result<Self> {
        schedule.validate()?;
        if layout.dim_q < schedule.variant.dim_q() {
            return Err(Error::Layout(format!("{:?} drive needs a {}-level ancilla", schedule.variant, schedule.variant.dim_q())));
        }
        for c in &collapse.entries {
            layout.require_same(&c.operator.layout())?;
        }
        let ops = build_mode_operators(layout)?;
        let terms = HamiltonianTerms::new(schedule, &ops)?;
        let frame = schedule.common_detuning().unwrap_or(0.0);
        let jump_mats = collapse.jump_matrices();
        let d = layout.dim();
        let mut s = &terms.static_part - &terms.upper_projector * C64::new(frame, 0.0);
        let mut loss = CMatrix::zeros(d, d);
        for l in &jump_mats {
            loss += l.adjoint() * l;
        }
        s -= loss * C64::new(0.0, 0.5);
        let mi = C64::new(0.0, -1.0);
        let generator = DrivenOperator::compile([
            &(s * mi),
            &(&terms.bs * mi),
            &(terms.bs.adjoint() * mi),
            &(&terms.drive * mi),
            &(terms.drive.adjoint() * mi),
        ]);
        let upper_level = schedule.variant.upper().index();
        let upper = (0..d).map(|i| layout.decompose(i).2 == upper_level).collect();
        Ok(Self {
            schedule: schedule.clone(),
            layout,
            terms,
            generator,
            jumps: jump_mats.iter().map(SparseOp::from_dense).collect(),
            frame,
            upper,
            opts,
        })
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn duration(&self) -> f64 {
        self.schedule.duration
    }

    fn validate_samples(&self, samples: &[f64]) -> Result<()> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty sample grid".into()));
        }
        if samples.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("sample times must be nondecreasing".into()));
        }
        if samples[0] < -1e-12 || *samples.last().unwrap() > self.schedule.duration + 1e-9 {
            return Err(Error::TimeOutOfRange { t: *samples.last().unwrap(), duration: self.schedule.duration });
        }
        Ok(())
    }

    /// Event times: breakpoints, kicks and samples, with the kicks due at each.
    fn timeline(&self, samples: &[f64]) -> Vec<f64> {
        let mut pts = self.schedule.breakpoints();
        pts.extend(samples.iter().map(|&t| t.clamp(0.0, self.schedule.duration)));
        pts.extend(self.schedule.kicks().iter().map(|(t, _)| *t));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }

    /// Kick unitary in the drive frame.
    fn kick_matrix(&self, t: f64, kick: &Kick) -> CMatrix {
        let d = self.layout.dim();
        let upper = self.schedule.variant.upper().index();
        let phase = (kick.detuning - self.frame) * t + kick.phase;
        let (s, c) = (kick.angle / 2.0).sin_cos();
        let mut k = CMatrix::identity(d, d);
        for i in 0..d {
            let (na, nb, q) = self.layout.decompose(i);
            if q == 0 {
                let u = self.layout.index(na, nb, upper);
                k[(i, i)] = C64::new(c, 0.0);
                k[(u, u)] = C64::new(c, 0.0);
                k[(i, u)] = -I * s * C64::from_polar(1.0, phase);
                k[(u, i)] = -I * s * C64::from_polar(1.0, -phase);
            }
        }
        k
    }

    fn truncated(&self, populations: impl Fn(usize) -> f64) -> bool {
        if !self.opts.monitor_truncation {
            return false;
        }
        let l = self.layout;
        let edge: f64 = (0..l.dim())
            .filter(|&i| {
                let (na, nb, _) = l.decompose(i);
                na == l.dim_a - 1 || nb == l.dim_b - 1
            })
            .map(populations)
            .sum();
        edge > TRUNCATION_THRESHOLD
    }

    /// Pure-state propagation; returns lab-frame amplitudes at every sample.
    pub fn run_pure(&self, psi0: &CVector, samples: &[f64]) -> Result<(Vec<CVector>, bool)> {
        self.validate_samples(samples)?;
        let d = self.layout.dim();
        let mut y: Vec<C64> = psi0.iter().copied().collect();
        let mut out = Vec::with_capacity(samples.len());
        let mut truncated = false;
        let kicks = self.schedule.kicks();
        let mut kick_idx = 0;
        let mut sample_idx = 0;
        let mut solver = Dopri5::new(d);
        let mut stats = OdeStats::default();
        let mut vals = Vec::new();
        let gen = &self.generator;
        let sched = &self.schedule;
        let frame = self.frame;
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            let c = sched.coefficients(t, frame);
            gen.values(c.c_bs, c.c_d, &mut vals);
            dy.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for (k, v) in vals.iter().enumerate() {
                dy[gen.rows[k]] += v * y[gen.cols[k]];
            }
        };
        let timeline = self.timeline(samples);
        let mut t_prev = 0.0;
        for &t in &timeline {
            if t > t_prev {
                if self.opts.exact_flat_segments && sched.is_flat_between(t_prev, t) {
                    self.exact_step(&mut y, t_prev, t)?;
                } else {
                    rhs_integrate(&mut solver, &mut rhs, t_prev, t, &mut y, &self.opts.ode(), &mut stats)?;
                }
                t_prev = t;
            }
            while kick_idx < kicks.len() && kicks[kick_idx].0 <= t + 1e-12 {
                let k = self.kick_matrix(kicks[kick_idx].0, &kicks[kick_idx].1);
                let v = CVector::from_column_slice(&y);
                y.copy_from_slice((k * v).as_slice());
                kick_idx += 1;
            }
            while sample_idx < samples.len() && samples[sample_idx] <= t + 1e-12 {
                let v = self.to_lab_vector(&y, samples[sample_idx]);
                truncated |= self.truncated(|i| v[i].norm_sqr());
                out.push(v);
                sample_idx += 1;
            }
        }
        if truncated {
            log::warn!("population above {TRUNCATION_THRESHOLD:e} on the top Fock level; enlarge the truncation");
        }
        Ok((out, truncated))
    }

    fn exact_step(&self, y: &mut [C64], t0: f64, t1: f64) -> Result<()> {
        let c = self.schedule.coefficients(0.5 * (t0 + t1), self.frame);
        let mut h = &self.terms.static_part - &self.terms.upper_projector * C64::new(self.frame, 0.0);
        h += &self.terms.bs * c.c_bs + self.terms.bs.adjoint() * c.c_bs.conj();
        h += &self.terms.drive * c.c_d + self.terms.drive.adjoint() * c.c_d.conj();
        hermitize(&mut h);
        let eig = h.symmetric_eigen();
        let v = &eig.eigenvectors;
        let dt = t1 - t0;
        let psi = CVector::from_column_slice(y);
        let mut coef = v.adjoint() * psi;
        for (k, z) in coef.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -eig.eigenvalues[k] * dt);
        }
        let out = v * coef;
        y.copy_from_slice(out.as_slice());
        Ok(())
    }

    fn to_lab_vector(&self, y: &[C64], t: f64) -> CVector {
        let rot = C64::from_polar(1.0, -self.frame * t);
        CVector::from_iterator(
            y.len(),
            y.iter().zip(&self.upper).map(|(z, &u)| if u { z * rot } else { *z }),
        )
    }

    /// Density-matrix propagation of any Hermitian operator; no positivity or
    /// trace checks, so basis operators of a channel can be pushed through.
    pub fn run_operator(&self, rho0: &CMatrix, samples: &[f64]) -> Result<(Vec<CMatrix>, bool)> {
        self.validate_samples(samples)?;
        let d = self.layout.dim();
        // Row-major storage.
        let mut y: Vec<C64> = (0..d * d).map(|k| rho0[(k / d, k % d)]).collect();
        let mut out = Vec::with_capacity(samples.len());
        let mut truncated = false;
        let kicks = self.schedule.kicks();
        let mut kick_idx = 0;
        let mut sample_idx = 0;
        let mut solver = Dopri5::new(d * d);
        let mut stats = OdeStats::default();
        let mut vals = Vec::new();
        let gen = &self.generator;
        let jumps = &self.jumps;
        let sched = &self.schedule;
        let frame = self.frame;
        let mut x = vec![C64::new(0.0, 0.0); d * d];
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            let c = sched.coefficients(t, frame);
            gen.values(c.c_bs, c.c_d, &mut vals);
            x.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            // X = −i H_eff ρ
            for (k, v) in vals.iter().enumerate() {
                let r = gen.rows[k] * d;
                let c0 = gen.cols[k] * d;
                let (xr, yc) = (&mut x[r..r + d], &y[c0..c0 + d]);
                for j in 0..d {
                    xr[j] += v * yc[j];
                }
            }
            // dρ = X + X† + Σ L ρ L†
            for r in 0..d {
                for c in 0..d {
                    dy[r * d + c] = x[r * d + c] + x[c * d + r].conj();
                }
            }
            for l in jumps {
                for &(r1, c1, v1) in &l.entries {
                    for &(r2, c2, v2) in &l.entries {
                        dy[r1 * d + r2] += v1 * v2.conj() * y[c1 * d + c2];
                    }
                }
            }
        };
        let timeline = self.timeline(samples);
        let mut t_prev = 0.0;
        for &t in &timeline {
            if t > t_prev {
                rhs_integrate(&mut solver, &mut rhs, t_prev, t, &mut y, &self.opts.ode(), &mut stats)?;
                t_prev = t;
            }
            while kick_idx < kicks.len() && kicks[kick_idx].0 <= t + 1e-12 {
                let k = self.kick_matrix(kicks[kick_idx].0, &kicks[kick_idx].1);
                let m = CMatrix::from_row_slice(d, d, &y);
                let m = &k * m * k.adjoint();
                for r in 0..d {
                    for c in 0..d {
                        y[r * d + c] = m[(r, c)];
                    }
                }
                kick_idx += 1;
            }
            while sample_idx < samples.len() && samples[sample_idx] <= t + 1e-12 {
                let m = self.to_lab_matrix(&y, samples[sample_idx]);
                truncated |= self.truncated(|i| m[(i, i)].re);
                out.push(m);
                sample_idx += 1;
            }
        }
        if truncated {
            log::warn!("population above {TRUNCATION_THRESHOLD:e} on the top Fock level; enlarge the truncation");
        }
        Ok((out, truncated))
    }

    fn to_lab_matrix(&self, y: &[C64], t: f64) -> CMatrix {
        let d = self.layout.dim();
        let rot = C64::from_polar(1.0, -self.frame * t);
        CMatrix::from_fn(d, d, |r, c| {
            let z = y[r * d + c];
            match (self.upper[r], self.upper[c]) {
                (true, false) => z * rot,
                (false, true) => z * rot.conj(),
                _ => z,
            }
        })
    }
}

fn rhs_integrate<F>(solver: &mut Dopri5, f: &mut F, t0: f64, t1: f64, y: &mut [C64], opts: &OdeOptions, stats: &mut OdeStats) -> Result<()>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    solver.integrate(f, t0, t1, y, opts, stats)
}

pub fn evolve_schrodinger(schedule: &DriveSchedule, psi0: &PureState, samples: &[f64], opts: EvolveOptions) -> Result<Trajectory> {
    let layout = psi0.layout();
    let prop = Propagator::new(schedule, layout, &CollapseSet::default(), opts)?;
    let (vs, truncation) = prop.run_pure(psi0.amplitudes(), samples)?;
    let states = vs.into_iter().map(|v| State::Pure(PureState::from_raw(layout, v))).collect();
    Ok(Trajectory { times: samples.to_vec(), states, truncation })
}

/// Lindblad propagation with trace, Hermiticity and positivity checked at samples.
pub fn evolve_lindblad(
    schedule: &DriveSchedule,
    rho0: &MixedState,
    collapse: &CollapseSet,
    samples: &[f64],
    opts: EvolveOptions,
) -> Result<Trajectory> {
    let layout = rho0.layout();
    let prop = Propagator::new(schedule, layout, collapse, opts)?;
    let (ms, truncation) = prop.run_operator(rho0.matrix(), samples)?;
    let mut states = Vec::with_capacity(ms.len());
    for (t, m) in samples.iter().zip(ms) {
        let s = MixedState::from_raw(layout, m);
        let tr = s.trace();
        let herm = s.hermiticity_error();
        let lmin = s.min_eigenvalue();
        if (tr - rho0.trace()).abs() > 1e-8 || herm > 1e-10 || lmin < -1e-7 {
            return Err(Error::Integrator(format!(
                "density matrix invalid at t = {t} µs: trace {tr}, hermiticity {herm:e}, min eigenvalue {lmin:e}"
            )));
        }
        states.push(State::Mixed(s));
    }
    Ok(Trajectory { times: samples.to_vec(), states, truncation })
}

/// Evenly spaced sample grid including both endpoints.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t1],
        _ => (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Expectation traces for CSV export: `time_us` then one column per operator.
pub fn write_trajectory_csv<W: std::io::Write>(
    traj: &Trajectory,
    observables: &[(&str, &crate::hilbert::OperatorMatrix)],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time_us".to_string()];
    header.extend(observables.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![format!("{t}")];
        for (_, op) in observables {
            row.push(format!("{}", crate::hilbert::expectation(op, s)?.re));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<trajectory>".into(), source: e })?;
    Ok(())
}
