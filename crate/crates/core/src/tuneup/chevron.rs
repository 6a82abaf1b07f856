use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{collapse_operators, CollapseSet, EvolveOptions, NoiseParams, Propagator};
use crate::hilbert::{CMatrix, CVector, ModeLayout, C64};
use crate::par;
use crate::pulses::{AncillaVariant, BeamsplitterDrive, Dispersive, DriveSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChevronFitResult {
    pub g_bs: f64,
    pub omega0: f64,
    pub a: f64,
    pub c: f64,
    pub phi: f64,
    pub residual_norm: f64,
    /// One-sigma parameter errors from the Gauss–Newton covariance, in the
    /// order (g_bs, omega0, a, c, phi).
    pub std_errors: [f64; 5],
    pub iterations: usize,
}

/// Bob's single-photon population on a (frequency × time) grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChevronData {
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    /// `p1[i][j]` at `freqs[i]`, `times[j]`.
    pub p1: Vec<Vec<f64>>,
}

/// A[cos²(Ωt/2+φ) + ((ω−ω0)/Ω)² sin²(Ωt/2+φ)] + c with Ω² = g² + (ω−ω0)².
pub fn chevron_model(p: &[f64; 5], omega: f64, t: f64) -> f64 {
    let [g, w0, a, c, phi] = *p;
    let d = omega - w0;
    let big = g.hypot(d);
    let x = 0.5 * big * t + phi;
    let r = if big == 0.0 { 1.0 } else { d / big };
    a * (x.cos().powi(2) + r * r * x.sin().powi(2)) + c
}

/// Starts in |0,1,g⟩ and drives the beamsplitter at detuning ω − ω0 for each
/// time. With `ramp > 0` each time is the flat hold between cosine ramps.
pub fn simulate_chevron(
    g_bs: f64,
    omega0: f64,
    times: &[f64],
    freqs: &[f64],
    noise: Option<&NoiseParams>,
    ramp: f64,
    opts: EvolveOptions,
) -> Result<ChevronData> {
    if times.is_empty() || freqs.is_empty() {
        return Err(Error::InvalidArgument("chevron grids must be nonempty".into()));
    }
    if times.iter().any(|&t| !(t >= 0.0)) || !(ramp >= 0.0) {
        return Err(Error::InvalidArgument("chevron times and ramp must be nonnegative".into()));
    }
    let layout = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let opts = EvolveOptions { monitor_truncation: false, ..opts };
    let collapse = match noise {
        Some(n) => collapse_operators(n, layout)?,
        None => CollapseSet::default(),
    };
    let mut psi = CVector::zeros(layout.dim());
    psi[layout.index(0, 1, 0)] = C64::new(1.0, 0.0);
    let rho = &psi * psi.adjoint();
    let p1_of = |m: &CMatrix| -> f64 {
        (0..layout.dim()).filter(|&i| layout.decompose(i).1 == 1).map(|i| m[(i, i)].re).sum()
    };
    let schedule = |delta: f64, hold: f64| DriveSchedule {
        beamsplitter: BeamsplitterDrive { g_bs, detuning: delta, phase: 0.0, ramp, hold },
        beamsplitter_start: 0.0,
        pulses: Vec::new(),
        variant: AncillaVariant::Ge,
        dispersive: Dispersive::ge(0.0),
        alignment_offset: 0.0,
        duration: hold + 2.0 * ramp,
    };
    let run = |s: &DriveSchedule, samples: &[f64]| -> Result<Vec<f64>> {
        let prop = Propagator::new(s, layout, &collapse, opts)?;
        if collapse.is_empty() {
            let (vs, _) = prop.run_pure(&psi, samples)?;
            Ok(vs.iter().map(|v| p1_of(&(v * v.adjoint()))).collect())
        } else {
            let (ms, _) = prop.run_operator(&rho, samples)?;
            Ok(ms.iter().map(p1_of).collect())
        }
    };
    let p1 = par::try_map(freqs, |&w| -> Result<Vec<f64>> {
        let delta = w - omega0;
        if ramp == 0.0 {
            let tmax = times.iter().copied().fold(0.0, f64::max);
            let mut order: Vec<usize> = (0..times.len()).collect();
            order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
            let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
            let vals = run(&schedule(delta, tmax), &sorted)?;
            let mut out = vec![0.0; times.len()];
            for (k, &i) in order.iter().enumerate() {
                out[i] = vals[k];
            }
            Ok(out)
        } else {
            times
                .iter()
                .map(|&t| {
                    let s = schedule(delta, t);
                    Ok(run(&s, &[s.duration])?[0])
                })
                .collect()
        }
    })?;
    Ok(ChevronData { times: times.to_vec(), freqs: freqs.to_vec(), p1 })
}

fn validate(data: &ChevronData) -> Result<f64> {
    let (nt, nf) = (data.times.len(), data.freqs.len());
    if nt < 8 || nf < 3 {
        return Err(Error::InvalidArgument(format!("chevron fit needs >= 8 times and >= 3 frequencies, got {nt} and {nf}")));
    }
    if data.p1.len() != nf || data.p1.iter().any(|row| row.len() != nt) {
        return Err(Error::InvalidArgument("chevron data shape does not match its grids".into()));
    }
    let dt = data.times[1] - data.times[0];
    if !(dt > 0.0) || data.times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::InvalidArgument("chevron fit needs a uniform increasing time grid".into()));
    }
    Ok(dt)
}

/// Peak angular frequency of a uniformly sampled trace from a zero-padded FFT.
fn dominant_frequency(y: &[f64], dt: f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let n = (16 * y.len()).next_power_of_two();
    let mut buf: Vec<C64> = y.iter().map(|v| C64::new(v - mean, 0.0)).collect();
    buf.resize(n, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<f64> = buf[..n / 2].iter().map(|z| z.norm()).collect();
    let k = (1..n / 2 - 1).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap_or(1);
    let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    2.0 * PI * (k as f64 + shift) / (n as f64 * dt)
}

fn sse(p: &[f64; 5], data: &ChevronData) -> f64 {
    let mut s = 0.0;
    for (i, &w) in data.freqs.iter().enumerate() {
        for (j, &t) in data.times.iter().enumerate() {
            s += (chevron_model(p, w, t) - data.p1[i][j]).powi(2);
        }
    }
    s
}

fn wrap_half_pi(phi: f64) -> f64 {
    let y = phi.rem_euclid(PI);
    if y > PI / 2.0 {
        y - PI
    } else {
        y
    }
}

const MAX_ITER: usize = 500;

/// Levenberg–Marquardt fit of the chevron form. The resonance starts at the
/// highest-contrast column and g_bs at that column's FFT peak.
pub fn fit_chevron(data: &ChevronData) -> Result<ChevronFitResult> {
    let dt = validate(data)?;
    let nf = data.freqs.len();
    let contrast: Vec<f64> = data
        .p1
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max) - row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let ic = (0..nf).max_by(|&a, &b| contrast[a].total_cmp(&contrast[b])).unwrap();
    let mut w0 = data.freqs[ic];
    if ic > 0 && ic + 1 < nf {
        let (a, b, c) = (contrast[ic - 1], contrast[ic], contrast[ic + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            let shift = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            w0 += shift * (data.freqs[ic + 1] - data.freqs[ic - 1]) / 2.0;
        }
    }
    let col = &data.p1[ic];
    let g0 = dominant_frequency(col, dt);
    let a0 = contrast[ic].clamp(-0.1, 1.1);
    let c0 = col.iter().copied().fold(f64::INFINITY, f64::min).clamp(-0.1, 1.1);
    let column_sse = |phi: f64| -> f64 {
        let p = [g0, w0, a0, c0, phi];
        data.times.iter().zip(col).map(|(&t, &y)| (chevron_model(&p, data.freqs[ic], t) - y).powi(2)).sum()
    };
    let phi0 = (0..64)
        .map(|k| -PI / 2.0 + PI * k as f64 / 64.0)
        .min_by(|&a, &b| column_sse(a).total_cmp(&column_sse(b)))
        .unwrap();
    let scale = [g0.abs().max(1e-3), g0.abs().max(1e-3), 1.0, 1.0, 1.0];
    let clip = |p: &mut [f64; 5]| {
        p[2] = p[2].clamp(-0.1, 1.1);
        p[3] = p[3].clamp(-0.1, 1.1);
    };
    let mut p = [g0, w0, a0, c0, phi0];
    let mut cost = sse(&p, data);
    let mut lambda = 1e-3;
    let m = nf * data.times.len();
    let residuals = |p: &[f64; 5]| -> DVector<f64> {
        DVector::from_iterator(
            m,
            data.freqs.iter().enumerate().flat_map(|(i, &w)| {
                data.times.iter().enumerate().map(move |(j, &t)| chevron_model(p, w, t) - data.p1[i][j])
            }),
        )
    };
    let jacobian = |p: &[f64; 5]| -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(m, 5);
        for k in 0..5 {
            let h = 1e-6 * p[k].abs().max(scale[k]);
            let mut hi = *p;
            let mut lo = *p;
            hi[k] += h;
            lo[k] -= h;
            let d = (residuals(&hi) - residuals(&lo)) / (2.0 * h);
            jac.set_column(k, &d);
        }
        jac
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut jtj = DMatrix::zeros(5, 5);
    while iterations < MAX_ITER {
        iterations += 1;
        let jac = jacobian(&p);
        let r = residuals(&p);
        jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..5 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&jtr)) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = p;
            for k in 0..5 {
                trial[k] += step[k];
            }
            clip(&mut trial);
            let c_new = sse(&trial, data);
            if c_new < cost {
                let small = (0..5).all(|k| (trial[k] - p[k]).abs() <= 1e-13 * p[k].abs().max(scale[k]));
                let stalled = cost - c_new <= 1e-16 * cost;
                p = trial;
                cost = c_new;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if small || stalled || cost < 1e-28 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No downhill step at any damping: a stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }
    p[0] = p[0].abs();
    p[4] = wrap_half_pi(p[4]);
    let dof = (m as f64 - 5.0).max(1.0);
    let s2 = cost / dof;
    let std_errors = match jtj.clone().try_inverse() {
        Some(cov) => std::array::from_fn(|k| (s2 * cov[(k, k)]).max(0.0).sqrt()),
        None => [f64::NAN; 5],
    };
    let result = ChevronFitResult {
        g_bs: p[0],
        omega0: p[1],
        a: p[2],
        c: p[3],
        phi: p[4],
        residual_norm: cost.sqrt(),
        std_errors,
        iterations,
    };
    if !converged {
        return Err(Error::FitNotConverged { iterations, best: Box::new(result) });
    }
    Ok(result)
}
