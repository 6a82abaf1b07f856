//! Dormand–Prince 5(4) with FSAL and a PI-free standard step controller.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on any single step, µs.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, max_step: f64::INFINITY, max_steps: 5_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Reusable stage storage for one problem size.
pub struct Dopri5 {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
    /// Last accepted step, reused as the next trial step.
    pub h: f64,
}

impl Dopri5 {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z.clone(),
            y_new: z,
            h: 0.0,
        }
    }

    /// Advances `y` from `t0` to `t1` on a smooth stretch of the right-hand side.
    pub fn integrate<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64], opts: &OdeOptions, stats: &mut OdeStats) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = y.len();
        let mut t = t0;
        f(t, y, &mut self.k[0]);
        stats.evaluations += 1;
        if self.h <= 0.0 {
            self.h = initial_step(y, &self.k[0], opts).min(span);
        }
        let mut h = self.h.min(opts.max_step).min(span);
        let mut steps = 0usize;
        loop {
            let remaining = t1 - t;
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            self.stages(f, t, h, y);
            stats.evaluations += 6;
            let err = self.error_norm(h, y, opts);
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integrator(format!("exceeded {} steps at t = {t} µs", opts.max_steps)));
            }
            if !err.is_finite() {
                return Err(Error::Integrator(format!("non-finite error estimate at t = {t} µs")));
            }
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    self.h = h;
                }
                if last {
                    break;
                }
                h = (h * grow).min(opts.max_step);
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * t1.abs().max(1.0) {
                    return Err(Error::Integrator(format!("step size underflow at t = {t} µs")));
                }
            }
        }
        debug_assert_eq!(y.len(), n);
        Ok(())
    }

    fn stages<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let hc = |a: f64| C64::new(h * a, 0.0);
        macro_rules! combine {
            ($($coef:expr, $idx:expr);+) => {{
                for i in 0..n {
                    let mut acc = y[i];
                    $( acc += hc($coef) * self.k[$idx][i]; )+
                    self.tmp[i] = acc;
                }
            }};
        }
        combine!(A21, 0);
        f(t + C2 * h, &self.tmp, &mut self.k[1]);
        combine!(A31, 0; A32, 1);
        f(t + C3 * h, &self.tmp, &mut self.k[2]);
        combine!(A41, 0; A42, 1; A43, 2);
        f(t + C4 * h, &self.tmp, &mut self.k[3]);
        combine!(A51, 0; A52, 1; A53, 2; A54, 3);
        f(t + C5 * h, &self.tmp, &mut self.k[4]);
        combine!(A61, 0; A62, 1; A63, 2; A64, 3; A65, 4);
        f(t + h, &self.tmp, &mut self.k[5]);
        for i in 0..n {
            self.y_new[i] = y[i]
                + hc(A71) * self.k[0][i]
                + hc(A73) * self.k[2][i]
                + hc(A74) * self.k[3][i]
                + hc(A75) * self.k[4][i]
                + hc(A76) * self.k[5][i];
        }
        f(t + h, &self.y_new, &mut self.k[6]);
    }

    fn error_norm(&self, h: f64, y: &[C64], opts: &OdeOptions) -> f64 {
        let n = y.len();
        let mut acc = 0.0;
        for i in 0..n {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let scale = opts.atol + opts.rtol * y[i].norm().max(self.y_new[i].norm());
            acc += (e.norm() / scale).powi(2);
        }
        (acc / n as f64).sqrt()
    }
}

/// Hairer's starting-step heuristic, first-order version.
fn initial_step(y: &[C64], dy: &[C64], opts: &OdeOptions) -> f64 {
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(dy) {
        let sc = opts.atol + opts.rtol * yi.norm();
        d0 += (yi.norm() / sc).powi(2);
        d1 += (fi.norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(opts.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillation_is_accurate() {
        // y' = i ω y
        let w = 3.7;
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut solver = Dopri5::new(1);
        let mut stats = OdeStats::default();
        let mut f = |_t: f64, y: &[C64], dy: &mut [C64]| dy[0] = C64::new(0.0, w) * y[0];
        solver.integrate(&mut f, 0.0, 10.0, &mut y, &OdeOptions::default(), &mut stats).unwrap();
        let exact = C64::from_polar(1.0, w * 10.0);
        assert!((y[0] - exact).norm() < 1e-8, "{:?} vs {exact:?}", y[0]);
    }
}
