//! Small numerical helpers shared by the fits and studies: least squares,
//! 1-D bracketed searches and a bounded Nelder–Mead.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordinary least squares y ≈ Σ_k β_k φ_k(x) given a design matrix.
pub fn least_squares(design: &DMatrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    if design.nrows() != y.len() || design.nrows() < design.ncols() {
        return Err(Error::Fit(format!(
            "least squares needs at least {} points, got {}",
            design.ncols(),
            y.len()
        )));
    }
    let svd = design.clone().svd(true, true);
    let beta = svd
        .solve(&DVector::from_column_slice(y), 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    Ok(beta.iter().copied().collect())
}

/// Straight line fit, returning (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let design = DMatrix::from_fn(x.len(), 2, |r, c| if c == 0 { x[r] } else { 1.0 });
    let b = least_squares(&design, y)?;
    Ok((b[0], b[1]))
}

/// Polynomial coefficients c_0..c_deg (lowest first).
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let design = DMatrix::from_fn(x.len(), degree + 1, |r, c| x[r].powi(c as i32));
    least_squares(&design, y)
}

/// Power law y = a·x^p fitted in log space; returns (p, a).
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (p, c) = linear_fit(&lx, &ly)?;
    Ok((p, c.exp()))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on [a, b]; returns (x, f(x)).
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() < tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), a, b, tol, max_iter);
    (x, -v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop once the best cost falls below this value.
    pub target_cost: f64,
    /// Stop once every simplex edge is shorter than this, relative to the step.
    pub x_tol: f64,
    /// Stop once the spread of costs across the simplex falls below this.
    pub f_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iter: 2000, target_cost: 1e-7, x_tol: 1e-9, f_tol: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub cost: f64,
    /// Best cost after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Nelder–Mead with every trial point clipped into the box [lower, upper].
/// Non-finite costs are treated as +∞.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], lower: &[f64], upper: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let clip = |x: &mut Vec<f64>| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut p = x0.to_vec();
    clip(&mut p);
    let f0 = eval(&p, &mut evaluations);
    simplex.push((p.clone(), f0));
    let mut trace = vec![f0];
    if f0 < opts.target_cost {
        return NelderMeadResult { x: p, cost: f0, trace, iterations: 0, evaluations };
    }
    for i in 0..n {
        let mut v = p.clone();
        v[i] += steps[i];
        if v[i] > upper[i] {
            v[i] = p[i] - steps[i];
        }
        clip(&mut v);
        let fv = eval(&v, &mut evaluations);
        simplex.push((v, fv));
    }
    let scale: Vec<f64> = steps.iter().map(|s| s.abs().max(f64::MIN_POSITIVE)).collect();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        if best < opts.target_cost {
            break;
        }
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).zip(&scale).map(|((a, b), s)| (a - b).abs() / s))
            .fold(0.0, f64::max);
        let spread = simplex[n].1 - best;
        if size < opts.x_tol || (spread.is_finite() && spread < opts.f_tol) {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> =
            (0..n).map(|i| simplex[..n].iter().map(|(v, _)| v[i]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let point = |t: f64| {
            let mut v: Vec<f64> = (0..n).map(|i| centroid[i] + t * (worst.0[i] - centroid[i])).collect();
            clip(&mut v);
            v
        };
        let xr = point(-1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < simplex[0].1 {
            let xe = point(-2.0);
            let fe = eval(&xe, &mut evaluations);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = point(-0.5);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            } else {
                let xc = point(0.5);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        v[i] = b[i] + 0.5 * (v[i] - b[i]);
                    }
                    *fv = eval(v, &mut evaluations);
                }
            }
        }
        let best_now = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        trace.push(best_now.min(*trace.last().unwrap()));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, cost) = simplex.swap_remove(0);
    NelderMeadResult { x, cost, trace, iterations, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &NelderMeadOptions { target_cost: 1e-14, x_tol: 1e-12, f_tol: 0.0, ..Default::default() },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn bounds_are_respected() {
        let r = nelder_mead(|x| (x[0] - 3.0).powi(2), &[0.0], &[0.5], &[-1.0], &[1.0], &NelderMeadOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, _) = golden_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
