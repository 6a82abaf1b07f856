use std::f64::consts::PI;

use dualrail::fit::{golden_max, linear_fit, nelder_mead, polyfit, power_law_fit, NelderMeadOptions};
use dualrail::hilbert::ModeLayout;
use dualrail::studies::{fit_rabi, predicted_rabi_rate, shared_exponent_fit, spectroscopy_input, Probe};
use dualrail::spin::larmor_frequency;
use proptest::prelude::*;

proptest! {
    #[test]
    fn rabi_fit_recovers_synthetic_rate(kappa in 1.0f64..6.0, b in 0.2f64..1.0) {
        let amps: Vec<f64> = (0..41).map(|i| 2.0 * i as f64 / 40.0).collect();
        let p: Vec<f64> = amps.iter().map(|a| b * (1.0 - (kappa * a).cos())).collect();
        let fit = fit_rabi(&amps, &p, 10.0, 0.05).unwrap().unwrap();
        prop_assert!((fit.kappa - kappa).abs() < 1e-6 * kappa);
        prop_assert!((fit.contrast - b).abs() < 1e-6);
    }
}

#[test]
fn rabi_fit_reports_null_lines() {
    let amps: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    let flat = vec![1e-4; 20];
    assert!(fit_rabi(&amps, &flat, 10.0, 0.05).unwrap().is_none());
    assert!(fit_rabi(&amps[..3], &flat[..3], 10.0, 0.05).is_err());
}

#[test]
fn rabi_rates_are_larmor_projections() {
    let chi = -2.0 * PI;
    for g in [0.0, 0.5, 1.0, 3.0] {
        let w = larmor_frequency(g, chi);
        let r0 = predicted_rabi_rate(0, g, chi).unwrap();
        let r1 = predicted_rabi_rate(-1, g, chi).unwrap();
        assert!((r0 * r0 + r1 * r1 - 1.0).abs() < 1e-12);
        assert!((r1 - 0.5 * chi.abs() / w).abs() < 1e-12);
    }
    assert!(predicted_rabi_rate(1, 1.0, chi).is_err());
}

#[test]
fn shared_exponent_fit_recovers_slope() {
    let groups: Vec<(Vec<f64>, Vec<f64>)> = [0.5, 2.0, 7.0]
        .iter()
        .map(|&c| {
            let x = vec![1.0, 2.0, 3.0, 5.0];
            let y = x.iter().map(|v: &f64| c * v.powf(-3.2)).collect();
            (x, y)
        })
        .collect();
    let (p, offsets) = shared_exponent_fit(&groups).unwrap();
    assert!((p + 3.2).abs() < 1e-12);
    for (o, c) in offsets.iter().zip([0.5f64, 2.0, 7.0]) {
        assert!((o - c.ln()).abs() < 1e-12);
    }
    assert!(shared_exponent_fit(&[(vec![1.0, 2.0], vec![1.0, -1.0])]).is_err());
}

#[test]
fn probe_linewidth_matches_rabi_lineshape() {
    let chi = -2.0 * PI * 1.066;
    let probe = Probe::pi_pulse(chi, 20.0);
    assert!((probe.amplitude * probe.duration - PI / 2.0).abs() < 1e-12);
    let h = probe.half_linewidth();
    // Independent check: P(δ) = Ω²/(Ω²+δ²) sin²(√(Ω²+δ²) T/2) with ΩT = π.
    let w = PI / probe.duration;
    let r = w.hypot(h);
    let p = (w / r).powi(2) * (0.5 * r * probe.duration).sin().powi(2);
    assert!((p - 0.5).abs() < 1e-9);
    // The π-pulse line has HWHM ≈ 0.799 π / T.
    assert!((h * probe.duration / PI - 0.7989).abs() < 1e-3);
}

#[test]
fn spectroscopy_inputs_are_normalized_binomials() {
    let l = ModeLayout { dim_a: 5, dim_b: 5, dim_q: 2 };
    for n in 0..=4 {
        let v = spectroscopy_input(n, l);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }
    let v = spectroscopy_input(2, l);
    assert!((v[l.index(1, 1, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn fitting_helpers() {
    let x = [1.0, 2.0, 4.0, 8.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
    let (p, c) = power_law_fit(&x, &y).unwrap();
    assert!(power_law_fit(&[1.0, 2.0], &[1.0, 0.0]).is_err());
    assert!((p + 1.5).abs() < 1e-12 && (c - 3.0).abs() < 1e-12);
    let (s, i) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
    assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
    let q = polyfit(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 5.0, 10.0], 2).unwrap();
    assert!((q[0] - 1.0).abs() < 1e-10 && q[1].abs() < 1e-10 && (q[2] - 1.0).abs() < 1e-10);
    let (xm, fm) = golden_max(|t| -(t - 0.3).powi(2) + 2.0, -1.0, 1.0, 1e-10, 200);
    // A flat peak resolves x only to about √ε·|f|.
    assert!((xm - 0.3).abs() < 1e-7 && (fm - 2.0).abs() < 1e-12);
}

#[test]
fn nelder_mead_respects_bounds() {
    let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
    let opts = NelderMeadOptions { max_iter: 5000, target_cost: 1e-14, ..Default::default() };
    let r = nelder_mead(rosen, &[-1.2, 1.0], &[0.1, 0.1], &[-2.0, -2.0], &[2.0, 2.0], &opts);
    assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
    // Optimum outside the box lands on the boundary.
    let r = nelder_mead(|x: &[f64]| (x[0] - 5.0).powi(2), &[0.0], &[0.5], &[-1.0], &[1.0], &NelderMeadOptions::default());
    assert!((r.x[0] - 1.0).abs() < 1e-6);
    assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
}
