use std::f64::consts::PI;

use dualrail::evolver::{linspace, EvolveOptions, NoiseParams};
use dualrail::protocols::{CheckDesign, CheckParams, CheckPulse};
use dualrail::pulses::erasure_check_guess;
use dualrail::tuneup::{
    chevron_model, fit_amplitude_polynomial, fit_chevron, simulate_chevron, spectroscopy_alignment, transfer_infidelities,
    tune_gaussian_erasure_check, tune_square_erasure_check, CheckBounds, GaussianTuneConfig, TuneOptions,
};
use dualrail::units::mhz;

fn chi() -> f64 {
    -mhz(1.066)
}

#[test]
fn chevron_fit_round_trip() {
    for ratio in [0.2, 0.55, 1.0, 1.4, 2.0] {
        let g = ratio * chi().abs();
        let omega0 = 0.37;
        let times = linspace(0.0, 3.0 * 2.0 * PI / g, 61);
        let freqs = linspace(omega0 - 1.5 * g, omega0 + 1.5 * g, 15);
        let data = simulate_chevron(g, omega0, &times, &freqs, None, 0.0, EvolveOptions::default()).unwrap();
        let fit = fit_chevron(&data).unwrap();
        assert!(((fit.g_bs - g) / g).abs() < 1e-6, "g/|χ| = {ratio}: fitted {} vs {g}", fit.g_bs);
        assert!((fit.omega0 - omega0).abs() < 1e-6 * g, "ω0 {} vs {omega0}", fit.omega0);
        assert!((fit.a - 1.0).abs() < 1e-6 && fit.c.abs() < 1e-6 && fit.phi.abs() < 1e-6);
    }
}

#[test]
fn chevron_model_limits() {
    let p = [2.0, 0.5, 1.0, 0.0, 0.0];
    // On resonance the population swaps fully at Ωt = π.
    assert!((chevron_model(&p, 0.5, PI / 2.0)).abs() < 1e-15);
    // Far detuned it barely moves.
    assert!(chevron_model(&p, 500.0, 1.3) > 0.9999);
}

#[test]
fn chevron_fit_rejects_bad_grids() {
    let g = chi().abs();
    let data = simulate_chevron(g, 0.0, &linspace(0.0, 3.0, 5), &[0.0, 0.1, 0.2], None, 0.0, EvolveOptions::default()).unwrap();
    assert!(fit_chevron(&data).is_err());
    assert!(simulate_chevron(g, 0.0, &[], &[0.0], None, 0.0, EvolveOptions::default()).is_err());
}

#[test]
fn ramped_chevron_with_noise_still_fits_g() {
    let g = 0.8 * chi().abs();
    let times = linspace(0.0, 2.5 * 2.0 * PI / g, 41);
    let freqs = linspace(-1.2 * g, 1.2 * g, 9);
    let noise = NoiseParams::measured();
    let data = simulate_chevron(g, 0.0, &times, &freqs, Some(&noise), 0.05, EvolveOptions::default()).unwrap();
    let fit = fit_chevron(&data).unwrap();
    assert!(((fit.g_bs - g) / g).abs() < 1e-2, "fitted {} vs {g}", fit.g_bs);
    assert!(fit.phi.abs() > 1e-3, "ramp phase should show up in φ");
}

#[test]
fn amplitude_polynomial_recovers_coefficients() {
    let c = [1.3, -0.2, 0.05, 0.4, -0.1];
    let xs = linspace(0.0, 1.0, 30);
    let ys: Vec<f64> = xs.iter().map(|&x| c.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32 + 1)).sum()).collect();
    let fit = fit_amplitude_polynomial(&xs, &ys).unwrap();
    for (a, b) in fit.coefficients.iter().zip(&c) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert!(fit.eval(0.0) == 0.0);
    let h = 1e-6;
    assert!((fit.derivative(0.6) - (fit.eval(0.6 + h) - fit.eval(0.6 - h)) / (2.0 * h)).abs() < 1e-6);
    assert!(fit_amplitude_polynomial(&xs[..5], &ys[..5]).is_err());
}

fn square_design() -> (CheckDesign, CheckParams, CheckBounds) {
    let design = CheckDesign { bs_ramp: 0.12, pulse: CheckPulse::Square { ramp: 0.024 }, ..CheckDesign::square(chi()) };
    let mut start = CheckParams::from_guess(&erasure_check_guess(chi(), 1, 2).unwrap());
    start.amplitude = design.pi_amplitude(start.t_p);
    let bounds = CheckBounds::around(&start, chi(), mhz(2.05));
    (design, start, bounds)
}

#[test]
fn square_tune_converges_and_is_idempotent() {
    let (design, start, bounds) = square_design();
    let opts = TuneOptions::default();
    let first = tune_square_erasure_check(&design, &start, &bounds, &opts).unwrap();
    assert!(first.converged, "cost {}", first.final_cost);
    assert!(first.final_cost < first.initial_cost);
    assert!(first.cost_trace.windows(2).all(|w| w[1] <= w[0]));
    let second = tune_square_erasure_check(&design, &first.params, &bounds, &opts).unwrap();
    assert!(second.final_cost <= first.final_cost);
    let (a, b) = (first.params.to_array(), second.params.to_array());
    for k in 0..5 {
        assert!((a[k] - b[k]).abs() <= 1e-2 * a[k].abs().max(chi().abs() * 1e-3), "{}: {} vs {}", CheckParams::NAMES[k], a[k], b[k]);
    }
    let inf = transfer_infidelities(&design, &first.params, false).unwrap();
    assert_eq!(inf.len(), 3);
    assert!(inf.iter().all(|&x| (0.0..1e-5).contains(&x)));
}

#[test]
fn square_tune_from_zero_amplitude_fails() {
    let (design, mut start, _) = square_design();
    start.amplitude = 0.0;
    let bounds = CheckBounds::around(&start, chi(), mhz(2.05));
    let r = tune_square_erasure_check(&design, &start, &bounds, &TuneOptions::default()).unwrap();
    assert!(!r.converged);
    assert!(r.final_cost > 0.5);
}

#[test]
fn gaussian_tune_reaches_floor() {
    let r = tune_gaussian_erasure_check(&GaussianTuneConfig { chi: chi(), ..GaussianTuneConfig::default() }).unwrap();
    assert!(r.converged, "return infidelity {}", r.return_infidelity);
    assert!(r.p_excite_00 > 0.999, "P(e | |0,0⟩) = {}", r.p_excite_00);
    assert!(r.return_infidelity < 1e-4);
    assert!(r.params.g_bs <= mhz(2.05));
    let bad = GaussianTuneConfig { g_bs_start: 0.1 * chi().abs(), ..GaussianTuneConfig::default() };
    assert!(tune_gaussian_erasure_check(&bad).is_err());
}

#[test]
fn alignment_puts_vacuum_peak_between_logical_minima() {
    let (design, start, bounds) = square_design();
    let tuned = tune_square_erasure_check(&design, &start, &bounds, &TuneOptions::default()).unwrap();
    let det = linspace(-0.3 * chi().abs(), 0.3 * chi().abs(), 31);
    let r = spectroscopy_alignment(&design, &tuned.params, &det, &NoiseParams::none(), EvolveOptions::default()).unwrap();
    assert!(r.p_e[0].iter().copied().fold(0.0, f64::max) > 0.999);
    assert!(r.peak_00.abs() < 0.02 * chi().abs(), "peak at {}", r.peak_00);
    assert!(r.gap < 0.1 * chi().abs(), "gap {}", r.gap);
}
