use std::f64::consts::PI;

use dualrail::evolver::{evolve_schrodinger, EvolveOptions};
use dualrail::hilbert::{Level, ModeLayout, PureState, State};
use dualrail::pulses::{
    assemble_hamiltonian, erasure_check_guess, gaussian_envelope, joint_parity_schedule, parity_beamsplitter,
    square_envelope, AncillaVariant, ChoppedGaussian, Dispersive, DriveSchedule, PulseShape, SquarePulse,
};
use dualrail::hilbert::build_mode_operators;
use dualrail::error::Error;
use proptest::prelude::*;

/// Composite Simpson rule on [0, t].
fn simpson(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let h = t / n as f64;
    let mut s = f(0.0) + f(t);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn envelopes_reject_times_outside_the_window() {
    let sq = SquarePulse { amplitude: 1.0, duration: 2.0, ramp: 0.2, detuning: 0.0, phase: 0.0 };
    assert!(matches!(square_envelope(-0.1, &sq), Err(Error::TimeOutOfRange { .. })));
    assert!(matches!(square_envelope(2.1, &sq), Err(Error::TimeOutOfRange { .. })));
    assert_eq!(square_envelope(0.0, &sq).unwrap(), 0.0);
    assert_eq!(square_envelope(1.0, &sq).unwrap(), 1.0);
    let g = ChoppedGaussian { amplitude: 1.0, sigma: 0.3, n_chop: 4.0, detuning: 0.0, phase: 0.0 };
    assert!(gaussian_envelope(2.5, &g).is_err());
    assert!(gaussian_envelope(0.0, &g).unwrap().abs() < 1e-15);
    assert!(gaussian_envelope(g.duration(), &g).unwrap().abs() < 1e-15);
}

#[test]
fn invalid_shapes_are_rejected() {
    let sq = SquarePulse { amplitude: 1.0, duration: 1.0, ramp: 0.6, detuning: 0.0, phase: 0.0 };
    assert!(square_envelope(0.5, &sq).is_err());
    let g = ChoppedGaussian { amplitude: 1.0, sigma: 0.0, n_chop: 2.0, detuning: 0.0, phase: 0.0 };
    assert!(gaussian_envelope(0.0, &g).is_err());
}

proptest! {
    #[test]
    fn square_area_matches_quadrature(a in 0.01f64..5.0, tp in 0.5f64..5.0, frac in 0.0f64..0.5) {
        let p = SquarePulse { amplitude: a, duration: tp, ramp: frac * tp, detuning: 0.0, phase: 0.0 };
        let q = simpson(|t| square_envelope(t.min(tp), &p).unwrap(), tp, 20_000);
        prop_assert!((q - p.area()).abs() < 1e-6 * a * tp);
    }

    #[test]
    fn gaussian_area_matches_quadrature(a in 0.01f64..5.0, sigma in 0.05f64..1.0, n in 1.0f64..5.0) {
        let p = ChoppedGaussian { amplitude: a, sigma, n_chop: n, detuning: 0.0, phase: 0.0 };
        let d = p.duration();
        let q = simpson(|t| gaussian_envelope(t.min(d), &p).unwrap(), d, 4000);
        prop_assert!((q - p.area()).abs() < 1e-10 * a * d);
    }
}

#[test]
fn erasure_guess_closed_forms() {
    let chi = -2.0 * PI * 1.066;
    let g = erasure_check_guess(chi, 1, 2).unwrap();
    assert!((g.t_p - 2.0 * PI * 3f64.sqrt() / chi.abs()).abs() < 1e-12);
    assert!((g.g_bs - chi.abs() * (4.0 / 3.0 - 0.25f64).sqrt()).abs() < 1e-12);
    assert!((g.amplitude - chi.abs() / (4.0 * 3f64.sqrt())).abs() < 1e-12);
    assert_eq!(g.delta, chi / 2.0);
    let g = erasure_check_guess(chi, 2, 7).unwrap();
    assert!((g.t_p - 2.0 * PI * 15f64.sqrt() / chi.abs()).abs() < 1e-12);
    assert!(erasure_check_guess(chi, 1, 0).is_err());
    assert!(erasure_check_guess(chi, 0, 3).is_err());
    assert!(erasure_check_guess(0.0, 1, 3).is_err());
}

#[test]
fn aligned_schedule_centers_ramps() {
    let chi = -2.0 * PI;
    let pulse = PulseShape::Square(SquarePulse { amplitude: 0.5, duration: 2.0, ramp: 0.1, detuning: 0.0, phase: 0.0 });
    let s = DriveSchedule::aligned(1.0, chi / 2.0, 0.0, 0.3, pulse, AncillaVariant::Ge, Dispersive::ge(chi)).unwrap();
    let p = &s.pulses[0];
    // Ramp-up centers: beamsplitter at t_bs/2, pulse at start + t_r/2.
    assert!((s.beamsplitter_start + 0.15 - (p.start + 0.05)).abs() < 1e-12);
    let bs_down = s.beamsplitter_start + s.beamsplitter.span() - 0.15;
    assert!((bs_down - (p.end() - 0.05)).abs() < 1e-12);
    let short = PulseShape::Square(SquarePulse { amplitude: 0.5, duration: 0.3, ramp: 0.1, detuning: 0.0, phase: 0.0 });
    assert!(DriveSchedule::aligned(1.0, 0.0, 0.0, 0.5, short, AncillaVariant::Ge, Dispersive::ge(chi)).is_err());
}

#[test]
fn hamiltonian_respects_schedule_window() {
    let chi = -2.0 * PI;
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let s = DriveSchedule::idle(1.0, AncillaVariant::Ge, Dispersive::ge(chi));
    let ops = build_mode_operators(l).unwrap();
    assert!(assemble_hamiltonian(&s, 0.5, &ops).is_ok());
    assert!(matches!(assemble_hamiltonian(&s, 1.5, &ops), Err(Error::TimeOutOfRange { .. })));
    let gf = DriveSchedule::idle(1.0, AncillaVariant::Gf, Dispersive::gf(chi));
    assert!(assemble_hamiltonian(&gf, 0.5, &ops).is_err());
}

#[test]
fn resonant_pulse_rotates_by_twice_its_area() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let chi = -2.0 * PI;
    // The square pulse has area π/2, a full transfer.
    for shape in [
        PulseShape::Square(SquarePulse { amplitude: PI / 2.0 / 0.8, duration: 1.0, ramp: 0.2, detuning: 0.0, phase: 0.4 }),
        PulseShape::Gaussian(ChoppedGaussian { amplitude: 1.0, sigma: 0.2, n_chop: 3.0, detuning: 0.0, phase: 0.0 }),
    ] {
        let area = match shape {
            PulseShape::Square(p) => p.area(),
            PulseShape::Gaussian(p) => p.area(),
            PulseShape::Kick(_) => unreachable!(),
        };
        let s = DriveSchedule::aligned(0.0, 0.0, 0.0, 0.0, shape, AncillaVariant::Ge, Dispersive::ge(chi)).unwrap();
        let psi = PureState::basis(l, 0, 0, Level::G).unwrap();
        let traj = evolve_schrodinger(&s, &psi, &[s.duration], EvolveOptions::default()).unwrap();
        let State::Pure(p) = traj.last() else { panic!("pure output expected") };
        let pe = p.amplitudes()[l.index(0, 0, 1)].norm_sqr();
        let want = area.sin().powi(2);
        assert!((pe - want).abs() < 1e-8, "P(e) = {pe}, expected {want}");
    }
}

#[test]
fn parity_schedule_constants() {
    let chi = -2.0 * PI * 1.066;
    assert!((parity_beamsplitter(chi) - 3f64.sqrt() / 2.0 * chi.abs()).abs() < 1e-12);
    let s = joint_parity_schedule(chi, AncillaVariant::Gf, true, 0.0).unwrap();
    assert!((s.duration - 2.0 * PI / chi.abs()).abs() < 1e-12);
    assert_eq!(s.kicks().len(), 2);
    assert_eq!(s.dispersive.chi_f, chi);
    assert!(joint_parity_schedule(chi, AncillaVariant::Ge, false, 0.0).is_err());
}
