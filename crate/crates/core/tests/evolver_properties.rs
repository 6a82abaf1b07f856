//! Propagator invariants and closed-form limits. The reference Hamiltonian is
//! assembled here element by element and exponentiated by diagonalization.

use std::f64::consts::PI;

use dualrail::evolver::{collapse_operators, evolve_lindblad, evolve_schrodinger, linspace, CollapseSet, EvolveOptions, NoiseParams, Propagator};
use dualrail::hilbert::{total_photon_projector, CMatrix, CVector, Level, MixedState, ModeLayout, PureState, State, C64};
use dualrail::pulses::{AncillaVariant, Dispersive, DriveSchedule, PlacedPulse, PulseShape, SquarePulse};
use dualrail::units::mhz;
use proptest::prelude::*;

struct Params {
    g: f64,
    delta: f64,
    chi: f64,
    phi: f64,
    drive: f64,
}

/// H = (g/2)(e^{iφ} a b† + h.c.) − Δ b†b + χ b†b|e⟩⟨e| + A(|g⟩⟨e| + h.c.).
fn reference_hamiltonian(l: ModeLayout, p: &Params) -> CMatrix {
    let d = l.dim();
    let mut h = CMatrix::zeros(d, d);
    for na in 0..l.dim_a {
        for nb in 0..l.dim_b {
            for q in 0..2 {
                let i = l.index(na, nb, q);
                h[(i, i)] += C64::new(-p.delta * nb as f64 + p.chi * (nb * q) as f64, 0.0);
                if na > 0 && nb + 1 < l.dim_b {
                    // a b†: |na, nb⟩ → √na √(nb+1) |na−1, nb+1⟩
                    let j = l.index(na - 1, nb + 1, q);
                    let amp = C64::from_polar(0.5 * p.g * (na as f64).sqrt() * ((nb + 1) as f64).sqrt(), p.phi);
                    h[(j, i)] += amp;
                    h[(i, j)] += amp.conj();
                }
            }
            let (ig, ie) = (l.index(na, nb, 0), l.index(na, nb, 1));
            h[(ig, ie)] += C64::new(p.drive, 0.0);
            h[(ie, ig)] += C64::new(p.drive, 0.0);
        }
    }
    h
}

fn exact_propagate(h: &CMatrix, psi: &CVector, t: f64) -> CVector {
    let e = h.clone().symmetric_eigen();
    let v = &e.eigenvectors;
    let phases = CMatrix::from_diagonal(&e.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
    v * phases * v.adjoint() * psi
}

fn flat_schedule(p: &Params, t: f64) -> DriveSchedule {
    let pulse = PlacedPulse {
        start: 0.0,
        shape: PulseShape::Square(SquarePulse { amplitude: p.drive, duration: t, ramp: 0.0, detuning: 0.0, phase: 0.0 }),
    };
    DriveSchedule::constant_beamsplitter(p.g, p.delta, p.phi, t, vec![pulse], AncillaVariant::Ge, Dispersive::ge(p.chi)).unwrap()
}

fn random_state(l: ModeLayout, seed: u64) -> CVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(l.dim(), |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn ramped_check(chi: f64) -> DriveSchedule {
    let tp = 2.0 * PI * 3f64.sqrt() / chi.abs();
    let pulse = PulseShape::Square(SquarePulse { amplitude: PI / (2.0 * tp), duration: tp, ramp: 0.2 * tp, detuning: 0.0, phase: 0.3 });
    DriveSchedule::aligned(chi.abs() * (25.0 / 3.0 - 0.25f64).sqrt(), chi / 2.0, 0.0, 0.1 * tp, pulse, AncillaVariant::Ge, Dispersive::ge(chi)).unwrap()
}

#[test]
fn flat_segments_match_exact_exponential() {
    let l = ModeLayout { dim_a: 3, dim_b: 3, dim_q: 2 };
    let chi = -mhz(1.066);
    let p = Params { g: 0.83 * chi.abs(), delta: 0.31 * chi, chi, phi: 0.7, drive: 0.12 * chi.abs() };
    let t = 3.7;
    let psi = random_state(l, 5);
    let want = exact_propagate(&reference_hamiltonian(l, &p), &psi, t);
    for exact in [true, false] {
        let opts = EvolveOptions { exact_flat_segments: exact, monitor_truncation: false, ..Default::default() };
        let prop = Propagator::new(&flat_schedule(&p, t), l, &CollapseSet::default(), opts).unwrap();
        let (got, _) = prop.run_pure(&psi, &[t]).unwrap();
        let err = (&got[0] - &want).norm();
        assert!(err < 1e-8, "exact_flat_segments = {exact}: |Δψ| = {err:e}");
    }
}

#[test]
fn cavity_decay_is_exponential() {
    let l = ModeLayout { dim_a: 2, dim_b: 3, dim_q: 2 };
    let t1 = 20.0;
    let noise = NoiseParams { t1_b: Some(t1), ..NoiseParams::none() };
    let schedule = DriveSchedule::idle(30.0, AncillaVariant::Ge, Dispersive::ge(-mhz(1.0)));
    let rho = PureState::basis(l, 0, 2, Level::G).unwrap().to_density();
    let ts = linspace(0.0, 30.0, 7);
    let traj = evolve_lindblad(&schedule, &rho, &collapse_operators(&noise, l).unwrap(), &ts, EvolveOptions::default()).unwrap();
    for (t, s) in ts.iter().zip(&traj.states) {
        let State::Mixed(m) = s else { panic!("mixed output expected") };
        let q = (-t / t1).exp();
        // Fock |2⟩ under a: P2 = q², P1 = 2q(1 − q), P0 = (1 − q)².
        assert!((m.population(0, 2, Level::G) - q * q).abs() < 1e-8);
        assert!((m.population(0, 1, Level::G) - 2.0 * q * (1.0 - q)).abs() < 1e-8);
        assert!((m.population(0, 0, Level::G) - (1.0 - q).powi(2)).abs() < 1e-8);
    }
}

#[test]
fn ancilla_coherence_decays_at_dephasing_rate() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let tphi = 15.0;
    let noise = NoiseParams { tphi_ge: Some(tphi), ..NoiseParams::none() };
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rho = PureState::from_components(l, &[(0, 0, Level::G, h), (0, 0, Level::E, h)]).unwrap().to_density();
    let schedule = DriveSchedule::idle(20.0, AncillaVariant::Ge, Dispersive::ge(-mhz(1.0)));
    let ts = linspace(0.0, 20.0, 5);
    let traj = evolve_lindblad(&schedule, &rho, &collapse_operators(&noise, l).unwrap(), &ts, EvolveOptions::default()).unwrap();
    for (t, s) in ts.iter().zip(&traj.states) {
        let m = s.to_density();
        let c = m.matrix()[(l.index(0, 0, 0), l.index(0, 0, 1))].norm();
        assert!((c - 0.5 * (-t / tphi).exp()).abs() < 1e-8, "t = {t}: {c}");
    }
}

#[test]
fn three_level_lindblad_stays_physical() {
    let l = ModeLayout { dim_a: 3, dim_b: 3, dim_q: 3 };
    let chi = -mhz(1.066);
    let noise = NoiseParams { thermal: true, ..NoiseParams::measured() };
    let h = C64::new(0.5, 0.0);
    let rho = PureState::from_components(
        l,
        &[(1, 0, Level::G, h), (0, 1, Level::G, h), (1, 1, Level::G, h), (2, 0, Level::E, h)],
    )
    .unwrap()
    .to_density();
    let s = ramped_check(chi);
    let ts = linspace(0.0, s.duration, 6);
    let traj = evolve_lindblad(&s, &rho, &collapse_operators(&noise, l).unwrap(), &ts, EvolveOptions::default()).unwrap();
    for st in &traj.states {
        let m = st.to_density();
        assert!((m.trace() - 1.0).abs() < 1e-8);
        assert!(m.hermiticity_error() < 1e-10);
        assert!(m.min_eigenvalue() > -1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn schrodinger_preserves_norm_and_photon_number(
        seed in 0u64..1000,
        g in 0.1f64..3.0,
        d in -1.0f64..2.0,
        phi in 0.0f64..(2.0 * PI),
    ) {
        let l = ModeLayout { dim_a: 3, dim_b: 3, dim_q: 2 };
        let chi = -mhz(1.066);
        let pulse = PulseShape::Square(SquarePulse { amplitude: 0.3, duration: 2.5, ramp: 0.4, detuning: 0.2, phase: 0.1 });
        let s = DriveSchedule::aligned(g * chi.abs(), d * chi, phi, 0.3, pulse, AncillaVariant::Ge, Dispersive::ge(chi)).unwrap();
        // Random superposition inside N = 1.
        let v = random_state(l, seed);
        let p1 = total_photon_projector(l, 1).unwrap();
        let w = p1.matrix() * v;
        let psi = PureState::new(l, &w / C64::new(w.norm(), 0.0)).unwrap();
        let ts = linspace(0.0, s.duration, 5);
        let opts = EvolveOptions { monitor_truncation: false, ..Default::default() };
        let traj = evolve_schrodinger(&s, &psi, &ts, opts).unwrap();
        for st in &traj.states {
            let State::Pure(p) = st else { panic!("pure output expected") };
            prop_assert!((p.norm() - 1.0).abs() < 1e-8);
            let inside = (p1.matrix() * p.amplitudes()).norm_squared();
            prop_assert!((inside - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lindblad_stays_physical(
        t1 in 5.0f64..100.0,
        tphi in 5.0f64..100.0,
        tcav in 50.0f64..500.0,
        nth in 0.0f64..0.05,
    ) {
        let l = ModeLayout { dim_a: 3, dim_b: 3, dim_q: 2 };
        let chi = -mhz(1.066);
        let noise = NoiseParams {
            t1_a: Some(tcav),
            t1_b: Some(0.5 * tcav),
            tphi_a: Some(4.0 * tcav),
            t1_ge: Some(t1),
            tphi_ge: Some(tphi),
            nth_a: nth,
            nth_b: nth,
            nth_q: nth,
            thermal: true,
            ..NoiseParams::none()
        };
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = PureState::from_components(l, &[(1, 0, Level::G, h), (0, 1, Level::G, h)]).unwrap().to_density();
        let s = ramped_check(chi);
        let ts = linspace(0.0, s.duration, 4);
        let traj = evolve_lindblad(&s, &rho, &collapse_operators(&noise, l).unwrap(), &ts, EvolveOptions::default()).unwrap();
        for st in &traj.states {
            let m: MixedState = st.to_density();
            prop_assert!((m.trace() - 1.0).abs() < 1e-8);
            prop_assert!(m.hermiticity_error() < 1e-10);
            prop_assert!(m.min_eigenvalue() > -1e-7);
        }
    }
}
