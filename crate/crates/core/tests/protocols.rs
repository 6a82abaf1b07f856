//! Noiseless protocol floors and closed-form pieces of the protocol layer.

use std::f64::consts::PI;

use dualrail::evolver::{EvolveOptions, NoiseParams};
use dualrail::hilbert::{CMatrix, Level, MixedState, ModeLayout, PureState, State, C64};
use dualrail::protocols::{
    cphase_joint_snap, logical_measurement, pauli_rate_from_fidelity, prepare_cardinal, ramsey_phase_probe, readout_induced_dephasing,
    run_joint_parity_check, sample_gate_error_channel, sample_many, CphaseDesign, DualRailLabel, GateKind, LogicalAxis, Pauli,
    ReadoutModel,
};
use dualrail::pulses::{AncillaVariant, DeltaPair};
use dualrail::studies::{leakage_channel, single_check_report, tuned_square_check};
use dualrail::tuneup::{tune_gaussian_erasure_check, GaussianTuneConfig};
use dualrail::units::mhz;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chi() -> f64 {
    -mhz(1.066)
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

#[test]
fn ideal_erasure_check_floor() {
    let check = tuned_square_check(chi(), 1, 2, 0.12, 0.024, mhz(2.05), None).unwrap();
    let ch = leakage_channel(&check, &NoiseParams::none(), ReadoutModel::instantaneous(), 0.0, EvolveOptions::default()).unwrap();
    let r = single_check_report(&ch).unwrap();
    assert!(r.p_flag_vacuum >= 0.999, "P(e | |0,0⟩) = {}", r.p_flag_vacuum);
    for row in &r.rows {
        assert!(row.p_flag <= 1e-3, "{}: flag {}", row.label, row.p_flag);
        assert!(1.0 - row.fidelity <= 1e-3, "{}: fidelity {}", row.label, row.fidelity);
    }
}

#[test]
fn ideal_parity_check_maps_parity() {
    let readout = ReadoutModel::instantaneous();
    for variant in [AncillaVariant::Ge, AncillaVariant::Gf] {
        let l = ModeLayout { dim_a: 3, dim_b: 3, dim_q: variant.dim_q() };
        for (na, nb) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)] {
            let s = State::from(PureState::basis(l, na, nb, Level::G).unwrap());
            let out = run_joint_parity_check(&s, chi(), variant, &NoiseParams::none(), true, 0.0, readout, EvolveOptions::default()).unwrap();
            let p_right = if (na + nb) % 2 == 0 { out.p_flag } else { out.p_pass() };
            assert!(p_right >= 0.999, "{variant:?} |{na},{nb}⟩: {p_right}");
        }
    }
}

#[test]
fn delta_pair_nodes_sit_at_half_chi() {
    let pair = DeltaPair { angle: PI / 2.0, separation: 2.0 * PI / chi().abs(), phases: [0.0; 2], detuning: 0.0 };
    for k in [-3.0, -1.0, 1.0, 3.0] {
        assert!(pair.spectrum(k * chi() / 2.0).abs() < 1e-12);
    }
    assert!((pair.spectrum(chi()).abs() - 1.0).abs() < 1e-12);
}

fn cphase_design() -> CphaseDesign {
    let tune = tune_gaussian_erasure_check(&GaussianTuneConfig {
        chi: chi(),
        g_bs_start: mhz(1.7),
        g_bs_max: mhz(2.05),
        infidelity_target: 1e-3,
        include_11: true,
        ..GaussianTuneConfig::default()
    })
    .unwrap();
    CphaseDesign {
        chi: chi(),
        g_bs: tune.params.g_bs,
        delta: tune.params.delta,
        sigma: tune.sigma,
        n_chop: tune.n_chop,
        amplitude: tune.params.amplitude,
        delta_omega: tune.params.delta_omega,
        phase_correction: 0.0,
    }
    .calibrate(EvolveOptions::default())
    .unwrap()
}

#[test]
fn cphase_floor_and_ramsey_response() {
    let design = cphase_design();
    let opts = EvolveOptions::default();
    let zero = cphase_joint_snap(0.0, &design, &NoiseParams::none(), opts).unwrap();
    let pi = cphase_joint_snap(PI, &design, &NoiseParams::none(), opts).unwrap();
    assert!(zero.conditional_phase.abs() < 1e-2, "θ = 0: {}", zero.conditional_phase);
    assert!((wrap(pi.conditional_phase - PI)).abs() < 1e-2, "θ = π: {}", pi.conditional_phase);
    assert!((wrap(pi.phases[0] - zero.phases[0] - PI)).abs() < 1e-2);
    // Single-cavity phases are local (Stark) phases, identical for every θ.
    for k in 1..4 {
        assert!(wrap(pi.phases[k] - zero.phases[k]).abs() < 1e-2, "state {k}: {} vs {}", pi.phases[k], zero.phases[k]);
    }
    assert!(pi.leakage < 1e-3, "leakage {}", pi.leakage);

    let grid: Vec<f64> = (0..12).map(|k| 2.0 * PI * k as f64 / 12.0).collect();
    let probe = |theta, alice| ramsey_phase_probe(theta, alice, &grid, &design, &NoiseParams::none(), opts).unwrap().offset;
    assert!(wrap(probe(PI, 1) - probe(0.0, 1)).abs() < 1e-2);
    assert!((wrap(probe(PI, 0) - probe(0.0, 0)).abs() - PI).abs() < 2e-2);
}

#[test]
fn logical_measurement_signs() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    for (label, axis, sign) in [
        (DualRailLabel::PlusZ, LogicalAxis::Z, 1.0),
        (DualRailLabel::MinusZ, LogicalAxis::Z, -1.0),
        (DualRailLabel::PlusX, LogicalAxis::X, 1.0),
        (DualRailLabel::MinusX, LogicalAxis::X, -1.0),
        (DualRailLabel::PlusY, LogicalAxis::Y, 1.0),
        (DualRailLabel::MinusY, LogicalAxis::Y, -1.0),
        (DualRailLabel::PlusX, LogicalAxis::Z, 0.0),
    ] {
        let s = State::from(prepare_cardinal(label, l).unwrap());
        let m = logical_measurement(&s, axis, true).unwrap();
        assert!((m.expectation - sign).abs() < 1e-12, "{label} along {axis:?}: {}", m.expectation);
        assert!((m.pass_probability - 1.0).abs() < 1e-12);
    }
    let vac = State::from(PureState::basis(l, 0, 0, Level::G).unwrap());
    assert_eq!(logical_measurement(&vac, LogicalAxis::Z, true).unwrap().pass_probability, 0.0);
    let p = 0.2;
    let mut m = CMatrix::zeros(l.dim(), l.dim());
    m[(l.index(1, 0, 0), l.index(1, 0, 0))] = C64::new(1.0 - p, 0.0);
    m[(l.index(0, 0, 0), l.index(0, 0, 0))] = C64::new(p, 0.0);
    let mixed = State::from(MixedState::new(l, m).unwrap());
    let r = logical_measurement(&mixed, LogicalAxis::Z, false).unwrap();
    assert!((r.pass_probability - (1.0 - p)).abs() < 1e-12);
    assert!((r.expectation - (1.0 - p)).abs() < 1e-12);
}

#[test]
fn pauli_rate_formula() {
    assert_eq!(pauli_rate_from_fidelity(1.0).unwrap(), 0.0);
    assert!((pauli_rate_from_fidelity(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(pauli_rate_from_fidelity(1.2).is_err());
}

#[test]
fn readout_dephasing_formula() {
    let (nbar, kappa, chi, t) = (10.0, mhz(1.77), mhz(2.5e-3), 1.0);
    let r = readout_induced_dephasing(nbar, kappa, chi, t).unwrap();
    let gamma = nbar * kappa * chi * chi / (kappa * kappa + chi * chi);
    assert!((r.gamma_phi - gamma).abs() < 1e-12);
    assert!((r.p_pauli - gamma * t / 2.0).abs() < 1e-6);
    assert!((r.p_pauli - 1.0e-4).abs() < 2e-5, "p = {}", r.p_pauli);
    assert_eq!(readout_induced_dephasing(nbar, 0.0, 0.0, t).unwrap().gamma_phi, 0.0);
    assert!(readout_induced_dephasing(-1.0, kappa, chi, t).is_err());
}

/// |observed − expected| within 3σ of a binomial count.
fn within_3_sigma(count: u64, n: u64, p: f64) -> bool {
    let mean = n as f64 * p;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= 3.0 * sigma.max(1.0)
}

#[test]
fn sampler_frequencies_are_binomial() {
    let (p, r_e, p_fn) = (0.01, 0.9, 0.037);
    let n = 1_000_000u64;
    let st = sample_many(p, r_e, p_fn, GateKind::Cz, n, 7, 16).unwrap();
    assert_eq!(st.draws, n);
    assert!(within_3_sigma(st.erasures, n, p * r_e), "erasures {}", st.erasures);
    assert!(within_3_sigma(st.missed, st.erasures, p_fn), "missed {}", st.missed);
    // Uniform two-qubit Paulis include II.
    assert!(within_3_sigma(st.pauli_only, n, p * (1.0 - r_e) * 15.0 / 16.0), "pauli {}", st.pauli_only);

    // Partner errors of erased CX draws.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut ctrl, mut ctrl_x, mut tgt, mut tgt_z) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..n {
        let s = sample_gate_error_channel(0.5, 1.0, 0.0, GateKind::Cx, &mut rng).unwrap();
        if s.erased[0] {
            ctrl += 1;
            assert!(matches!(s.pauli[1], Pauli::I | Pauli::X));
            ctrl_x += u64::from(s.pauli[1] == Pauli::X);
        } else if s.erased[1] {
            tgt += 1;
            assert!(matches!(s.pauli[0], Pauli::I | Pauli::Z));
            tgt_z += u64::from(s.pauli[0] == Pauli::Z);
        }
    }
    assert!(within_3_sigma(ctrl, n, 0.25));
    assert!(within_3_sigma(tgt, n, 0.25));
    assert!(within_3_sigma(ctrl_x, ctrl, 0.5));
    assert!(within_3_sigma(tgt_z, tgt, 0.5));
}

#[test]
fn sampler_is_chunk_deterministic() {
    let a = sample_many(0.02, 0.8, 0.05, GateKind::Cx, 200_000, 9, 8).unwrap();
    let b = sample_many(0.02, 0.8, 0.05, GateKind::Cx, 200_000, 9, 8).unwrap();
    assert_eq!(a, b);
    assert!(sample_many(1.5, 0.8, 0.05, GateKind::Cx, 10, 9, 1).is_err());
}
