//! Spin-model predictions against brute-force diagonalization of the
//! two-cavity Hamiltonian restricted to one photon-number block.

use std::f64::consts::PI;

use dualrail::spin::{
    axes_angle, larmor_frequency, projections, spin_eigenenergies, transition_frequencies_general,
    transition_frequencies_symmetric, transition_matrix_elements, wigner_small_d, HalfInt, SpinModelParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{block_hamiltonians, sorted_eigen};

fn scale(chi: f64, x: f64) -> f64 {
    chi.abs().max(x.abs())
}

#[test]
fn oracle_matches_block_diagonalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let chi = -2.0 * PI * 1.066;
    let t0 = std::time::Instant::now();
    for n in 0..=3u32 {
        for _ in 0..50 {
            let g = rng.random_range(0.0..3.0) * chi.abs();
            let delta = rng.random_range(-1.0..2.0) * chi;
            let phi = rng.random_range(0.0..2.0 * PI);
            let (hg, he) = block_hamiltonians(n as usize, g, delta, chi, phi);
            let (eg, vg) = sorted_eigen(hg);
            let (ee, ve) = sorted_eigen(he);

            let (sg, se) = spin_eigenenergies(n, g, delta, chi);
            for (a, b) in eg.iter().zip(&sg).chain(ee.iter().zip(&se)) {
                assert!((a - b).abs() <= 1e-9 * scale(chi, *a), "N={n} g={g} Δ={delta}: {a} vs {b}");
            }

            let table = transition_matrix_elements(&SpinModelParams { n_photons: n, g_bs: g, delta, chi, phi }).unwrap();
            for (i, m_g) in projections(n).enumerate() {
                for (j, m_e) in projections(n).enumerate() {
                    let f = ee[j] - eg[i];
                    let row = table.rows.iter().find(|r| r.m_g == m_g && r.m_e == m_e).unwrap();
                    assert!((row.frequency - f).abs() <= 1e-9 * scale(chi, f), "N={n}: line ({m_g},{m_e}) {} vs {f}", row.frequency);
                    let overlap = (ve.column(j).adjoint() * vg.column(i))[(0, 0)].norm();
                    assert!(
                        (row.element - overlap).abs() <= 1e-9,
                        "N={n} g={g} Δ={delta}: |d|({m_g},{m_e}) {} vs {overlap}",
                        row.element
                    );
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn symmetric_lines_and_degeneracies() {
    let chi = -2.0 * PI;
    for n in 0..=4u32 {
        for g in [0.3, 1.0, 2.2] {
            let g = g * chi.abs();
            let lines = transition_frequencies_symmetric(n, g, chi);
            assert_eq!(lines.len(), 2 * n as usize + 1);
            let omega = larmor_frequency(g, chi);
            for l in &lines {
                assert_eq!(l.degeneracy, (n as i32 + 1 - l.delta_m.abs()) as usize);
                let expect = n as f64 * chi / 2.0 + l.delta_m as f64 * omega;
                assert!((l.frequency - expect).abs() < 1e-12 * chi.abs() * (1.0 + n as f64));
            }
            let total: usize = lines.iter().map(|l| l.degeneracy).sum();
            assert_eq!(total, ((n + 1) * (n + 1)) as usize);
            // The general formula collapses onto the same set at Δ = χ/2.
            for l in transition_frequencies_general(n, g, chi / 2.0, chi) {
                assert!(lines.iter().any(|s| (s.frequency - l.frequency).abs() < 1e-9));
            }
        }
    }
}

#[test]
fn nonsymmetric_n1_has_four_lines() {
    let chi = -2.0 * PI;
    let mut f: Vec<f64> = transition_frequencies_general(1, 1.5 * chi.abs(), chi, chi).iter().map(|l| l.frequency).collect();
    f.sort_by(f64::total_cmp);
    f.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    assert_eq!(f.len(), 4);
}

#[test]
fn axes_angle_limits() {
    let chi = -2.0 * PI;
    // Strong beamsplitter: both axes along x.
    assert!(axes_angle(1e6, chi / 2.0, chi).unwrap().abs() < 1e-5);
    // Symmetric detuning: δθ = 2 atan(χ/2g).
    let g = 0.7 * chi.abs();
    let expect = 2.0 * (chi / 2.0 / g).atan();
    assert!((axes_angle(g, chi / 2.0, chi).unwrap() - expect).abs() < 1e-12);
}

#[test]
fn wigner_d_known_values() {
    let b = 0.37;
    let h = |t| HalfInt::from_twice(t);
    let d = |j, m1, m2| wigner_small_d(h(j), h(m1), h(m2), b).unwrap();
    assert!((d(1, 1, -1) + (b / 2.0).sin()).abs() < 1e-15);
    assert!((d(1, 1, 1) - (b / 2.0).cos()).abs() < 1e-15);
    assert!((d(2, 2, 2) - (1.0 + b.cos()) / 2.0).abs() < 1e-15);
    assert!((d(2, 2, 0) + b.sin() / 2f64.sqrt()).abs() < 1e-15);
    assert!((d(2, 0, 0) - b.cos()).abs() < 1e-15);
    assert!(wigner_small_d(h(2), h(4), h(0), b).is_err());
}

proptest! {
    #[test]
    fn wigner_d_is_orthogonal(twice_j in 0i32..8, beta in -PI..PI) {
        let j = HalfInt::from_twice(twice_j);
        let ms: Vec<HalfInt> = projections(twice_j as u32).collect();
        for &m1 in &ms {
            for &m2 in &ms {
                let s: f64 = ms
                    .iter()
                    .map(|&k| wigner_small_d(j, m1, k, beta).unwrap() * wigner_small_d(j, m2, k, beta).unwrap())
                    .sum();
                let expect = if m1 == m2 { 1.0 } else { 0.0 };
                prop_assert!((s - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_elements_are_normalized(n in 0u32..5, g in 0.05f64..3.0, d in -1.0f64..2.0) {
        let chi = -2.0 * PI;
        let t = transition_matrix_elements(&SpinModelParams { n_photons: n, g_bs: g * chi.abs(), delta: d * chi, chi, phi: 0.0 }).unwrap();
        for m_g in projections(n) {
            let s: f64 = t.rows.iter().filter(|r| r.m_g == m_g).map(|r| r.element * r.element).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn larmor_is_symmetric_axis_norm(g in 0.0f64..5.0) {
        let chi = -2.0 * PI;
        let (eg, ee) = spin_eigenenergies(1, g, chi / 2.0, chi);
        let w = larmor_frequency(g, chi);
        prop_assert!(((eg[1] - eg[0]) - w).abs() < 1e-12);
        prop_assert!(((ee[1] - ee[0]) - w).abs() < 1e-12);
    }
}
