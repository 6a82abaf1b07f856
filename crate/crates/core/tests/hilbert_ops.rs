use dualrail::hilbert::{
    ancilla_transition, build_mode_operators, fidelity, partial_trace, total_photon_projector, Level, MixedState,
    ModeLayout, PureState, State, Subsystem, C64,
};
use dualrail::hilbert::CMatrix;
use proptest::prelude::*;

fn layout_strategy() -> impl Strategy<Value = ModeLayout> {
    (2usize..6, 2usize..6, 2usize..4).prop_map(|(a, b, q)| ModeLayout { dim_a: a, dim_b: b, dim_q: q })
}

#[test]
fn tiny_layouts_are_rejected() {
    assert!(ModeLayout::new(1, 1, 2).is_err());
    assert!(ModeLayout::new(2, 2, 1).is_err());
    assert!(ModeLayout::new(2, 2, 4).is_err());
    assert!(ModeLayout::new(2, 3, 3).is_ok());
}

#[test]
fn index_order_is_alice_bob_ancilla() {
    let l = ModeLayout { dim_a: 3, dim_b: 4, dim_q: 2 };
    assert_eq!(l.index(0, 0, 1), 1);
    assert_eq!(l.index(0, 1, 0), 2);
    assert_eq!(l.index(1, 0, 0), 8);
    assert_eq!(l.dim(), 24);
}

#[test]
fn ladder_commutator_below_truncation() {
    let l = ModeLayout { dim_a: 4, dim_b: 3, dim_q: 2 };
    let ops = build_mode_operators(l).unwrap();
    let c = ops.a.commutator(&ops.a.dagger()).unwrap();
    for i in 0..l.dim() {
        let (na, _, _) = l.decompose(i);
        let expect = if na + 1 < l.dim_a { 1.0 } else { 1.0 - l.dim_a as f64 };
        assert!((c.matrix()[(i, i)].re - expect).abs() < 1e-12);
    }
    let nb = ops.b.dagger().mul(&ops.b).unwrap();
    assert!((nb.matrix() - ops.n_b.matrix()).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn ancilla_operators() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 3 };
    let ops = build_mode_operators(l).unwrap();
    assert!(ops.proj_f.is_some());
    assert_eq!(ops.sigma_x.hermiticity_error(), 0.0);
    let ge = ancilla_transition(&l, Level::G, Level::E).unwrap();
    let sx = ge.add(&ge.dagger()).unwrap();
    assert_eq!(sx.matrix(), ops.sigma_x.matrix());
    assert!(ancilla_transition(&ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 }, Level::G, Level::F).is_err());
}

#[test]
fn pure_state_validation() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let s = PureState::from_components(l, &[(1, 0, Level::G, h), (0, 1, Level::G, h)]).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-15);
    assert!(PureState::from_components(l, &[(1, 0, Level::G, h)]).unwrap().norm() > 1.0 - 1e-15);
    assert!(PureState::new(l, dualrail::hilbert::CVector::zeros(l.dim())).is_err());
    assert!(PureState::from_components(l, &[]).is_err());
    assert!(PureState::basis(l, 2, 0, Level::G).is_err());
}

#[test]
fn partial_trace_of_product_state() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let s = PureState::from_components(l, &[(1, 0, Level::G, h), (1, 0, Level::E, h)]).unwrap().to_density();
    let r = partial_trace(&s, &[Subsystem::Ancilla]);
    assert!((r.trace() - 1.0).abs() < 1e-15);
    assert!((r.matrix[(0, 1)].re - 0.5).abs() < 1e-15);
    let a = partial_trace(&s, &[Subsystem::Alice]);
    assert!((a.matrix[(1, 1)].re - 1.0).abs() < 1e-15);
}

#[test]
fn fidelity_of_orthogonal_and_mixed_states() {
    let l = ModeLayout { dim_a: 2, dim_b: 2, dim_q: 2 };
    let p = State::from(PureState::basis(l, 1, 0, Level::G).unwrap());
    let q = State::from(PureState::basis(l, 0, 1, Level::G).unwrap());
    assert!(fidelity(&p, &q).unwrap().abs() < 1e-15);
    let mut m = CMatrix::zeros(l.dim(), l.dim());
    m[(l.index(1, 0, 0), l.index(1, 0, 0))] = C64::new(0.5, 0.0);
    m[(l.index(0, 1, 0), l.index(0, 1, 0))] = C64::new(0.5, 0.0);
    let mixed = State::from(MixedState::new(l, m).unwrap());
    assert!((fidelity(&p, &mixed).unwrap() - 0.5).abs() < 1e-12);
    assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn index_round_trip(l in layout_strategy(), seed in 0usize..10_000) {
        let i = seed % l.dim();
        let (a, b, q) = l.decompose(i);
        prop_assert_eq!(l.index(a, b, q), i);
    }

    #[test]
    fn photon_projectors_are_complete(l in layout_strategy()) {
        let top = l.dim_a + l.dim_b - 2;
        let mut sum = CMatrix::zeros(l.dim(), l.dim());
        for n in 0..=top {
            let p = total_photon_projector(l, n).unwrap();
            let p2 = p.mul(&p).unwrap();
            prop_assert!((p2.matrix() - p.matrix()).iter().all(|z| z.norm() < 1e-14));
            sum += p.matrix();
        }
        let id = CMatrix::identity(l.dim(), l.dim());
        prop_assert!((sum - id).iter().all(|z| z.norm() < 1e-14));
        prop_assert!(total_photon_projector(l, top + 1).is_err());
    }

    #[test]
    fn number_operators_are_hermitian(l in layout_strategy()) {
        let ops = build_mode_operators(l).unwrap();
        prop_assert_eq!(ops.n_a.hermiticity_error(), 0.0);
        prop_assert_eq!(ops.sigma_z.hermiticity_error(), 0.0);
        let c = ops.n_a.commutator(&ops.n_b).unwrap();
        prop_assert!(c.max_abs() < 1e-14);
    }
}
