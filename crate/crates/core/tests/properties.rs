use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;

use qnc::characteristic::char_components;
use qnc::entanglement::{decomposition_from_isometry, productize, random_isometry};
use qnc::io::{parse_state, state_json, to_json_string};
use qnc::linalg::{
    apply_local_unitary, hermiticity_defect, partial_trace, swap_subsystems, trace_norm,
};
use qnc::measurement::{
    ket_from_params, params_from_ket, projector_from_params, sample_params,
};
use qnc::states::{pure_two_qubit, qubit, random_density, random_unitary, rng, separable_mixture};
use qnc::steering::{lambda_closed_form, lambda_direct};
use qnc::strength::{strength, strength_directed};
use qnc::su_basis::{bloch_vector, from_bloch, generator_basis};
use qnc::tomography::{oracle_from_state, reconstruct_state};
use qnc::{DensityMatrix, Direction, IntegratorConfig, MeasurementParams, Subsystem};

fn bipartite(seed: u64, n_a: usize, n_b: usize) -> DensityMatrix {
    let mut r = rng(seed);
    random_density(n_a * n_b, &mut r).with_split(n_a, n_b).unwrap()
}

fn max_abs(m: &qnc::CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_states_are_states(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        prop_assert!(hermiticity_defect(rho.matrix()) < 1e-12);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn bloch_roundtrip(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let basis = generator_basis(n).unwrap();
        let back = from_bloch(&bloch_vector(&rho, &basis).unwrap(), &basis).unwrap();
        prop_assert!(max_abs(&(back - rho.matrix())) < 1e-12);
    }

    #[test]
    fn params_roundtrip_projectors(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let p = sample_params(n, &mut r);
        let q = params_from_ket(&ket_from_params(&p)).unwrap();
        let gap = projector_from_params(&p).matrix() - projector_from_params(&q).matrix();
        prop_assert!(max_abs(&gap) < 1e-10);
    }

    #[test]
    fn b_side_unitary_keeps_f(seed in any::<u64>(), n_b in 2usize..4) {
        let rho = bipartite(seed, 2, n_b);
        let mut r = rng(seed ^ 0x5eed);
        let u = random_unitary(n_b, &mut r);
        let turned = apply_local_unitary(&rho, None, Some(&u)).unwrap();
        let p = sample_params(2, &mut r);
        let a = char_components(&rho, &p).unwrap();
        let b = char_components(&turned, &p).unwrap();
        prop_assert_eq!(a.defined, b.defined);
        for (x, y) in a.components.iter().zip(&b.components) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    /// With a qubit on B, `|F|` follows an A-side unitary pointwise: the
    /// measurement `M` on the rotated state sees what `U^dag M U` sees on
    /// the original.
    #[test]
    fn a_side_unitary_moves_f_pointwise(seed in any::<u64>(), t in 0.05f64..1.52, f in 0.0f64..TAU) {
        let rho = bipartite(seed, 2, 2);
        let mut r = rng(seed ^ 0xa);
        let u = random_unitary(2, &mut r);
        let turned = apply_local_unitary(&rho, Some(&u), None).unwrap();
        let p = MeasurementParams::qubit(t, f).unwrap();
        let pulled = params_from_ket(&(u.adjoint() * ket_from_params(&p))).unwrap();
        let a = char_components(&turned, &p).unwrap();
        let b = char_components(&rho, &pulled).unwrap();
        prop_assume!(!b.poles.iter().any(|&x| x) && b.defined && a.defined);
        prop_assert!((a.p - b.p).abs() < 1e-12);
        prop_assert!((a.magnitude - b.magnitude).abs() < 1e-8, "{} vs {}", a.magnitude, b.magnitude);
    }

    #[test]
    fn swapping_sides_swaps_directions(seed in any::<u64>()) {
        let rho = bipartite(seed, 2, 2);
        let cfg = IntegratorConfig::quadrature(16);
        let ab = strength_directed(&rho, Direction::AtoB, &cfg).unwrap();
        let ba = strength_directed(&swap_subsystems(&rho).unwrap(), Direction::BtoA, &cfg).unwrap();
        prop_assert!((ab.value - ba.value).abs() < 1e-12);
    }

    #[test]
    fn decompositions_resum_and_keep_marginals(seed in any::<u64>(), extra in 0usize..3) {
        let rho = bipartite(seed, 2, 2);
        let mut r = rng(seed ^ 0xd);
        let v = random_isometry(4 + extra, 4, false, &mut r);
        let d = decomposition_from_isometry(&rho, &v).unwrap();
        prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(max_abs(&(d.resum() - rho.matrix())) < 1e-10);
        let prod = productize(&d);
        for side in [Subsystem::A, Subsystem::B] {
            let a = partial_trace(&prod, side).unwrap();
            let b = partial_trace(&rho, side).unwrap();
            prop_assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10);
        }
    }

    #[test]
    fn tomography_recovers_states(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let back = reconstruct_state(&oracle_from_state(&rho), n).unwrap();
        prop_assert!(trace_norm(&(back.matrix() - rho.matrix())).unwrap() < 1e-8);
    }

    #[test]
    fn state_files_are_exact(seed in any::<u64>(), n_a in 1usize..4, n_b in 1usize..4) {
        let rho = bipartite(seed, n_a, n_b);
        let back = parse_state(&to_json_string(&state_json(&rho).unwrap())).unwrap();
        prop_assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn overlap_sign_discrepancy(t in 0.0f64..PI, f in 0.0f64..TAU, a in 0.0f64..PI, fk in 0.0f64..TAU) {
        let gap = lambda_closed_form(t, f, a, fk) - lambda_direct(t, f, a, fk);
        let expect = 2.0 * (2.0 * t).sin() * (2.0 * a).sin() * (0.5 * (f - fk)).sin().powi(2);
        prop_assert!((gap - expect).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn product_states_have_no_strength(t1 in 0.0f64..3.1, f1 in 0.0f64..6.2, t2 in 0.0f64..3.1, f2 in 0.0f64..6.2) {
        let rho = separable_mixture(&[(1.0, &qubit(t1, f1), &qubit(t2, f2))]).unwrap();
        let g = strength(&rho, &IntegratorConfig::quadrature(16)).unwrap();
        prop_assert!(g.value.abs() < 1e-12);
    }

    #[test]
    fn pure_strength_is_sin_two_alpha(alpha in 0.0f64..FRAC_PI_2, gamma in 0.0f64..TAU) {
        let g = strength(&pure_two_qubit(alpha, gamma), &IntegratorConfig::quadrature(32)).unwrap();
        prop_assert!((g.value - (2.0 * alpha).sin()).abs() < 1e-9);
    }
}
