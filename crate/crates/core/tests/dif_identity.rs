mod common;

use common::{centred_law, coefficients, smooth};
use discrete_ito::basis::{gram_schmidt_basis, walsh_completion, walsh_driver_vector, IncrementLaw};
use discrete_ito::dif::{
    decompose_joint_scheme, decompose_multidim, decompose_scheme, decompose_walk_1d, decompose_weak_scheme,
    full_truncation, spanning_defect, CorrectionKey, Realization, StatePoint,
};
use discrete_ito::scheme::{DriverKind, JointLaw, SchemeField};
use proptest::prelude::*;

fn scale(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn bernoulli_coefficients_are_half_sums_and_differences() {
    let law = IncrementLaw::symmetric_bernoulli();
    let basis = gram_schmidt_basis(&law, 2).unwrap();
    let f = |x: f64| 0.3 * x * x * x - x + 2.0;
    for w in [-3.0, 0.0, 5.0] {
        let d = decompose_walk_1d(f, &StatePoint::origin(vec![w]), &law, &basis, 2).unwrap();
        assert!((d.martingale_coeffs[0] - (f(w + 1.0) - f(w - 1.0)) / 2.0).abs() < 1e-14);
        assert!((d.drift_part() - ((f(w + 1.0) + f(w - 1.0)) / 2.0 - f(w))).abs() < 1e-14);
        assert_eq!(d.dt, 1.0);
        assert!(d.corrections.is_empty());
    }
}

#[test]
fn trinomial_square_needs_a_correction() {
    let law = IncrementLaw::unit_trinomial();
    let basis = gram_schmidt_basis(&law, 3).unwrap();
    let d = decompose_walk_1d(|x| x * x, &StatePoint::origin(vec![0.4]), &law, &basis, 3).unwrap();
    assert!(spanning_defect(&d) > 1e-3);
    // Two drivers over three atoms: nothing left over.
    let joint = JointLaw::from_basis(&basis, 2).unwrap();
    let d = decompose_joint_scheme(
        |_, x| x[0] * x[0],
        &StatePoint::origin(vec![0.4, 0.0]),
        &SchemeField::walk(2),
        &joint,
        1.0,
    )
    .unwrap();
    assert!(d.corrections.is_empty() && spanning_defect(&d) == 0.0);
}

#[test]
fn single_precision_walk() {
    let law = IncrementLaw::<f32>::unit_trinomial();
    let basis = gram_schmidt_basis(&law, 3).unwrap();
    let f = |x: f32| x.sin() + x * x;
    let d = decompose_walk_1d(f, &StatePoint::origin(vec![0.5f32]), &law, &basis, 3).unwrap();
    for a in law.atoms().unwrap() {
        let got = d.reconstruct(&Realization::Components(vec![a.point]));
        assert!((got - (f(0.5 + a.point) - f(0.5))).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_reconstruction_is_exact(law in centred_law(6), c in coefficients(), w in -2.0f64..2.0) {
        let atoms = law.atoms().unwrap().len();
        let basis = gram_schmidt_basis(&law, atoms).unwrap();
        let f = smooth(c);
        let d = decompose_walk_1d(f, &StatePoint::origin(vec![w]), &law, &basis, atoms).unwrap();
        for a in law.atoms().unwrap() {
            let truth = f(w + a.point) - f(w);
            let got = d.reconstruct(&Realization::Components(vec![a.point]));
            prop_assert!((got - truth).abs() <= 1e-10 * scale([truth, f(w)]));
        }
    }

    #[test]
    fn drift_is_the_conditional_mean(law in centred_law(5), c in coefficients(), w in -2.0f64..2.0) {
        let basis = gram_schmidt_basis(&law, 2).unwrap();
        let f = smooth(c);
        let d = decompose_walk_1d(f, &StatePoint::origin(vec![w]), &law, &basis, 2).unwrap();
        let mean = law.expect(|x| f(w + x) - f(w)).unwrap();
        prop_assert!((d.drift_part() - mean).abs() <= 1e-12 * scale([mean, f(w)]));
        prop_assert!((d.dt - law.variance()).abs() < 1e-14);
    }

    #[test]
    fn tensor_reconstruction_is_exact(a in centred_law(3), b in centred_law(3), c in coefficients(), t in 0.0f64..1.0) {
        let bases = vec![
            gram_schmidt_basis(&a, a.support_size().unwrap()).unwrap(),
            gram_schmidt_basis(&b, b.support_size().unwrap()).unwrap(),
        ];
        let g = smooth(c);
        let f = move |t: f64, x: &[f64]| g(x[0] - 0.5 * x[1]) * (1.0 + t) + x[0] * x[1];
        let state = StatePoint::new(2, t, vec![0.3, -0.7]);
        let dt = 0.1;
        let laws = [a.clone(), b.clone()];
        let d = decompose_multidim(f, &state, &laws, &bases, full_truncation(&bases), dt).unwrap();
        for xa in a.atoms().unwrap() {
            for xb in b.atoms().unwrap() {
                let next = [0.3 + xa.point, -0.7 + xb.point];
                let truth = f(t + dt, &next) - f(t, &state.state);
                let got = d.reconstruct(&Realization::Components(vec![xa.point, xb.point]));
                prop_assert!((got - truth).abs() <= 1e-10 * scale([truth, f(t, &state.state)]));
            }
        }
    }

    #[test]
    fn scheme_reconstruction_is_exact(law in centred_law(4), c in coefficients(), s in 0.1f64..1.5, m in -1.0f64..1.0) {
        let basis = gram_schmidt_basis(&law, law.support_size().unwrap()).unwrap();
        let field = SchemeField::euler_maruyama_diagonal(
            1,
            move |x: &[f64], o: &mut [f64]| o[0] = s * (1.0 + 0.2 * x[0].sin()),
            move |x: &[f64], o: &mut [f64]| o[0] = m * x[0],
        );
        let g = smooth(c);
        let f = move |_t: f64, x: &[f64]| g(x[0]);
        let state = StatePoint::new(1, 0.25, vec![0.9]);
        let dt = 0.04;
        let laws = [law.clone()];
        let d = decompose_scheme(f, &state, &field, &laws, std::slice::from_ref(&basis), basis.len(), dt).unwrap();
        for a in law.atoms().unwrap() {
            let next = field.step(&state.state, dt, &[a.point]);
            let truth = f(0.29, &next) - f(0.25, &state.state);
            let got = d.reconstruct(&Realization::Components(vec![a.point]));
            prop_assert!((got - truth).abs() <= 1e-10 * scale([truth, g(0.9)]));
        }
    }

    #[test]
    fn walsh_reconstruction_is_exact(n in 1usize..=4, c in coefficients(), x0 in -1.0f64..1.0) {
        let drivers = walsh_driver_vector(n);
        let corrections = walsh_completion(&drivers);
        let field = SchemeField::constant(n, 0.8, -0.2);
        let g = smooth(c);
        let f = move |t: f64, x: &[f64]| g(x.iter().sum::<f64>() + t);
        let state = StatePoint::new(0, 0.0, vec![x0; n]);
        let dt = 0.05;
        let d = decompose_weak_scheme(f, &state, &field, &IncrementLaw::lebesgue_unit(), &drivers, &corrections, dt).unwrap();
        let res = drivers.iter().map(|w| w.max_factor()).max().unwrap();
        let kind = DriverKind::Walsh(drivers.clone());
        for k in 0..(1u32 << res) {
            let u = (f64::from(k) + 0.5) / f64::from(1u32 << res);
            let mut y = vec![0.0; n];
            kind.innovation(&[u], &mut y);
            let truth = f(dt, &field.step(&state.state, dt, &y)) - f(0.0, &state.state);
            let got = d.reconstruct(&Realization::Unit(u));
            prop_assert!((got - truth).abs() <= 1e-10 * scale([truth, f(0.0, &state.state)]));
            // Driver increments are H_j(ξ)√Δt.
            let inc = d.driver_increments(&Realization::Unit(u));
            prop_assert!(inc.iter().zip(&y).all(|(a, b)| (a - b * dt.sqrt()).abs() < 1e-15));
        }
    }

    #[test]
    fn complete_design_has_no_corrections(law in centred_law(4), c in coefficients()) {
        // #G = n + 1: the first n orthonormal polynomials of a law with n + 1
        // atoms, used as a joint driver vector.
        let atoms = law.support_size().unwrap();
        let basis = gram_schmidt_basis(&law, atoms).unwrap();
        let joint = JointLaw::from_basis(&basis, atoms - 1).unwrap();
        let n = joint.dimension();
        let field = SchemeField::constant(n, 0.5, 0.1);
        let g = smooth(c);
        let f = move |_t: f64, x: &[f64]| g(x.iter().enumerate().map(|(i, v)| v * (i as f64 + 1.0)).sum());
        let state = StatePoint::origin(vec![0.2; n]);
        let d = decompose_joint_scheme(f, &state, &field, &joint, 0.1).unwrap();
        prop_assert!(spanning_defect(&d) <= 1e-10);
        for i in 0..joint.len() {
            let truth = f(0.1, &field.step(&state.state, 0.1, &joint.atoms()[i])) - f(0.0, &state.state);
            let got = d.reconstruct(&Realization::Atom(i));
            prop_assert!((got - truth).abs() <= 1e-10 * scale([truth, f(0.0, &state.state)]));
        }
    }

    #[test]
    fn incomplete_design_carries_its_remainder(law in centred_law(5), c in coefficients()) {
        prop_assume!(law.support_size().unwrap() >= 3);
        let atoms = law.support_size().unwrap();
        let basis = gram_schmidt_basis(&law, atoms).unwrap();
        let joint = JointLaw::from_basis(&basis, 1).unwrap();
        let g = smooth(c);
        let d = decompose_joint_scheme(move |_, x: &[f64]| g(x[0]), &StatePoint::origin(vec![0.1]), &SchemeField::walk(1), &joint, 1.0)
            .unwrap();
        prop_assert_eq!(d.corrections.len(), atoms - 2);
        prop_assert!(d.corrections.iter().all(|(k, _)| matches!(k, CorrectionKey::Completion(_))));
        for i in 0..joint.len() {
            let truth = g(0.1 + joint.atoms()[i][0]) - g(0.1);
            prop_assert!((d.reconstruct(&Realization::Atom(i)) - truth).abs() <= 1e-10 * scale([truth, g(0.1)]));
        }
    }
}
