mod common;

use std::f64::consts::PI;

use common::*;
use msqhr::dynamics::{integrate, SimulationProblem};
use msqhr::linalg::{ComplexMatrix, ComplexVector};
use msqhr::morris_shore::InteractionMatrix;
use msqhr::two_state::{
    design_realization, far_off_ck, far_off_phase, resonant_ck, rosen_zener_ck, rosen_zener_ck_windowed, rz_phase,
    wrap_phase, DesignConstraints, DesignMode, DetuningSpec, PulseShape, PulseSpec, Realization,
};
use proptest::prelude::*;

fn two_state(lambda: f64, detuning: f64, pulse: PulseSpec) -> SimulationProblem {
    SimulationProblem::new(
        InteractionMatrix::new(ComplexMatrix::identity(1).scale(c(lambda, 0.0))).unwrap(),
        pulse,
        DetuningSpec::new_constant(detuning).unwrap(),
        ComplexVector::basis(2, 0),
        2,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn constructors_are_normalized(lambda_t in 0.0f64..6.0, delta_t in -30.0f64..30.0) {
        let rz = rosen_zener_ck(lambda_t, delta_t).unwrap();
        prop_assert!(rz.normalization_defect() <= 1e-10);
        let w = rosen_zener_ck_windowed(&PulseSpec::sech(1.0), lambda_t, delta_t).unwrap();
        prop_assert!(w.normalization_defect() <= 1e-10);
        let g = PulseSpec::new(PulseShape::Gaussian, 1.0, (-8.0, 8.0)).unwrap();
        prop_assert!(resonant_ck(&g, lambda_t).normalization_defect() <= 1e-10);
        if delta_t != 0.0 {
            prop_assert!(far_off_ck(&g, lambda_t, delta_t).unwrap().normalization_defect() <= 1e-10);
        }
    }

    #[test]
    fn rz_phase_is_arg_a(l in 1u32..=3, delta_t in -10.0f64..10.0) {
        let a = rosen_zener_ck(f64::from(l), delta_t).unwrap().a;
        prop_assert!(wrap_phase(a.arg() - rz_phase(l, delta_t)).abs() <= 1e-9);
        prop_assert!((a.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rosen_zener_design_hits_its_target(target in 0.01f64..PI, l in 1u32..=3) {
        let c = DesignConstraints { rz_order: Some(l), ..Default::default() };
        let r = design_realization(&[target, target], DesignMode::RosenZener, &PulseSpec::sech(1.0), &c).unwrap();
        let Realization::RosenZener { delta_t, order, .. } = r else { panic!() };
        prop_assert!(wrap_phase(rz_phase(order, delta_t) - target).abs() <= 1e-10);
        let a = rosen_zener_ck(f64::from(order), delta_t).unwrap().a;
        prop_assert!(wrap_phase(a.arg() - target).abs() <= 1e-9);
    }
}

#[test]
fn rosen_zener_matches_numeric_integration() {
    use rand::Rng;
    let mut rng = rng(40);
    let pulse = PulseSpec::sech(1.0);
    for _ in 0..50 {
        let (l, d) = (rng.gen_range(0.0..=3.0), rng.gen_range(-5.0..=5.0));
        let ck = rosen_zener_ck_windowed(&pulse, l, d).unwrap();
        let out = integrate(&two_state(l, d, pulse), 1e-11).unwrap().final_state;
        assert!((out[0] - ck.a).norm() <= 1e-6, "λT = {l}, ΔT = {d}");
        assert!((out[1] - ck.matrix()[1][0]).norm() <= 1e-6, "λT = {l}, ΔT = {d}");
    }
}

#[test]
fn gaussian_resonant_pulse_matches_numeric_integration() {
    let pulse = PulseSpec::new(PulseShape::Gaussian, 1.0, (-9.0, 9.0)).unwrap();
    for lambda in [0.3, 0.8862269254527579, 2.1] {
        let ck = resonant_ck(&pulse, lambda);
        let out = integrate(&two_state(lambda, 0.0, pulse), 1e-11).unwrap().final_state;
        assert!((out[0] - ck.a).norm() < 1e-8);
        assert!((out[1] - ck.matrix()[1][0]).norm() < 1e-8);
    }
}

/// Adiabatic-elimination accuracy over the regime the J=3/2↔1/2 example uses.
/// The first-order phase misses a correction of order λ⁴/Δ³; at ΔT = 80 it
/// exceeds 0.01 once λ²T² passes roughly 60.
#[test]
fn far_off_phase_error_bound() {
    let pulse = PulseSpec::sech(1.0);
    let delta = 80.0;
    let mut worst = (0.0_f64, 0.0_f64);
    for k in 1..=22 {
        let lambda_sq = 5.0 * f64::from(k);
        let lambda = lambda_sq.sqrt();
        let approx = far_off_phase(&pulse, lambda, delta).unwrap();
        let a = integrate(&two_state(lambda, delta, pulse), 1e-11).unwrap().final_state[0];
        let err = wrap_phase(approx - a.arg()).abs();
        if err > worst.0 {
            worst = (err, lambda_sq);
        }
    }
    assert!(
        worst.0 <= 0.01,
        "|φ_approx - arg a| = {:.4} at λ²T² = {}",
        worst.0,
        worst.1
    );
}
