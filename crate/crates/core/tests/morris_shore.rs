mod common;

use common::strategies::*;
use common::*;
use msqhr::linalg::{hermitian_eig, ComplexMatrix};
use msqhr::morris_shore::{decompose, gram_matrices, m2_decompose, MsDecomposition, DEFAULT_RANK_TOL};
use proptest::prelude::*;

fn offdiag_max(m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn projector(ms: &MsDecomposition, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    (
        ComplexMatrix::outer(&ms.bright[n], &ms.bright[n]),
        ComplexMatrix::outer(&ms.upper[n], &ms.upper[n]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn transformed_coupling_is_real_nonnegative_diagonal(v in interaction(8, 4)) {
        let ms = decompose(&v, DEFAULT_RANK_TOL).unwrap();
        let d = ms.transformed_coupling(&v);
        prop_assert!(offdiag_max(&d) <= 1e-10 * v.norm());
        for k in 0..d.rows().min(d.cols()) {
            prop_assert!((d[(k, k)].re - ms.lambdas[k]).abs() <= 1e-10 * v.norm());
            prop_assert!(d[(k, k)].im.abs() <= 1e-10 * v.norm());
            prop_assert!(ms.lambdas[k] >= 0.0);
        }
        let (lo, up) = ms.completeness_residual();
        prop_assert!(lo <= 1e-10 && up <= 1e-10);
        prop_assert!(ms.lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn gram_spectra_agree(v in interaction(8, 4)) {
        let (vvd, vdv) = gram_matrices(&v);
        let mut a = hermitian_eig(&vvd).unwrap().values;
        let mut b = hermitian_eig(&vdv).unwrap().values;
        let s = v.norm() * v.norm();
        prop_assert!(b[0] >= -1e-12 * s);
        a.reverse();
        b.reverse();
        // The min(N, M) largest eigenvalues coincide; the rest of VV† vanish.
        let k = a.len().min(b.len());
        for i in 0..k {
            prop_assert!((a[i] - b[i]).abs() <= 1e-10 * s);
        }
        for x in &a[k..] {
            prop_assert!(x.abs() <= 1e-10 * s);
        }
    }

    #[test]
    fn closed_form_matches_general_route_for_two_upper_states(v in (1usize..=6).prop_flat_map(|n| matrix(n, 2))) {
        prop_assume!(v.column(0).norm() > 1e-2 && v.column(1).norm() > 1e-2);
        let iv = msqhr::morris_shore::InteractionMatrix::new(v).unwrap();
        let general = decompose(&iv, DEFAULT_RANK_TOL).unwrap();
        let closed = m2_decompose(&iv.column(0), &iv.column(1), DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(general.rank(), closed.rank());
        for (a, b) in general.lambdas.iter().zip(&closed.lambdas) {
            prop_assert!((a - b).abs() <= 1e-10 * iv.norm());
        }
        // Channels are compared through their projectors, which are gauge
        // free unless the couplings are degenerate.
        let gap = general.lambdas[0] - general.lambdas[1];
        prop_assume!(gap > 1e-4 * iv.norm());
        for n in 0..general.rank() {
            let (pa, pb) = projector(&general, n);
            let (qa, qb) = projector(&closed, n);
            prop_assert!(pa.max_abs_diff(&qa) <= 1e-8);
            prop_assert!(pb.max_abs_diff(&qb) <= 1e-8);
        }
        let d = closed.transformed_coupling(&iv);
        prop_assert!(offdiag_max(&d) <= 1e-10 * iv.norm());
    }

    #[test]
    fn synthesis_inverts_the_decomposition(v in interaction(6, 3)) {
        let ms = decompose(&v, DEFAULT_RANK_TOL).unwrap();
        let rebuilt = ms.synthesize(&ms.lambdas[..ms.rank()]).unwrap();
        prop_assert!(rebuilt.matrix().max_abs_diff(v.matrix()) <= 1e-10 * v.norm());
    }
}

#[test]
fn rank_deficient_inputs_get_dark_states() {
    // Three upper states driven by only two independent vectors.
    let mut rng = rng(11);
    let a = random_unit_vector(&mut rng, 5);
    let b = random_unit_vector(&mut rng, 5);
    let mut third = a.scale(c(0.3, -0.2));
    third.axpy(c(1.1, 0.0), &b);
    let v = msqhr::morris_shore::InteractionMatrix::from_columns(&[a, b, third]).unwrap();
    let ms = decompose(&v, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(ms.rank(), 2);
    assert_eq!(ms.dark.len(), 3);
    assert_eq!(ms.lambdas[2], 0.0);
    let (lo, up) = ms.completeness_residual();
    assert!(lo < 1e-12 && up < 1e-12);
    assert!(offdiag_max(&ms.transformed_coupling(&v)) < 1e-12);
}
