//! proptest strategies for matrices and vectors.

use msqhr::linalg::{ComplexMatrix, ComplexVector};
use msqhr::morris_shore::InteractionMatrix;
use msqhr::Complex64 as C64;
use proptest::prelude::*;

pub fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |d| ComplexMatrix::new(rows, cols, d).unwrap())
}

/// `N x M` with `1 <= N <= max_n`, `1 <= M <= max_m`, not identically zero.
pub fn interaction(max_n: usize, max_m: usize) -> impl Strategy<Value = InteractionMatrix> {
    (1..=max_n, 1..=max_m)
        .prop_flat_map(|(n, m)| matrix(n, m))
        .prop_filter("nonzero", |m| m.max_abs() > 1e-3)
        .prop_map(|m| InteractionMatrix::new(m).unwrap())
}

pub fn hermitian(max_n: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_n).prop_flat_map(|n| matrix(n, n)).prop_map(|a| {
        let ah = a.adjoint();
        (&a + &ah).scale(C64::new(0.5, 0.0))
    })
}

pub fn unit_vector(n: usize) -> impl Strategy<Value = ComplexVector> {
    prop::collection::vec(complex(), n).prop_filter_map("nonzero", |d| {
        let v = ComplexVector::new(d).unwrap();
        if v.norm() > 0.1 {
            v.normalized()
        } else {
            None
        }
    })
}
