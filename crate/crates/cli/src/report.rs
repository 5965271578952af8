//! JSON encodings of complex quantities: `[re, im]` pairs.

use msqhr::linalg::{ComplexMatrix, ComplexVector};
use msqhr::Complex64;

use crate::config::Cx;

pub fn cx(z: Complex64) -> Cx {
    [z.re, z.im]
}

pub fn vector(v: &ComplexVector) -> Vec<Cx> {
    v.iter().copied().map(cx).collect()
}

pub fn matrix(m: &ComplexMatrix) -> Vec<Vec<Cx>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|k| cx(m[(i, k)])).collect())
        .collect()
}
