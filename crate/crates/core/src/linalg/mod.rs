//! Dense complex linear algebra and special functions.

mod eig;
mod gamma;
mod matrix;

pub use eig::{check_hermitian, hermitian_eig, is_unitary, HermitianEigen, HERMITIAN_TOL};
pub use gamma::{complex_gamma, ln_gamma};
pub use matrix::{ComplexMatrix, ComplexVector};

/// Modified Gram-Schmidt: extends `basis` (assumed orthonormal) with unit
/// vectors drawn from the canonical basis of dimension `dim` until it spans
/// the whole space. Returns only the new vectors.
pub fn orthonormal_complement(basis: &[ComplexVector], dim: usize) -> Vec<ComplexVector> {
    let mut all: Vec<ComplexVector> = basis.to_vec();
    let mut added = Vec::new();
    for seed in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = ComplexVector::basis(dim, seed);
        // Two passes of MGS keep the result orthogonal to round-off.
        for _ in 0..2 {
            for u in &all {
                let proj = u.dot(&v);
                v.axpy(-proj, u);
            }
        }
        if v.norm() > 1e-6 {
            let unit = v.normalized().expect("nonzero after projection");
            all.push(unit.clone());
            added.push(unit);
        }
    }
    added
}
