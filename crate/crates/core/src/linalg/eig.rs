//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Relative tolerance for the hermiticity precondition.
pub const HERMITIAN_TOL: f64 = 1e-12;

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const CLUSTER_GAP: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `H = X diag(values) X†`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k)
    }
}

/// Returns an error naming the worst entry pair if `h` is not Hermitian
/// within `HERMITIAN_TOL * ||h||`.
pub fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Validation(format!(
            "expected a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let n = h.rows();
    let mut worst = (0, 0, 0.0_f64);
    for i in 0..n {
        for j in i..n {
            let d = (h[(i, j)] - h[(j, i)].conj()).norm();
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    if worst.2 > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian {
            row: worst.0,
            col: worst.1,
            deviation: worst.2,
        });
    }
    Ok(())
}

/// Diagonalises a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is scaled so that its
/// largest-magnitude component is real and positive; eigenvectors of a
/// degenerate cluster are re-orthonormalised, and any basis of the cluster
/// is a valid answer.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.rows();
    // Symmetrise so the iteration starts from an exactly Hermitian matrix.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj()));
    let mut x = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) < OFF_DIAGONAL_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, &mut x, p, q);
                }
            }
        }
        if off_diagonal_norm(&a) >= OFF_DIAGONAL_TOL * scale * 10.0 {
            return Err(Error::Consistency(format!(
                "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut columns: Vec<ComplexVector> = order.iter().map(|&k| x.column(k)).collect();

    // Re-orthonormalise within clusters of (near-)degenerate eigenvalues.
    let gap = CLUSTER_GAP * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < gap {
            end += 1;
        }
        if end - start > 1 {
            for k in start..end {
                let (done, rest) = columns.split_at_mut(k);
                let v = &mut rest[0];
                for u in &done[start..k] {
                    let proj = u.dot(v);
                    v.axpy(-proj, u);
                }
                if let Some(unit) = v.normalized() {
                    *v = unit;
                }
            }
        }
        start = end;
    }

    for v in &mut columns {
        fix_phase(v);
    }

    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_columns(n, &columns),
    })
}

/// True iff `||M†M - I||_max <= tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Validation(format!(
            "unitarity check needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let g = &m.adjoint() * m;
    Ok(g.max_abs_diff(&ComplexMatrix::identity(m.rows())) <= tol)
}

/// Makes the largest-magnitude component real and positive. Ties within a
/// relative 1e-12 go to the lowest index.
pub(crate) fn fix_phase(v: &mut ComplexVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let k = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap();
    let phase = v[k].conj() / v[k].norm();
    *v = v.scale(phase);
    v[k] = C64::new(v[k].re, 0.0);
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, x: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Phase e^{-i arg g} on column q makes the pivot real, then a real rotation.
    let phase = g.conj() / g_abs;
    let zeta = (aqq - app) / (2.0 * g_abs);
    let t = if zeta.is_infinite() {
        0.0
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = D R with D = diag(1, phase) on (p, q), R = [[c, s], [-s, c]].
    let gpp = C64::new(c, 0.0);
    let gpq = C64::new(s, 0.0);
    let gqp = phase * (-s);
    let gqq = phase * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let xkp = x[(k, p)];
        let xkq = x[(k, q)];
        x[(k, p)] = xkp * gpp + xkq * gqp;
        x[(k, q)] = xkp * gpq + xkq * gqq;
    }
}
