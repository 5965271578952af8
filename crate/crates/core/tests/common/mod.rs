//! Fixtures and independent reference computations shared by the
//! integration tests.
#![allow(dead_code)]

pub mod strategies;

use msqhr::linalg::{ComplexMatrix, ComplexVector};
use msqhr::linkages::{build_linkage, HalfInt, LinkageSpec, PolarizationAmplitudes};
use msqhr::morris_shore::InteractionMatrix;
use msqhr::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the complex unit disc.
pub fn disc(rng: &mut impl Rng) -> C64 {
    let r = rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| disc(rng))
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::new((0..n).map(|_| disc(rng)).collect()).unwrap();
        if let Some(u) = v.normalized() {
            if v.norm() > 1e-3 {
                return u;
            }
        }
    }
}

/// Haar-ish random unitary from Gram-Schmidt on random columns.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_unit_vector(rng, n);
        for _ in 0..2 {
            for q in &cols {
                let p = q.dot(&v);
                v.axpy(-p, q);
            }
        }
        if let Some(u) = v.normalized() {
            if v.norm() > 1e-6 {
                cols.push(u);
            }
        }
    }
    ComplexMatrix::from_columns(n, &cols)
}

/// The J=3/2 ↔ 1/2 linkage with every polarization at `v / T`.
pub fn j32_linkage(v: f64) -> InteractionMatrix {
    build_linkage(&LinkageSpec::TwoLevel {
        j_lower: HalfInt::from_twice(3),
        j_upper: HalfInt::from_twice(1),
        pol: PolarizationAmplitudes::uniform(v),
    })
    .unwrap()
    .matrix
}

/// Exact MS couplings squared of the 8.5/T linkage: 72.25 (1 ± √2/3).
pub fn j32_lambda_sq_exact() -> [f64; 2] {
    let base = 8.5f64 * 8.5;
    let r = 2f64.sqrt() / 3.0;
    [base * (1.0 + r), base * (1.0 - r)]
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_n = 1`) of a
/// square matrix by the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &ComplexMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1];
        m = &(a * &m) + &ComplexMatrix::identity(n).scale(prev);
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}

/// All roots of a monic polynomial by Durand-Kerner iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * z + k);
    let bound = 1.0 + coeffs[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let mut den = c(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    roots
}

/// Reference eigenvalues of a hermitian matrix, ascending.
pub fn reference_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = poly_roots(&char_poly(h)).iter().map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Classic fixed-step RK4 for `i dC/dt = H(t) C`, independent of the
/// library integrator.
pub fn rk4_schrodinger(
    h: impl Fn(f64) -> ComplexMatrix,
    t0: f64,
    t1: f64,
    steps: usize,
    c0: &ComplexVector,
) -> ComplexVector {
    let dt = (t1 - t0) / steps as f64;
    let minus_i = c(0.0, -1.0);
    let f = |t: f64, y: &ComplexVector| h(t).mul_vec(y).scale(minus_i);
    let mut y = c0.clone();
    for k in 0..steps {
        let t = t0 + dt * k as f64;
        let k1 = f(t, &y);
        let mut y2 = y.clone();
        y2.axpy(c(0.5 * dt, 0.0), &k1);
        let k2 = f(t + 0.5 * dt, &y2);
        let mut y3 = y.clone();
        y3.axpy(c(0.5 * dt, 0.0), &k2);
        let k3 = f(t + 0.5 * dt, &y3);
        let mut y4 = y.clone();
        y4.axpy(c(dt, 0.0), &k3);
        let k4 = f(t + dt, &y4);
        y.axpy(c(dt / 6.0, 0.0), &k1);
        y.axpy(c(dt / 3.0, 0.0), &k2);
        y.axpy(c(dt / 3.0, 0.0), &k3);
        y.axpy(c(dt / 6.0, 0.0), &k4);
    }
    y
}
