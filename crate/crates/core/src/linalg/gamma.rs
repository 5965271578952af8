//! Euler's Gamma function on the complex plane.
//!
//! Lanczos approximation (g = 7, nine terms) evaluated in log space, extended
//! to `Re z < 1/2` by the reflection formula. Working with `ln Γ` keeps ratios
//! of large-imaginary-argument values finite where `Γ` itself would underflow.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln(2π)/2`
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Γ(z). Fails at the poles z = 0, -1, -2, ...
pub fn complex_gamma(z: C64) -> Result<C64> {
    Ok(ln_gamma(z)?.exp())
}

/// A logarithm of Γ(z). The branch is unspecified: only `exp` of the result
/// (or differences that are exponentiated) is meaningful.
pub fn ln_gamma(z: C64) -> Result<C64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("Gamma argument {z} is not finite")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Domain(format!("Gamma has a pole at {}", z.re)));
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1-z) = π / sin(πz)
        let ln_sin = ln_sin_pi(z);
        Ok(C64::new(PI.ln(), 0.0) - ln_sin - lanczos_ln_gamma(C64::new(1.0, 0.0) - z))
    } else {
        Ok(lanczos_ln_gamma(z))
    }
}

/// ln Γ(z) for Re z >= 1/2.
fn lanczos_ln_gamma(z: C64) -> C64 {
    let z = z - 1.0;
    let mut series = C64::new(LANCZOS_COEFFS[0], 0.0);
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// A logarithm of sin(πz), stable for large |Im z|.
fn ln_sin_pi(z: C64) -> C64 {
    // Shift by the nearest integer k: sin(π(w + k)) = (-1)^k sin(πw).
    let k = z.re.round();
    let w = C64::new(z.re - k, z.im);
    let sign_ln = if (k as i64).rem_euclid(2) == 1 {
        C64::new(0.0, PI)
    } else {
        C64::new(0.0, 0.0)
    };
    if w.im.abs() < 20.0 {
        return (w * PI).sin().ln() + sign_ln;
    }
    // sin(πw) = (e^{iπw} - e^{-iπw}) / 2i. For Im w > 0 the second term
    // dominates: sin(πw) = -e^{-iπw} (1 - e^{2iπw}) / 2i = e^{-iπw}(1 - e^{2iπw}) i/2.
    if w.im > 0.0 {
        let small = (C64::new(0.0, 2.0 * PI) * w).exp();
        C64::new(0.0, -PI) * w
            + (C64::new(1.0, 0.0) - small).ln()
            + C64::new(0.5, 0.0).ln()
            + C64::new(0.0, PI / 2.0)
            + sign_ln
    } else {
        ln_sin_pi_conj(w) + sign_ln
    }
}

fn ln_sin_pi_conj(w: C64) -> C64 {
    // sin(π w̄) = conj(sin(π w))
    ln_sin_pi(w.conj()).conj()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn factorial_values() {
        assert!(rel_err(complex_gamma(C64::new(1.0, 0.0)).unwrap(), C64::new(1.0, 0.0)) < 1e-14);
        assert!(rel_err(complex_gamma(C64::new(5.0, 0.0)).unwrap(), C64::new(24.0, 0.0)) < 1e-14);
        let sqrt_pi = PI.sqrt();
        assert!(rel_err(complex_gamma(C64::new(0.5, 0.0)).unwrap(), C64::new(sqrt_pi, 0.0)) < 1e-14);
        // Γ(-1/2) = -2√π
        assert!(
            rel_err(
                complex_gamma(C64::new(-0.5, 0.0)).unwrap(),
                C64::new(-2.0 * sqrt_pi, 0.0)
            ) < 1e-13
        );
    }

    #[test]
    fn poles_are_domain_errors() {
        for k in [0.0, -1.0, -7.0] {
            assert!(matches!(complex_gamma(C64::new(k, 0.0)), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn half_line_modulus_matches_reflection_identity() {
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        for y in [0.5, 2.0, 10.0, 100.0, 200.0] {
            let g = ln_gamma(C64::new(0.5, y)).unwrap();
            let lhs_ln = 2.0 * g.re;
            let rhs_ln = PI.ln() - ln_cosh(PI * y);
            assert!((lhs_ln - rhs_ln).abs() < 1e-12, "y = {y}: {lhs_ln} vs {rhs_ln}");
        }
    }

    #[test]
    fn reflection_branch_handles_large_imaginary_parts() {
        // Γ(z̄) = conj Γ(z) and the recurrence across the Re z = 1/2 seam.
        let z = C64::new(-3.3, 150.0);
        let a = ln_gamma(z + 1.0).unwrap();
        let b = ln_gamma(z).unwrap() + z.ln();
        assert!(((a - b).exp() - 1.0).norm() < 1e-11);
        let c = ln_gamma(z.conj()).unwrap();
        assert!(((c - ln_gamma(z).unwrap().conj()).exp() - 1.0).norm() < 1e-12);
    }

    fn ln_cosh(x: f64) -> f64 {
        let a = x.abs();
        a + (0.5 * (1.0 + (-2.0 * a).exp())).ln()
    }
}
