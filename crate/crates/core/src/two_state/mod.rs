//! Analytic propagators of the independent MS two-state systems.
//!
//! Each MS channel evolves under
//!
//! ```text
//! h(t) = [ 0        λ f(t) ]
//!        [ λ f(t)   Δ      ]
//! ```
//!
//! whose propagator over `[t_i, t_f]` is written with Cayley-Klein parameters
//! as `[[a, b], [-b* e^{-iδ}, a* e^{-iδ}]]`, `δ = ∫Δ dt`.

mod design;
mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ln_gamma;

pub use design::{design_realization, DesignConstraints, DesignMode, Realization};
pub use quadrature::integrate;

/// Absolute error target for envelope integrals.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Far-off-resonance validity threshold: `|Δ| >= FAR_OFF_RATIO * max λ`.
pub const FAR_OFF_RATIO: f64 = 5.0;

/// Envelope shape `f(t)`, bounded by unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    /// `sech(t/T)`
    Sech,
    /// `exp(-t²/T²)`
    Gaussian,
    /// `1` throughout the window.
    Constant,
}

/// The envelope shared by every coupling, with time scale `T` and a
/// truncation window given in units of `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub t_scale: f64,
    /// `(t_i, t_f)` in units of `T`.
    pub window: (f64, f64),
}

impl PulseSpec {
    pub fn new(shape: PulseShape, t_scale: f64, window: (f64, f64)) -> Result<Self> {
        if !(t_scale > 0.0 && t_scale.is_finite()) {
            return Err(Error::Validation(format!(
                "pulse time scale must be positive, got {t_scale}"
            )));
        }
        if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
            return Err(Error::Validation(format!(
                "pulse window must satisfy t_i < t_f, got [{}, {}]",
                window.0, window.1
            )));
        }
        Ok(Self { shape, t_scale, window })
    }

    /// `sech(t/T)` on `[-40T, 40T]`, where the tails are below 1e-17.
    pub fn sech(t_scale: f64) -> Self {
        Self {
            shape: PulseShape::Sech,
            t_scale,
            window: (-40.0, 40.0),
        }
    }

    pub fn with_window(self, window: (f64, f64)) -> Result<Self> {
        Self::new(self.shape, self.t_scale, window)
    }

    /// `f(t)`, with `t` in absolute time units.
    pub fn envelope(&self, t: f64) -> f64 {
        let x = t / self.t_scale;
        match self.shape {
            PulseShape::Sech => 1.0 / x.cosh(),
            PulseShape::Gaussian => (-x * x).exp(),
            PulseShape::Constant => 1.0,
        }
    }

    /// Window end points in absolute time.
    pub fn start(&self) -> f64 {
        self.window.0 * self.t_scale
    }

    pub fn end(&self) -> f64 {
        self.window.1 * self.t_scale
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// `∫ f(t) dt` over the window.
    pub fn envelope_integral(&self) -> f64 {
        match self.shape {
            PulseShape::Constant => self.duration(),
            _ => integrate(|t| self.envelope(t), self.start(), self.end(), QUADRATURE_TOL),
        }
    }

    /// `∫ f²(t) dt` over the window.
    pub fn envelope_square_integral(&self) -> f64 {
        match self.shape {
            PulseShape::Constant => self.duration(),
            _ => integrate(|t| self.envelope(t).powi(2), self.start(), self.end(), QUADRATURE_TOL),
        }
    }
}

/// Common detuning `Δ(t)` of every transition, in units of `1/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetuningSpec {
    Constant(f64),
}

impl DetuningSpec {
    pub fn new_constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Validation(format!("detuning must be finite, got {value}")));
        }
        Ok(DetuningSpec::Constant(value))
    }

    pub fn value_at(&self, _t: f64) -> f64 {
        match *self {
            DetuningSpec::Constant(d) => d,
        }
    }

    /// `δ = ∫ Δ dt` over the pulse window.
    pub fn accumulated_phase(&self, pulse: &PulseSpec) -> f64 {
        match *self {
            DetuningSpec::Constant(d) => d * pulse.duration(),
        }
    }
}

/// Cayley-Klein parameters of a two-state propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyKlein {
    pub a: C64,
    pub b: C64,
    /// Accumulated detuning phase `δ`.
    pub delta: f64,
}

impl CayleyKlein {
    pub const IDENTITY: CayleyKlein = CayleyKlein {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        delta: 0.0,
    };

    /// `a = e^{iφ}`, `b = 0`: the reflection condition holds exactly.
    pub fn phase_only(phi: f64, delta: f64) -> Self {
        Self {
            a: C64::from_polar(1.0, phi),
            b: C64::new(0.0, 0.0),
            delta,
        }
    }

    /// `| |a|² + |b|² - 1 |`
    pub fn normalization_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }

    /// The 2x2 propagator `[[a, b], [-b* e^{-iδ}, a* e^{-iδ}]]`, row-major.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let e = C64::from_polar(1.0, -self.delta);
        [[self.a, self.b], [-self.b.conj() * e, self.a.conj() * e]]
    }

    /// Re-expresses parameters given for a pulse centred at `t = 0` (the
    /// convention of [`rosen_zener_ck`]) for evolution from `t_start` to
    /// `t_end` under a constant detuning: `b` picks up `e^{iΔ t_start}` and
    /// `δ = Δ (t_end - t_start)`.
    pub fn over_window(self, detuning: f64, t_start: f64, t_end: f64) -> Self {
        Self {
            a: self.a,
            b: self.b * C64::from_polar(1.0, detuning * t_start),
            delta: detuning * (t_end - t_start),
        }
    }
}

/// Temporal pulse area `A = 2λ ∫ f dt` of an MS channel.
pub fn pulse_area(pulse: &PulseSpec, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    2.0 * lambda * pulse.envelope_integral()
}

/// Exactly resonant channel: `a = cos(A/2)`, `b = -i sin(A/2)`.
pub fn resonant_ck(pulse: &PulseSpec, lambda: f64) -> CayleyKlein {
    let half = 0.5 * pulse_area(pulse, lambda);
    CayleyKlein {
        a: C64::new(half.cos(), 0.0),
        b: C64::new(0.0, -half.sin()),
        delta: 0.0,
    }
}

/// Rosen-Zener channel: `f = sech(t/T)`, constant `Δ`, infinite duration.
///
/// `a = Γ²(½ + ½iΔT) / [Γ(½ + λT + ½iΔT) Γ(½ - λT + ½iΔT)]` and
/// `b = -i sin(πλT) / cosh(½πΔT)`, with `b` referenced to the pulse centre
/// (see [`CayleyKlein::over_window`]) and `δ = 0`. Only `|b|` is fixed by the
/// model; its phase is the one that reduces to [`resonant_ck`] at `Δ = 0`.
pub fn rosen_zener_ck(lambda_t: f64, delta_t: f64) -> Result<CayleyKlein> {
    if !(lambda_t >= 0.0) || !lambda_t.is_finite() || !delta_t.is_finite() {
        return Err(Error::Validation(format!(
            "Rosen-Zener needs finite λT >= 0 and finite ΔT, got λT = {lambda_t}, ΔT = {delta_t}"
        )));
    }
    if lambda_t == 0.0 {
        return Ok(CayleyKlein::IDENTITY);
    }
    let x = 0.5 * delta_t;
    let num = 2.0 * ln_gamma(C64::new(0.5, x))?;
    let d1 = ln_gamma(C64::new(0.5 + lambda_t, x))?;
    let a = match ln_gamma(C64::new(0.5 - lambda_t, x)) {
        Ok(d2) => (num - d1 - d2).exp(),
        // 1/Γ vanishes at its poles: λT = k + ½ on resonance.
        Err(Error::Domain(_)) => C64::new(0.0, 0.0),
        Err(e) => return Err(e),
    };
    let b = C64::new(0.0, -(PI * lambda_t).sin() / (0.5 * PI * delta_t).cosh());
    Ok(CayleyKlein { a, b, delta: 0.0 })
}

/// Rosen-Zener channel over the window of `pulse` (which must be a sech).
pub fn rosen_zener_ck_windowed(pulse: &PulseSpec, lambda: f64, detuning: f64) -> Result<CayleyKlein> {
    if pulse.shape != PulseShape::Sech {
        return Err(Error::UnsupportedMode(format!(
            "the Rosen-Zener model needs a sech envelope, got {:?}",
            pulse.shape
        )));
    }
    let t = pulse.t_scale;
    Ok(rosen_zener_ck(lambda * t, detuning * t)?.over_window(detuning, pulse.start(), pulse.end()))
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Rosen-Zener reflection phase at `λT = l`: `φ = 2 arg Π_{k<l} [ΔT + i(2k+1)]`,
/// reduced to `(-π, π]`.
pub fn rz_phase(l: u32, delta_t: f64) -> f64 {
    wrap_phase(rz_phase_unwrapped(l, delta_t))
}

/// Same as [`rz_phase`] without branch reduction: a continuous function of
/// `ΔT` decreasing from `2lπ` to `0`.
pub(crate) fn rz_phase_unwrapped(l: u32, delta_t: f64) -> f64 {
    (0..l).map(|k| 2.0 * f64::from(2 * k + 1).atan2(delta_t)).sum()
}

/// Adiabatic-elimination phase `φ ≈ (λ²/Δ) ∫ f² dt` for a far-off-resonant
/// channel. Check [`far_off_valid`] for the regime.
pub fn far_off_phase(pulse: &PulseSpec, lambda: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::Domain(format!(
            "far-off-resonant phase needs a nonzero finite detuning, got {detuning}"
        )));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda * lambda / detuning * pulse.envelope_square_integral())
}

/// Heuristic adiabatic-elimination check, `|Δ| >= 5 max λ`. Advisory only.
pub fn far_off_valid(max_lambda: f64, detuning: f64) -> bool {
    detuning.abs() >= FAR_OFF_RATIO * max_lambda
}

/// Far-off-resonant channel treated as an exact phase gate.
pub fn far_off_ck(pulse: &PulseSpec, lambda: f64, detuning: f64) -> Result<CayleyKlein> {
    let phi = far_off_phase(pulse, lambda, detuning)?;
    Ok(CayleyKlein::phase_only(phi, detuning * pulse.duration()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_pulse(length: f64) -> PulseSpec {
        PulseSpec::new(PulseShape::Constant, 1.0, (0.0, length)).unwrap()
    }

    #[test]
    fn pulse_validation() {
        assert!(PulseSpec::new(PulseShape::Sech, 1.0, (1.0, -1.0)).is_err());
        assert!(PulseSpec::new(PulseShape::Sech, 0.0, (-1.0, 1.0)).is_err());
        assert!(DetuningSpec::new_constant(f64::NAN).is_err());
    }

    #[test]
    fn envelopes_are_bounded_by_one() {
        for shape in [PulseShape::Sech, PulseShape::Gaussian, PulseShape::Constant] {
            let p = PulseSpec::new(shape, 2.0, (-10.0, 10.0)).unwrap();
            for k in -100..=100 {
                let f = p.envelope(0.2 * f64::from(k));
                assert!((0.0..=1.0).contains(&f));
            }
        }
    }

    #[test]
    fn pulse_areas() {
        assert_eq!(pulse_area(&PulseSpec::sech(1.0), 0.0), 0.0);
        assert!((pulse_area(&PulseSpec::sech(1.0), 1.0) - 2.0 * PI).abs() < 1e-8);
        assert!((pulse_area(&constant_pulse(3.0), 1.0) - 6.0).abs() < 1e-15);
        // Gaussian: 2λ√π T
        let g = PulseSpec::new(PulseShape::Gaussian, 1.5, (-20.0, 20.0)).unwrap();
        assert!((pulse_area(&g, 0.7) - 2.0 * 0.7 * PI.sqrt() * 1.5).abs() < 1e-10);
    }

    #[test]
    fn resonant_parameters() {
        let p = constant_pulse(1.0);
        let id = resonant_ck(&p, 0.0);
        assert_eq!((id.a, id.b), (C64::new(1.0, 0.0), C64::new(0.0, 0.0)));
        // A = π
        let pi = resonant_ck(&p, PI / 2.0);
        assert!(pi.a.norm() < 1e-15 && (pi.b.norm() - 1.0).abs() < 1e-15);
        // A = 2π
        let two_pi = resonant_ck(&p, PI);
        assert!((two_pi.a + 1.0).norm() < 1e-15 && two_pi.b.norm() < 1e-15);
    }

    #[test]
    fn rosen_zener_special_values() {
        let zero = rosen_zener_ck(0.0, 3.0).unwrap();
        assert_eq!(zero.a, C64::new(1.0, 0.0));
        let res = rosen_zener_ck(1.0, 0.0).unwrap();
        assert!((res.a + 1.0).norm() < 1e-13, "{:?}", res.a);
        let half = rosen_zener_ck(0.5, 0.0).unwrap();
        assert_eq!(half.a, C64::new(0.0, 0.0));
        assert!((half.b - C64::new(0.0, -1.0)).norm() < 1e-15);
        for l in 1..=4 {
            for dt in [-7.0, -0.3, 0.0, 1.0, 12.0] {
                let ck = rosen_zener_ck(f64::from(l), dt).unwrap();
                assert!((ck.a.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rosen_zener_modulus_law() {
        for &(lt, dt) in &[(0.3, 0.0), (1.7, 2.5), (2.2, -4.0), (0.05, 0.1)] {
            let ck = rosen_zener_ck(lt, dt).unwrap();
            let expect = 1.0 - (PI * lt).sin().powi(2) / (0.5 * PI * dt).cosh().powi(2);
            assert!((ck.a.norm_sqr() - expect).abs() < 1e-10);
            assert!(ck.normalization_defect() < 1e-10);
        }
    }

    #[test]
    fn rz_phase_values() {
        assert_eq!(rz_phase(0, 3.0), 0.0);
        assert!((rz_phase(1, 1.0) - PI / 2.0).abs() < 1e-15);
        assert!((rz_phase(1, 0.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn far_off_j32_phases() {
        let p = PulseSpec::sech(1.0);
        let phi1 = far_off_phase(&p, 106.3f64.sqrt(), 80.0).unwrap();
        let phi2 = far_off_phase(&p, 38.2f64.sqrt(), 80.0).unwrap();
        assert!((phi1 - 2.6575).abs() < 1e-9);
        assert!((phi2 - 0.955).abs() < 1e-9);
        assert!((phi1 - 2.65772).abs() < 1e-3);
        assert!((phi2 - 0.954776).abs() < 1e-3);
        assert_eq!(far_off_phase(&p, 0.0, 80.0).unwrap(), 0.0);
        assert!(matches!(far_off_phase(&p, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn far_off_gaussian_integral() {
        let g = PulseSpec::new(PulseShape::Gaussian, 1.0, (-20.0, 20.0)).unwrap();
        assert!((g.envelope_square_integral() - (PI / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn far_off_validity_flag() {
        assert!(far_off_valid(10.3, 80.0));
        assert!(!far_off_valid(20.0, 80.0));
    }

    #[test]
    fn window_shift_keeps_normalization() {
        let ck = rosen_zener_ck(0.8, 1.3).unwrap().over_window(1.3, -40.0, 40.0);
        assert!(ck.normalization_defect() < 1e-12);
        assert!((ck.delta - 104.0).abs() < 1e-12);
        let m = ck.matrix();
        // det = e^{-iδ}
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - C64::from_polar(1.0, -ck.delta)).norm() < 1e-12);
    }
}
