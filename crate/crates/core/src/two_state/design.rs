//! Inverse problem: pulse parameters that realise prescribed reflection
//! phases `φ_n` in every MS channel.

use std::f64::consts::PI;

use super::{rz_phase, rz_phase_unwrapped, wrap_phase, PulseShape, PulseSpec};
use crate::error::{Error, Result};

/// Which analytic realisation to invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMode {
    /// sech pulses with `λ_n T = l` and a tuned detuning. One shared phase.
    RosenZener,
    /// Large detuning; each channel's phase set through its coupling.
    FarOff,
}

/// Caller-side constraints for [`design_realization`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DesignConstraints {
    /// Rosen-Zener order `l` (`λ_n T = l`). Defaults to 1.
    pub rz_order: Option<u32>,
    /// Far-off: fixed detuning `Δ` in `1/T`.
    pub detuning: Option<f64>,
    /// Far-off: largest coupling allowed; used to choose `Δ` when no detuning is given.
    pub max_lambda: Option<f64>,
}

/// Designed pulse parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    RosenZener {
        /// `λ_n T`, shared by every channel (0 for the identity design).
        order: u32,
        /// Detuning `ΔT`.
        delta_t: f64,
        /// MS couplings `λ_n` in `1/T`.
        lambdas: Vec<f64>,
        /// `|φ(ΔT) - target|` after solving.
        residual: f64,
    },
    FarOff {
        /// Detuning `Δ` in `1/T`.
        detuning: f64,
        /// `λ_n²` in `1/T²`.
        lambda_sq: Vec<f64>,
        /// Whether `|Δ| >= 5 max λ` holds.
        adiabatic_ok: bool,
    },
}

impl Realization {
    /// MS couplings `λ_n` of the design.
    pub fn lambdas(&self) -> Vec<f64> {
        match self {
            Realization::RosenZener { lambdas, .. } => lambdas.clone(),
            Realization::FarOff { lambda_sq, .. } => lambda_sq.iter().map(|x| x.sqrt()).collect(),
        }
    }

    /// Common detuning `Δ` in `1/T`.
    pub fn detuning(&self, pulse: &PulseSpec) -> f64 {
        match self {
            Realization::RosenZener { delta_t, .. } => delta_t / pulse.t_scale,
            Realization::FarOff { detuning, .. } => *detuning,
        }
    }
}

const PHASE_MATCH_TOL: f64 = 1e-12;

/// Finds pulse parameters producing the reflection phases `targets`.
///
/// * Rosen-Zener: every target must be equal. The target is taken modulo
///   `2π` in `(0, 2π]` and must lie in `(0, lπ]`, the range reached on the
///   `ΔT >= 0` branch; `ΔT` is found by bisection. A target of zero yields the
///   zero-coupling identity design.
/// * Far-off: `λ_n² = φ_n Δ / ∫f²` for the given `Δ`, or for the smallest `Δ`
///   keeping every `λ_n` within `max_lambda`.
pub fn design_realization(
    targets: &[f64],
    mode: DesignMode,
    pulse: &PulseSpec,
    constraints: &DesignConstraints,
) -> Result<Realization> {
    if targets.is_empty() {
        return Err(Error::Validation("at least one target phase is required".into()));
    }
    if let Some(bad) = targets.iter().find(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("target phase {bad} is not finite")));
    }
    match mode {
        DesignMode::RosenZener => design_rosen_zener(targets, pulse, constraints),
        DesignMode::FarOff => design_far_off(targets, pulse, constraints),
    }
}

fn design_rosen_zener(targets: &[f64], pulse: &PulseSpec, constraints: &DesignConstraints) -> Result<Realization> {
    if pulse.shape != PulseShape::Sech {
        return Err(Error::UnsupportedMode(format!(
            "Rosen-Zener design needs a sech envelope, got {:?}",
            pulse.shape
        )));
    }
    let first = wrap_phase(targets[0]);
    if targets.iter().any(|&t| (wrap_phase(t - first)).abs() > PHASE_MATCH_TOL) {
        return Err(Error::UnsupportedMode(
            "Rosen-Zener channels share one reflection phase; targets differ".into(),
        ));
    }
    let m = targets.len();
    let mut target = targets[0].rem_euclid(2.0 * PI);
    if target < PHASE_MATCH_TOL || 2.0 * PI - target < PHASE_MATCH_TOL {
        return Ok(Realization::RosenZener {
            order: 0,
            delta_t: 0.0,
            lambdas: vec![0.0; m],
            residual: 0.0,
        });
    }
    let order = constraints.rz_order.unwrap_or(1);
    if order == 0 {
        return Err(Error::NoSolution("order l = 0 only produces the identity".into()));
    }
    let max = f64::from(order) * PI;
    if target > max {
        if target - max < PHASE_MATCH_TOL {
            target = max;
        } else {
            return Err(Error::NoSolution(format!(
                "phase {target:.6} (mod 2π) is outside (0, {max:.6}] reachable with l = {order}"
            )));
        }
    }

    // φ(ΔT) decreases monotonically on ΔT >= 0 from lπ to 0.
    let f = |x: f64| rz_phase_unwrapped(order, x) - target;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoSolution(format!("no detuning reaches phase {target}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let delta_t = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let residual = wrap_phase(rz_phase(order, delta_t) - target).abs();
    if residual > 1e-10 {
        return Err(Error::NoSolution(format!(
            "bisection stalled with residual {residual:e}"
        )));
    }
    let lambda = f64::from(order) / pulse.t_scale;
    Ok(Realization::RosenZener {
        order,
        delta_t,
        lambdas: vec![lambda; m],
        residual,
    })
}

fn design_far_off(targets: &[f64], pulse: &PulseSpec, constraints: &DesignConstraints) -> Result<Realization> {
    let f2 = pulse.envelope_square_integral();
    let detuning = match (constraints.detuning, constraints.max_lambda) {
        (Some(d), _) => {
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Validation(format!(
                    "far-off design needs a nonzero detuning, got {d}"
                )));
            }
            d
        }
        (None, Some(lmax)) => {
            if !(lmax > 0.0) {
                return Err(Error::Validation(format!(
                    "coupling budget must be positive, got {lmax}"
                )));
            }
            let peak = targets
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap();
            if peak == 0.0 {
                return Ok(Realization::FarOff {
                    detuning: FAR_OFF_DEFAULT_DETUNING / pulse.t_scale,
                    lambda_sq: vec![0.0; targets.len()],
                    adiabatic_ok: true,
                });
            }
            lmax * lmax * f2 / peak
        }
        (None, None) => {
            return Err(Error::Validation(
                "far-off design needs either a detuning or a coupling budget".into(),
            ))
        }
    };
    let lambda_sq: Vec<f64> = targets.iter().map(|&phi| phi * detuning / f2).collect();
    if let Some(bad) = lambda_sq.iter().position(|&x| x < 0.0) {
        return Err(Error::NoSolution(format!(
            "target {} has the opposite sign to the detuning {detuning}; λ² would be negative",
            targets[bad]
        )));
    }
    let max_lambda = lambda_sq.iter().fold(0.0_f64, |m, &x| m.max(x.sqrt()));
    Ok(Realization::FarOff {
        detuning,
        lambda_sq,
        adiabatic_ok: super::far_off_valid(max_lambda, detuning),
    })
}

/// Detuning reported for an all-zero far-off design, in units of `1/T`.
const FAR_OFF_DEFAULT_DETUNING: f64 = 1.0;
