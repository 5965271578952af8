//! Direct integration of `i dC/dt = H(t) C` for the full `(N+M)`-state system.
//!
//! ```text
//! H(t) = [[0,          f(t) V],
//!         [f(t) V†,    Δ I   ]]
//! ```
//!
//! Used as the reference every analytic propagator is checked against.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::mirrors::BlockPropagator;
use crate::morris_shore::InteractionMatrix;
use crate::ode::{dopri5, Dopri5Options};
use crate::parallel::{self, Execution};
use crate::two_state::{DetuningSpec, PulseSpec};

/// Smallest and largest accepted integrator tolerances.
pub const REL_TOL_RANGE: (f64, f64) = (1e-12, 1e-4);

const NORM_TOL: f64 = 1e-12;

/// Per-step tolerance handed to the integrator, as a fraction of `rel_tol`.
/// Local errors accumulate over many steps; this keeps the global drift
/// inside `10 * rel_tol`.
const STEP_TOL_FRACTION: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct SimulationProblem {
    pub v: InteractionMatrix,
    pub pulse: PulseSpec,
    pub detuning: DetuningSpec,
    pub c0: ComplexVector,
    /// Number of evenly spaced trajectory samples, endpoints included.
    pub sample_count: usize,
}

impl SimulationProblem {
    pub fn new(
        v: InteractionMatrix,
        pulse: PulseSpec,
        detuning: DetuningSpec,
        c0: ComplexVector,
        sample_count: usize,
    ) -> Result<Self> {
        let dim = v.lower_dim() + v.upper_dim();
        if c0.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("initial state of dimension {dim}"),
                found: format!("{}", c0.dim()),
            });
        }
        if (c0.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "initial state has norm {}, expected 1",
                c0.norm()
            )));
        }
        if sample_count < 2 {
            return Err(Error::Validation("need at least two trajectory samples".into()));
        }
        Ok(Self {
            v,
            pulse,
            detuning,
            c0,
            sample_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.v.lower_dim() + self.v.upper_dim()
    }

    /// Same problem with another initial state.
    pub fn with_initial(&self, c0: ComplexVector) -> Result<Self> {
        Self::new(self.v.clone(), self.pulse, self.detuning, c0, self.sample_count)
    }

    /// Sample times, evenly spaced over the pulse window.
    pub fn sample_times(&self) -> Vec<f64> {
        let (a, b) = (self.pulse.start(), self.pulse.end());
        let n = self.sample_count - 1;
        (0..=n)
            .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
            .collect()
    }
}

/// Sampled solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexVector>,
    /// `|C_k(t)|²` per sample.
    pub populations: Vec<Vec<f64>>,
    pub final_state: ComplexVector,
    pub steps: usize,
}

impl Trajectory {
    /// Largest `| ||C(t)|| - 1 |` over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// `H(t)` as a dense hermitian matrix.
pub fn build_hamiltonian(v: &InteractionMatrix, pulse: &PulseSpec, detuning: &DetuningSpec, t: f64) -> ComplexMatrix {
    let (n, m) = (v.lower_dim(), v.upper_dim());
    let f = C64::new(pulse.envelope(t), 0.0);
    let mut h = ComplexMatrix::zeros(n + m, n + m);
    h.set_block(0, n, &v.matrix().scale(f));
    h.set_block(n, 0, &v.matrix().adjoint().scale(f));
    let d = C64::new(detuning.value_at(t), 0.0);
    for k in n..n + m {
        h[(k, k)] = d;
    }
    h
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    let (lo, hi) = REL_TOL_RANGE;
    if !(lo..=hi).contains(&rel_tol) {
        return Err(Error::Validation(format!(
            "rel_tol must lie in [{lo:e}, {hi:e}], got {rel_tol:e}"
        )));
    }
    Ok(())
}

/// Integrates the problem over its pulse window.
pub fn integrate(problem: &SimulationProblem, rel_tol: f64) -> Result<Trajectory> {
    check_rel_tol(rel_tol)?;
    let (n, m) = (problem.v.lower_dim(), problem.v.upper_dim());
    let v = problem.v.matrix();
    let pulse = problem.pulse;
    let detuning = problem.detuning;
    let minus_i = C64::new(0.0, -1.0);

    // dψ/dt = -i f V φ,  dφ/dt = -i (f V† ψ + Δ φ)
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let f = pulse.envelope(t);
        let d = detuning.value_at(t);
        let (psi, phi) = y.split_at(n);
        for (i, out) in dy[..n].iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..m {
                acc += v[(i, k)] * phi[k];
            }
            *out = minus_i * f * acc;
        }
        for k in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += v[(i, k)].conj() * psi[i];
            }
            dy[n + k] = minus_i * (f * acc + d * phi[k]);
        }
    };

    let times = problem.sample_times();
    let out = dopri5(
        rhs,
        pulse.start(),
        pulse.end(),
        problem.c0.as_slice(),
        &times,
        &Dopri5Options {
            // Keeps the first step from striding over the pulse.
            h_max: Some(0.25 * pulse.t_scale),
            ..Dopri5Options::with_tolerance(STEP_TOL_FRACTION * rel_tol)
        },
    )?;
    let states: Vec<ComplexVector> = out.samples.into_iter().map(ComplexVector::from_vec_unchecked).collect();
    let populations = states.iter().map(ComplexVector::populations).collect();
    Ok(Trajectory {
        times,
        states,
        populations,
        final_state: ComplexVector::from_vec_unchecked(out.final_state),
        steps: out.accepted,
    })
}

/// Numerical propagator over the pulse window: column `k` is the final state
/// for initial basis state `k`. Columns are integrated independently.
pub fn numeric_propagator(
    v: &InteractionMatrix,
    pulse: &PulseSpec,
    detuning: &DetuningSpec,
    rel_tol: f64,
    exec: Execution,
) -> Result<ComplexMatrix> {
    let dim = v.lower_dim() + v.upper_dim();
    let problems: Vec<SimulationProblem> = (0..dim)
        .map(|k| SimulationProblem::new(v.clone(), *pulse, *detuning, ComplexVector::basis(dim, k), 2))
        .collect::<Result<_>>()?;
    let columns = parallel::try_map(&problems, exec, |p| integrate(p, rel_tol).map(|t| t.final_state))?;
    Ok(ComplexMatrix::from_columns(dim, &columns))
}

/// Largest componentwise deviation between the integrated final state and
/// `block.full() · C0`, over `initial_states` (all basis states if `None`).
/// `problem.c0` is ignored.
pub fn compare_analytic(
    problem: &SimulationProblem,
    block: &BlockPropagator,
    rel_tol: f64,
    initial_states: Option<&[ComplexVector]>,
) -> Result<f64> {
    let dim = problem.dim();
    if block.lower_dim() != problem.v.lower_dim() || block.upper_dim() != problem.v.upper_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}+{} block propagator", problem.v.lower_dim(), problem.v.upper_dim()),
            found: format!("{}+{}", block.lower_dim(), block.upper_dim()),
        });
    }
    let basis: Vec<ComplexVector>;
    let states = match initial_states {
        Some(s) => s,
        None => {
            basis = (0..dim).map(|k| ComplexVector::basis(dim, k)).collect();
            &basis
        }
    };
    let u = block.full();
    let deviations = parallel::try_map(states, Execution::default(), |c0| {
        let p = problem.with_initial(c0.clone())?;
        let numeric = integrate(&p, rel_tol)?.final_state;
        Ok::<_, Error>(numeric.max_abs_diff(&u.mul_vec(c0)))
    })?;
    Ok(deviations.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_state::PulseShape;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hamiltonian_blocks() {
        let v = InteractionMatrix::new(ComplexMatrix::from_rows(&[vec![c(1.0, 2.0)], vec![c(0.0, -1.0)]]).unwrap())
            .unwrap();
        let pulse = PulseSpec::sech(1.0);
        let d = DetuningSpec::new_constant(3.0).unwrap();
        let h = build_hamiltonian(&v, &pulse, &d, 0.0);
        assert_eq!(h[(0, 2)], c(1.0, 2.0));
        assert_eq!(h[(2, 0)], c(1.0, -2.0));
        assert_eq!(h[(2, 2)], c(3.0, 0.0));
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        assert!(h.max_abs_diff(&h.adjoint()) == 0.0);
    }

    #[test]
    fn uncoupled_upper_state_picks_up_detuning_phase() {
        let v = InteractionMatrix::new(ComplexMatrix::zeros(1, 1)).unwrap();
        let pulse = PulseSpec::new(PulseShape::Sech, 1.0, (-2.0, 3.0)).unwrap();
        let d = DetuningSpec::new_constant(1.7).unwrap();
        let c0 = ComplexVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let p = SimulationProblem::new(v, pulse, d, c0, 11).unwrap();
        let tr = integrate(&p, 1e-11).unwrap();
        assert!((tr.final_state[0] - c(0.6, 0.0)).norm() < 1e-10);
        let expected = c(0.0, 0.8) * C64::from_polar(1.0, -1.7 * 5.0);
        assert!((tr.final_state[1] - expected).norm() < 1e-9);
        for pops in &tr.populations {
            assert!((pops[0] - 0.36).abs() < 1e-10 && (pops[1] - 0.64).abs() < 1e-10);
        }
        assert_eq!(tr.times.len(), 11);
        assert_eq!(tr.times[10], 3.0);
    }

    #[test]
    fn resonant_pi_pulse_inverts() {
        // A = 2λ ∫ sech = 2πλ, so λ = ½ is a π pulse.
        let v = InteractionMatrix::new(ComplexMatrix::identity(1).scale(c(0.5, 0.0))).unwrap();
        let pulse = PulseSpec::sech(1.0);
        let d = DetuningSpec::new_constant(0.0).unwrap();
        let p = SimulationProblem::new(v, pulse, d, ComplexVector::basis(2, 0), 3).unwrap();
        let tr = integrate(&p, 1e-11).unwrap();
        let pops = tr.populations.last().unwrap();
        assert!(pops[0] < 1e-8 && (pops[1] - 1.0).abs() < 1e-8, "{pops:?}");
    }

    #[test]
    fn validation() {
        let v = InteractionMatrix::new(ComplexMatrix::identity(1)).unwrap();
        let pulse = PulseSpec::sech(1.0);
        let d = DetuningSpec::new_constant(0.0).unwrap();
        assert!(SimulationProblem::new(v.clone(), pulse, d, ComplexVector::basis(3, 0), 3).is_err());
        let half = ComplexVector::new(vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(SimulationProblem::new(v.clone(), pulse, d, half, 3).is_err());
        let p = SimulationProblem::new(v, pulse, d, ComplexVector::basis(2, 0), 3).unwrap();
        assert!(integrate(&p, 1e-3).is_err());
        assert!(integrate(&p, 1e-13).is_err());
    }
}
