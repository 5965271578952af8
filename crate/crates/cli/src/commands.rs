use clap::ValueEnum;
use msqhr::dynamics::{integrate, numeric_propagator, SimulationProblem};
use msqhr::linalg::ComplexVector;
use msqhr::mirrors::{
    assemble_full, coupled_mirrors, reflection_condition, BlockPropagator, REFLECTION_TOL_ANALYTIC,
    REFLECTION_TOL_FAR_OFF,
};
use msqhr::morris_shore::{decompose, m2_theta_sigma, MsDecomposition, DEFAULT_RANK_TOL};
use msqhr::parallel::Execution;
use msqhr::two_state::{
    design_realization, far_off_ck, far_off_valid, resonant_ck, rosen_zener_ck, rosen_zener_ck_windowed, wrap_phase,
    CayleyKlein, DesignMode, PulseShape, Realization,
};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Cx, ModeConfig, Problem, RunConfig};
use crate::report::{cx, matrix, vector};
use crate::CliError;

/// Analytic two-state model used in every MS channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Resonant,
    #[value(name = "rosen_zener", alias = "rosen-zener")]
    RosenZener,
    #[value(name = "far_off", alias = "far-off")]
    FarOff,
}

impl Model {
    fn default_tolerance(self) -> f64 {
        match self {
            Model::FarOff => REFLECTION_TOL_FAR_OFF,
            _ => REFLECTION_TOL_ANALYTIC,
        }
    }

    /// Agreement expected between the model and direct integration.
    fn verify_tolerance(self) -> f64 {
        match self {
            Model::FarOff => 0.05,
            _ => 1e-6,
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub rel_tol: f64,
    pub samples: usize,
    pub model: Option<Model>,
    pub tol: Option<f64>,
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Output {
    pub json: Value,
    /// Trajectory table, for `simulate`.
    pub csv: Option<String>,
    /// A check inside the command failed; the report is still written.
    pub failed_check: Option<String>,
}

impl Output {
    fn json<T: Serialize>(report: &T) -> Self {
        Output {
            json: serde_json::to_value(report).expect("reports serialize"),
            csv: None,
            failed_check: None,
        }
    }
}

struct Analytic {
    model: Model,
    cks: Vec<CayleyKlein>,
    block: BlockPropagator,
}

impl Analytic {
    fn phases(&self) -> Vec<f64> {
        self.cks.iter().map(|ck| ck.a.arg()).collect()
    }
}

fn auto_model(p: &Problem) -> Model {
    if p.detuning.value_at(0.0) == 0.0 {
        Model::Resonant
    } else if p.pulse.shape == PulseShape::Sech {
        Model::RosenZener
    } else {
        Model::FarOff
    }
}

fn analytic(p: &Problem, ms: &MsDecomposition, model: Model) -> Result<Analytic, CliError> {
    let d = p.detuning.value_at(0.0);
    let delta = d * p.pulse.duration();
    let lambda = |k: usize| ms.lambdas.get(k).copied().unwrap_or(0.0);
    let channels = 0..ms.upper_dim();
    let cks: Vec<CayleyKlein> = match model {
        Model::Resonant => {
            if d != 0.0 {
                return Err(CliError::Inapplicable(format!(
                    "the resonant model needs ΔT = 0, got {d}"
                )));
            }
            channels.map(|k| resonant_ck(&p.pulse, lambda(k))).collect()
        }
        Model::RosenZener => channels
            .map(|k| rosen_zener_ck_windowed(&p.pulse, lambda(k), d))
            .collect::<Result<_, _>>()?,
        Model::FarOff => {
            let max = ms.lambdas.iter().fold(0.0_f64, |m, &x| m.max(x));
            if d == 0.0 || !far_off_valid(max, d) {
                return Err(CliError::Inapplicable(format!(
                    "the far-off model needs |ΔT| >= 5 max λT; got ΔT = {d}, max λT = {max:.6}"
                )));
            }
            channels
                .map(|k| far_off_ck(&p.pulse, lambda(k), d))
                .collect::<Result<_, _>>()?
        }
    };
    let block = assemble_full(ms, &cks, delta)?;
    Ok(Analytic { model, cks, block })
}

fn populations(v: &ComplexVector, p: &Problem) -> Vec<f64> {
    let pops = v.populations();
    let n = p.v.lower_dim();
    p.lower_order
        .iter()
        .copied()
        .chain(n..p.dim())
        .map(|k| pops[k])
        .collect()
}

fn state_labels(p: &Problem) -> Vec<String> {
    p.lower_order
        .iter()
        .map(|&i| p.lower_labels[i].clone())
        .chain(p.upper_labels.iter().cloned())
        .collect()
}

#[derive(Serialize)]
struct Angles {
    theta: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct BlockReport {
    lower: Vec<String>,
    upper: Vec<String>,
}

#[derive(Serialize)]
struct DecomposeReport {
    lower_labels: Vec<String>,
    upper_labels: Vec<String>,
    rank: usize,
    lambda_t: Vec<f64>,
    lambda_t_sq: Vec<f64>,
    bright: Vec<Vec<Cx>>,
    upper: Vec<Vec<Cx>>,
    dark: Vec<Vec<Cx>>,
    /// `max |offdiag(A V B†)| / ||V||`
    diagonality_residual: f64,
    completeness_residual: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    m2_angles: Option<Angles>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    blocks: Vec<BlockReport>,
}

pub fn decompose_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.problem()?;
    let ms = decompose(&p.v, DEFAULT_RANK_TOL)?;
    let norm = p.v.norm();
    let offdiag = ms.transformed_coupling(&p.v).max_off_diagonal();
    let (lo, up) = ms.completeness_residual();
    let m2_angles = (p.v.upper_dim() == 2)
        .then(|| m2_theta_sigma(&p.v.column(0), &p.v.column(1)).ok())
        .flatten()
        .map(|a| Angles {
            theta: a.theta,
            sigma: a.sigma,
        });
    let blocks = p
        .blocks
        .iter()
        .map(|(l, u)| BlockReport {
            lower: l.iter().map(|&i| p.lower_labels[i].clone()).collect(),
            upper: u.iter().map(|&k| p.upper_labels[k].clone()).collect(),
        })
        .collect();
    Ok(Output::json(&DecomposeReport {
        lower_labels: p.lower_labels.clone(),
        upper_labels: p.upper_labels.clone(),
        rank: ms.rank(),
        lambda_t: ms.lambdas.clone(),
        lambda_t_sq: ms.lambdas.iter().map(|l| l * l).collect(),
        bright: ms.bright.iter().map(vector).collect(),
        upper: ms.upper.iter().map(vector).collect(),
        dark: ms.dark.iter().map(vector).collect(),
        diagonality_residual: if norm > 0.0 { offdiag / norm } else { 0.0 },
        completeness_residual: [lo, up],
        m2_angles,
        blocks,
    }))
}

#[derive(Serialize)]
struct ChannelReport {
    lambda_t: f64,
    a: Cx,
    b: Cx,
    phase: f64,
}

#[derive(Serialize)]
struct PropagatorReport {
    u_n: Vec<Vec<Cx>>,
    u_nm: Vec<Vec<Cx>>,
    u_mn: Vec<Vec<Cx>>,
    u_m: Vec<Vec<Cx>>,
    delta: f64,
}

#[derive(Serialize)]
struct FactorReport {
    nu: Vec<Cx>,
    phi: f64,
}

#[derive(Serialize)]
struct ReflectionReport {
    tol: f64,
    max_abs_b: f64,
    holds: bool,
}

#[derive(Serialize)]
struct PropagateReport {
    model: Model,
    channels: Vec<ChannelReport>,
    propagator: PropagatorReport,
    reflection_condition: ReflectionReport,
    lower_factors: Vec<FactorReport>,
    upper_factors: Vec<FactorReport>,
    final_state: Vec<Cx>,
    state_labels: Vec<String>,
    final_populations: Vec<f64>,
}

pub fn propagate_cmd(cfg: &RunConfig, s: &Settings) -> Result<Output, CliError> {
    let p = cfg.problem()?;
    let ms = decompose(&p.v, DEFAULT_RANK_TOL)?;
    let model = s.model.unwrap_or_else(|| auto_model(&p));
    let an = analytic(&p, &ms, model)?;
    let tol = s.tol.unwrap_or(model.default_tolerance());
    let mirrors = coupled_mirrors(&ms, &an.phases(), an.block.delta)?;
    let factor = |f: &msqhr::mirrors::HouseholderOp| FactorReport {
        nu: vector(&f.nu),
        phi: f.phi,
    };
    let b = &an.block;
    let final_state = b.full().mul_vec(&p.c0);
    Ok(Output::json(&PropagateReport {
        model: an.model,
        channels: an
            .cks
            .iter()
            .enumerate()
            .map(|(k, ck)| ChannelReport {
                lambda_t: ms.lambdas.get(k).copied().unwrap_or(0.0),
                a: cx(ck.a),
                b: cx(ck.b),
                phase: ck.a.arg(),
            })
            .collect(),
        propagator: PropagatorReport {
            u_n: matrix(&b.u_n),
            u_nm: matrix(&b.u_nm),
            u_mn: matrix(&b.u_mn),
            u_m: matrix(&b.u_m),
            delta: b.delta,
        },
        reflection_condition: ReflectionReport {
            tol,
            max_abs_b: an.cks.iter().fold(0.0, |m, ck| f64::max(m, ck.b.norm())),
            holds: reflection_condition(&an.cks, tol),
        },
        lower_factors: mirrors.lower_factors.iter().map(factor).collect(),
        upper_factors: mirrors.upper_factors.iter().map(factor).collect(),
        final_populations: populations(&final_state, &p),
        state_labels: state_labels(&p),
        final_state: vector(&final_state),
    }))
}

#[derive(Serialize)]
struct AnalyticComparison {
    model: Model,
    populations: Vec<f64>,
    max_deviation: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    samples: usize,
    steps: usize,
    max_norm_drift: f64,
    state_labels: Vec<String>,
    final_populations: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<AnalyticComparison>,
}

pub fn simulate_cmd(cfg: &RunConfig, s: &Settings) -> Result<Output, CliError> {
    let p = cfg.problem()?;
    let problem = SimulationProblem::new(p.v.clone(), p.pulse, p.detuning, p.c0.clone(), s.samples)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let tr = integrate(&problem, s.rel_tol)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let labels = state_labels(&p);
    w.write_record(std::iter::once("t/T".to_string()).chain(labels.iter().cloned()))
        .map_err(|e| CliError::Io(e.to_string()))?;
    for (t, state) in tr.times.iter().zip(&tr.states) {
        let row = std::iter::once(*t / p.pulse.t_scale).chain(populations(state, &p));
        w.write_record(row.map(|x| format!("{x:?}")))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv output is utf-8");

    let final_populations = populations(&tr.final_state, &p);
    let ms = decompose(&p.v, DEFAULT_RANK_TOL)?;
    let an = match s.model {
        Some(model) => Some(analytic(&p, &ms, model)?),
        None => analytic(&p, &ms, auto_model(&p)).ok(),
    };
    let comparison = an.map(|an| {
        let pops = populations(&an.block.full().mul_vec(&p.c0), &p);
        let max_deviation = pops
            .iter()
            .zip(&final_populations)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
        AnalyticComparison {
            model: an.model,
            populations: pops,
            max_deviation,
        }
    });
    let mut out = Output::json(&SimulateReport {
        samples: s.samples,
        steps: tr.steps,
        max_norm_drift: tr.max_norm_drift(),
        state_labels: labels,
        final_populations,
        analytic: comparison,
    });
    out.csv = Some(csv);
    Ok(out)
}

#[derive(Serialize)]
struct RoundTrip {
    phases: Vec<f64>,
    max_error: f64,
    /// Errors are relative to `|target|` (absolute for a zero target).
    relative: bool,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct DesignReport {
    mode: ModeConfig,
    targets: Vec<f64>,
    detuning_t: f64,
    lambda_t: Vec<f64>,
    lambda_t_sq: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adiabatic_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interaction_matrix: Option<Vec<Vec<Cx>>>,
    round_trip: RoundTrip,
}

const RZ_ROUND_TRIP_TOL: f64 = 1e-9;
const FAR_OFF_ROUND_TRIP_TOL: f64 = 1e-2;

pub fn design_cmd(cfg: &RunConfig, s: &Settings) -> Result<Output, CliError> {
    let design = cfg
        .design
        .as_ref()
        .ok_or_else(|| CliError::Config("missing field `design`".into()))?;
    let mode = match s.model {
        None => design.mode,
        Some(Model::RosenZener) => ModeConfig::RosenZener,
        Some(Model::FarOff) => ModeConfig::FarOff,
        Some(Model::Resonant) => {
            return Err(CliError::Inapplicable(
                "the resonant model has no phase design; use rosen_zener or far_off".into(),
            ))
        }
    };
    let pulse = cfg.pulse_spec()?;
    let targets = &design.targets;
    let r = design_realization(
        targets,
        DesignMode::from(mode),
        &pulse,
        &design.constraints(cfg.detuning),
    )?;
    let lambdas = r.lambdas();
    let detuning = r.detuning(&pulse);

    let round_trip = match &r {
        Realization::RosenZener { order, delta_t, .. } => {
            let ck = if *order == 0 {
                CayleyKlein::IDENTITY
            } else {
                rosen_zener_ck(f64::from(*order), *delta_t)?
            };
            let phi = ck.a.arg();
            let max_error = targets.iter().fold(0.0, |m, &t| f64::max(m, wrap_phase(phi - t).abs()));
            RoundTrip {
                phases: vec![phi; targets.len()],
                max_error,
                relative: false,
                tolerance: RZ_ROUND_TRIP_TOL,
                passed: max_error <= RZ_ROUND_TRIP_TOL,
            }
        }
        Realization::FarOff { .. } => {
            let phases = channel_phases_numeric(&lambdas, &pulse, detuning, s.rel_tol)?;
            let max_error = phases.iter().zip(targets).fold(0.0, |m, (&phi, &t)| {
                let err = wrap_phase(phi - t).abs();
                f64::max(m, if t == 0.0 { err } else { err / t.abs() })
            });
            RoundTrip {
                phases,
                max_error,
                relative: true,
                tolerance: FAR_OFF_ROUND_TRIP_TOL,
                passed: max_error <= FAR_OFF_ROUND_TRIP_TOL,
            }
        }
    };

    let interaction_matrix = match &cfg.linkage {
        Some(_) => {
            let p = cfg.problem()?;
            let ms = decompose(&p.v, DEFAULT_RANK_TOL)?;
            if ms.rank() != lambdas.len() {
                return Err(CliError::Config(format!(
                    "design has {} targets but the linkage has {} bright channels",
                    lambdas.len(),
                    ms.rank()
                )));
            }
            Some(matrix(ms.synthesize(&lambdas)?.matrix()))
        }
        None => None,
    };

    let (order, adiabatic_ok) = match &r {
        Realization::RosenZener { order, .. } => (Some(*order), None),
        Realization::FarOff { adiabatic_ok, .. } => (None, Some(*adiabatic_ok)),
    };
    Ok(Output::json(&DesignReport {
        mode,
        targets: targets.clone(),
        detuning_t: detuning * pulse.t_scale,
        lambda_t_sq: lambdas.iter().map(|l| (l * pulse.t_scale).powi(2)).collect(),
        lambda_t: lambdas.iter().map(|l| l * pulse.t_scale).collect(),
        order,
        adiabatic_ok,
        interaction_matrix,
        round_trip,
    }))
}

/// `arg a` of each designed channel, from direct integration of the
/// two-state problem.
fn channel_phases_numeric(
    lambdas: &[f64],
    pulse: &msqhr::two_state::PulseSpec,
    detuning: f64,
    rel_tol: f64,
) -> Result<Vec<f64>, CliError> {
    use msqhr::linalg::ComplexMatrix;
    use msqhr::morris_shore::InteractionMatrix;
    use msqhr::two_state::DetuningSpec;

    let d = DetuningSpec::new_constant(detuning)?;
    let phases = msqhr::parallel::try_map(lambdas, Execution::default(), |&l| {
        let v = InteractionMatrix::new(ComplexMatrix::identity(1).scale(msqhr::Complex64::new(l, 0.0)))?;
        let problem = SimulationProblem::new(v, *pulse, d, ComplexVector::basis(2, 0), 2)?;
        Ok::<_, msqhr::Error>(integrate(&problem, rel_tol)?.final_state[0].arg())
    })?;
    Ok(phases)
}

#[derive(Serialize)]
struct VerifyReport {
    model: Model,
    rel_tol: f64,
    tolerance: f64,
    max_deviation: f64,
    reflection_condition: bool,
    passed: bool,
}

pub fn verify_cmd(cfg: &RunConfig, s: &Settings) -> Result<Output, CliError> {
    let p = cfg.problem()?;
    let ms = decompose(&p.v, DEFAULT_RANK_TOL)?;
    let model = s.model.unwrap_or_else(|| auto_model(&p));
    let an = analytic(&p, &ms, model)?;
    let numeric = numeric_propagator(&p.v, &p.pulse, &p.detuning, s.rel_tol, Execution::default())?;
    let max_deviation = numeric.max_abs_diff(&an.block.full());
    let tolerance = s.tol.unwrap_or(model.verify_tolerance());
    let passed = max_deviation <= tolerance;
    let mut out = Output::json(&VerifyReport {
        model,
        rel_tol: s.rel_tol,
        tolerance,
        max_deviation,
        reflection_condition: reflection_condition(&an.cks, model.default_tolerance()),
        passed,
    });
    if !passed {
        out.failed_check = Some(format!(
            "analytic and numeric propagators differ by {max_deviation:.3e} > {tolerance:.0e}"
        ));
    }
    Ok(out)
}
