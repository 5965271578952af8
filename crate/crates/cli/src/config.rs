//! JSON run configuration. Every quantity is in units of the pulse time
//! scale `T` (couplings as `λT`, detunings as `ΔT`, times as `t/T`).

use std::path::Path;

use msqhr::linalg::{ComplexMatrix, ComplexVector};
use msqhr::linkages::{build_linkage, HalfInt, LinkageSpec, PolarizationAmplitudes};
use msqhr::morris_shore::InteractionMatrix;
use msqhr::two_state::{DesignConstraints, DesignMode, DetuningSpec, PulseShape, PulseSpec};
use msqhr::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type Cx = [f64; 2];

fn cx(z: Cx) -> Complex64 {
    Complex64::new(z[0], z[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linkage: Option<LinkageConfig>,
    #[serde(default)]
    pub pulse: PulseConfig,
    /// `ΔT`
    #[serde(default)]
    pub detuning: f64,
    /// Amplitudes over lower then upper states, in matrix order. Defaults to
    /// the first lower state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkageConfig {
    TwoLevel {
        j_lower: f64,
        j_upper: f64,
        polarization: PolarizationConfig,
    },
    #[serde(rename = "ladder_010")]
    Ladder010 {
        first: PolarizationConfig,
        second: PolarizationConfig,
    },
    /// `rows[i][k]` couples lower state `i` to upper state `k`.
    Explicit { rows: Vec<Vec<Cx>> },
}

/// Spherical components of one field, as `λT`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizationConfig {
    #[serde(default)]
    pub plus: Cx,
    #[serde(default)]
    pub zero: Cx,
    #[serde(default)]
    pub minus: Cx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeConfig {
    #[default]
    Sech,
    Gaussian,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    #[serde(default)]
    pub shape: ShapeConfig,
    /// `[t_i/T, t_f/T]`
    #[serde(default = "default_window")]
    pub window: [f64; 2],
}

fn default_window() -> [f64; 2] {
    [-40.0, 40.0]
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            shape: ShapeConfig::Sech,
            window: default_window(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    RosenZener,
    FarOff,
}

impl From<ModeConfig> for DesignMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::RosenZener => DesignMode::RosenZener,
            ModeConfig::FarOff => DesignMode::FarOff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// Reflection phase per MS channel.
    pub targets: Vec<f64>,
    pub mode: ModeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Far-off `ΔT`; falls back to the top-level detuning when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    /// Far-off coupling budget `max λT`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lambda: Option<f64>,
}

impl DesignConfig {
    pub fn constraints(&self, top_level_detuning: f64) -> DesignConstraints {
        let detuning = self
            .detuning
            .or_else(|| (self.max_lambda.is_none() && top_level_detuning != 0.0).then_some(top_level_detuning));
        DesignConstraints {
            rz_order: self.order,
            detuning,
            max_lambda: self.max_lambda,
        }
    }
}

/// A configuration resolved into library types.
#[derive(Debug, Clone)]
pub struct Problem {
    pub v: InteractionMatrix,
    pub lower_labels: Vec<String>,
    pub upper_labels: Vec<String>,
    /// Lower-state indices sorted by magnetic quantum number, ascending.
    pub lower_order: Vec<usize>,
    pub blocks: Vec<(Vec<usize>, Vec<usize>)>,
    pub pulse: PulseSpec,
    pub detuning: DetuningSpec,
    pub c0: ComplexVector,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.v.lower_dim() + self.v.upper_dim()
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn polarization(p: &PolarizationConfig) -> Result<PolarizationAmplitudes, CliError> {
    Ok(PolarizationAmplitudes::new(cx(p.plus), cx(p.zero), cx(p.minus))?)
}

fn half_int(x: f64, field: &str) -> Result<HalfInt, CliError> {
    HalfInt::from_f64(x).map_err(|e| CliError::Config(format!("linkage.{field}: {e}")))
}

impl RunConfig {
    pub fn pulse_spec(&self) -> Result<PulseSpec, CliError> {
        let shape = match self.pulse.shape {
            ShapeConfig::Sech => PulseShape::Sech,
            ShapeConfig::Gaussian => PulseShape::Gaussian,
            ShapeConfig::Constant => PulseShape::Constant,
        };
        PulseSpec::new(shape, 1.0, (self.pulse.window[0], self.pulse.window[1]))
            .map_err(|e| CliError::Config(format!("pulse: {e}")))
    }

    pub fn detuning_spec(&self) -> Result<DetuningSpec, CliError> {
        DetuningSpec::new_constant(self.detuning).map_err(|e| CliError::Config(format!("detuning: {e}")))
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let linkage = self
            .linkage
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field `linkage`".into()))?;
        let (v, lower_labels, upper_labels, lower_order, blocks) = match linkage {
            LinkageConfig::Explicit { rows } => {
                let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().copied().map(cx).collect()).collect();
                let m = ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Config(format!("linkage.rows: {e}")))?;
                let v = InteractionMatrix::new(m).map_err(|e| CliError::Config(format!("linkage.rows: {e}")))?;
                let (n, m) = (v.lower_dim(), v.upper_dim());
                (
                    v,
                    (0..n).map(|i| format!("lower {i}")).collect(),
                    (0..m).map(|k| format!("upper {k}")).collect(),
                    (0..n).collect(),
                    Vec::new(),
                )
            }
            other => {
                let (spec, order) = match other {
                    LinkageConfig::TwoLevel {
                        j_lower,
                        j_upper,
                        polarization: pol,
                    } => {
                        let (jl, ju) = (half_int(*j_lower, "j_lower")?, half_int(*j_upper, "j_upper")?);
                        let order = (0..=jl.twice() as usize).collect();
                        (
                            LinkageSpec::TwoLevel {
                                j_lower: jl,
                                j_upper: ju,
                                pol: polarization(pol)?,
                            },
                            order,
                        )
                    }
                    // Rows run m = +1, 0, -1.
                    LinkageConfig::Ladder010 { first, second } => (
                        LinkageSpec::Ladder010 {
                            first: polarization(first)?,
                            second: polarization(second)?,
                        },
                        vec![2, 1, 0],
                    ),
                    LinkageConfig::Explicit { .. } => unreachable!(),
                };
                let l = build_linkage(&spec).map_err(|e| CliError::Config(format!("linkage: {e}")))?;
                let blocks = l.blocks.iter().map(|b| (b.lower.clone(), b.upper.clone())).collect();
                (l.matrix, l.lower_labels, l.upper_labels, order, blocks)
            }
        };
        let dim = v.lower_dim() + v.upper_dim();
        let c0 = match &self.initial_state {
            None => ComplexVector::basis(dim, 0),
            Some(amps) => {
                if amps.len() != dim {
                    return Err(CliError::Config(format!(
                        "initial_state has {} amplitudes, the linkage has {dim} states",
                        amps.len()
                    )));
                }
                ComplexVector::new(amps.iter().copied().map(cx).collect())
                    .map_err(|e| CliError::Config(format!("initial_state: {e}")))?
            }
        };
        if (c0.norm() - 1.0).abs() > 1e-12 {
            return Err(CliError::Config(format!(
                "initial_state has norm {}, expected 1",
                c0.norm()
            )));
        }
        Ok(Problem {
            v,
            lower_labels,
            upper_labels,
            lower_order,
            blocks,
            pulse: self.pulse_spec()?,
            detuning: self.detuning_spec()?,
            c0,
        })
    }
}
