//! Experiment configuration, mirrored field-for-field by the JSON config
//! file. Unknown keys are rejected so typos cannot silently change an
//! experiment.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lspi::SolverParams;
use crate::navsim::World;
use crate::policy::ImprovementConfig;
use crate::sfa::SfaParams;

/// State representation used for the linear Q-function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Fourier,
    Sfa,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Fourier => write!(f, "fourier"),
            Representation::Sfa => write!(f, "sfa"),
        }
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fourier" => Ok(Representation::Fourier),
            "sfa" => Ok(Representation::Sfa),
            other => Err(Error::Config(format!(
                "unknown representation {other:?}; expected \"fourier\" or \"sfa\""
            ))),
        }
    }
}

/// Improvement-operator kind as named in config files, CSV rows and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Greedy,
    Softmax,
    Egreedy,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Greedy => write!(f, "greedy"),
            OperatorKind::Softmax => write!(f, "softmax"),
            OperatorKind::Egreedy => write!(f, "egreedy"),
        }
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(OperatorKind::Greedy),
            "softmax" => Ok(OperatorKind::Softmax),
            "egreedy" => Ok(OperatorKind::Egreedy),
            other => Err(Error::Config(format!(
                "unknown operator {other:?}; expected greedy, softmax or egreedy"
            ))),
        }
    }
}

/// Improvement operator as written in config files: kind plus its numeric
/// parameters and the normalization flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImprovementSpec {
    pub kind: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub normalize: bool,
}

impl ImprovementSpec {
    pub fn greedy() -> Self {
        ImprovementSpec {
            kind: OperatorKind::Greedy,
            beta: None,
            epsilon: None,
            normalize: false,
        }
    }

    pub fn softmax(beta: Option<f64>, normalize: bool) -> Self {
        ImprovementSpec {
            kind: OperatorKind::Softmax,
            beta,
            epsilon: None,
            normalize,
        }
    }

    /// Resolve into an [`ImprovementConfig`], taking the softmax β from the
    /// spec itself or from `beta_override` (grid expansion).
    pub fn build(&self, beta_override: Option<f64>) -> Result<ImprovementConfig> {
        let config = match self.kind {
            OperatorKind::Greedy => ImprovementConfig {
                operator: crate::policy::ImprovementOperator::Greedy,
                normalize: self.normalize,
            },
            OperatorKind::Softmax => {
                let beta = beta_override.or(self.beta).ok_or_else(|| {
                    Error::Config("softmax operator requires beta".into())
                })?;
                ImprovementConfig::softmax(beta, self.normalize)
            }
            OperatorKind::Egreedy => {
                let epsilon = self.epsilon.ok_or_else(|| {
                    Error::Config("egreedy operator requires epsilon".into())
                })?;
                ImprovementConfig {
                    operator: crate::policy::ImprovementOperator::EpsilonGreedy { epsilon },
                    normalize: self.normalize,
                }
            }
        };
        config.validate()?;
        Ok(config)
    }
}

/// Fourier-basis settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FourierSpec {
    /// Cosines per spatial dimension (including the constant): 6 is the
    /// desk-scale preset (540 state-action features), 10 the full basis
    /// (1500 features).
    pub spatial_cosines: usize,
}

impl Default for FourierSpec {
    fn default() -> Self {
        FourierSpec { spatial_cosines: 6 }
    }
}

/// Full sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: World,
    pub representation: Representation,
    pub improvement: ImprovementSpec,
    pub gamma_grid: Vec<f64>,
    /// Softmax series, one per β. Only valid with a softmax improvement.
    #[serde(default)]
    pub beta_grid: Vec<f64>,
    /// Add a plain greedy series next to the stochastic ones.
    #[serde(default)]
    pub include_greedy: bool,
    pub seeds: Vec<u64>,
    pub batch_size: usize,
    #[serde(default = "defaults::eval_starts")]
    pub eval_starts: usize,
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub fourier: FourierSpec,
    #[serde(default)]
    pub sfa: SfaParams,
    /// Record per-cell wall time in the CSV. Off by default because timing
    /// values break byte-identical reproducibility of the output.
    #[serde(default)]
    pub record_wall_time: bool,
}

mod defaults {
    pub fn eval_starts() -> usize {
        200
    }
    pub fn horizon() -> usize {
        100
    }
}

impl ExperimentConfig {
    /// Desk-scale defaults: γ ∈ {0.5 … 0.99}, β ∈ {1, 2, 5, 10, 20, 50} plus
    /// a greedy series, normalized softmax, 5 seeds × 20000 samples.
    pub fn default_grids(world: World, representation: Representation) -> Self {
        ExperimentConfig {
            world,
            representation,
            improvement: ImprovementSpec::softmax(None, true),
            gamma_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99],
            beta_grid: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            include_greedy: true,
            seeds: vec![1, 2, 3, 4, 5],
            batch_size: 20_000,
            eval_starts: defaults::eval_starts(),
            horizon: defaults::horizon(),
            solver: SolverParams::default(),
            fourier: FourierSpec::default(),
            sfa: SfaParams::default(),
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_grid.is_empty() {
            return Err(Error::Config("gamma_grid must be non-empty".into()));
        }
        for &gamma in &self.gamma_grid {
            if !(0.0..1.0).contains(&gamma) {
                return Err(Error::Config(format!(
                    "gamma must lie in [0, 1), got {gamma}"
                )));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be ≥ 1".into()));
        }
        if self.eval_starts == 0 || self.horizon == 0 {
            return Err(Error::Config("eval_starts and horizon must be ≥ 1".into()));
        }
        if self.fourier.spatial_cosines == 0 {
            return Err(Error::Config("fourier.spatial_cosines must be ≥ 1".into()));
        }
        self.solver.validate()?;
        if self.representation == Representation::Sfa {
            self.sfa.validate()?;
        }
        match self.improvement.kind {
            OperatorKind::Softmax => {
                if self.beta_grid.is_empty() && self.improvement.beta.is_none() {
                    return Err(Error::Config(
                        "softmax sweep needs beta_grid or improvement.beta".into(),
                    ));
                }
            }
            _ => {
                if !self.beta_grid.is_empty() {
                    return Err(Error::Config(
                        "beta_grid is only valid with a softmax improvement".into(),
                    ));
                }
            }
        }
        self.operator_series().map(|_| ())
    }

    /// The operator series of the sweep: one per β for softmax (grid order),
    /// a single series otherwise, plus an optional trailing greedy series.
    pub fn operator_series(&self) -> Result<Vec<ImprovementConfig>> {
        let mut series = Vec::new();
        match self.improvement.kind {
            OperatorKind::Softmax => {
                if self.beta_grid.is_empty() {
                    series.push(self.improvement.build(None)?);
                } else {
                    for &beta in &self.beta_grid {
                        series.push(self.improvement.build(Some(beta))?);
                    }
                }
            }
            _ => series.push(self.improvement.build(None)?),
        }
        if self.include_greedy && self.improvement.kind != OperatorKind::Greedy {
            series.push(ImprovementConfig::greedy());
        }
        Ok(series)
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let config: ExperimentConfig =
        serde_json::from_reader(BufReader::new(File::open(path).map_err(as_io)?))
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
