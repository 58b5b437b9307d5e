//! TOML job configuration: one model, its constants, a simulation plan and output options.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ruinbound::bounds::TheoremConstants;
use ruinbound::mc::{SimulationPlan, DEFAULT_CONFIDENCE};
use ruinbound::reference::DEFAULT_HORIZON;
use ruinbound::riskmodel::{CorollaryTwoConstants, RiskModelSpec};
use ruinbound::seqmodel::SequenceSpec;

use crate::error::CliError;

/// A whole job file. Exactly one of `walk` and `risk` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<RiskModelSpec>,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Parameters of the derivation. Walks use `h`, `c`, `b`; risk models use `gamma`, `kappa`, `beta`.
/// A missing `b`/`beta` is replaced by the smallest index with negative drift.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Constants to use for bounds instead of the derived ones, e.g. rounded published values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stated: Option<StatedConstants>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatedConstants {
    Theorem(TheoremConstants),
    Corollary(CorollaryTwoConstants),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_horizon: Option<f64>,
    /// Thresholds as `"start:stop:step"`, stop included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// Explicit thresholds, used when `grid` is absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<f64>,
}

fn default_trials() -> u64 {
    100_000
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_seed() -> u64 {
    42
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            trials: default_trials(),
            horizon: default_horizon(),
            seed: default_seed(),
            confidence_level: default_confidence(),
            time_horizon: None,
            grid: None,
            thresholds: Vec::new(),
        }
    }
}

impl SimulationSection {
    pub fn plan(&self) -> SimulationPlan {
        SimulationPlan {
            confidence_level: self.confidence_level,
            time_horizon: self.time_horizon,
            ..SimulationPlan::new(self.trials, self.horizon, 0.0, self.seed)
        }
    }

    pub fn threshold_list(&self) -> Result<Vec<f64>, CliError> {
        match &self.grid {
            Some(g) => parse_grid(g),
            None => Ok(self.thresholds.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Text,
    JsonLines,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Format,
    /// CSV file with columns `x, bound, estimate, ci_low, ci_high` written by `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_data: Option<PathBuf>,
}

/// The model of a validated job.
pub enum Model<'a> {
    Walk(&'a SequenceSpec),
    Risk(&'a RiskModelSpec),
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("job configs serialize to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let k = &self.constants;
        match (&self.walk, &self.risk) {
            (Some(_), Some(_)) => return Err(CliError::Config("exactly one of [walk] and [risk] is allowed".into())),
            (None, None) => return Err(CliError::Config("one of [walk] or [risk] is required".into())),
            (Some(_), None) => {
                if k.gamma.is_some() || k.kappa.is_some() || k.beta.is_some() {
                    return Err(CliError::Config(
                        "constants.gamma, kappa and beta apply to [risk] models; use h, c and b for [walk]".into(),
                    ));
                }
                if matches!(k.stated, Some(StatedConstants::Corollary(_))) {
                    return Err(CliError::Config("constants.stated for a [walk] needs fields a, b, c, epsilon, h, d1, d2".into()));
                }
            }
            (None, Some(_)) => {
                if k.h.is_some() || k.c.is_some() || k.b.is_some() {
                    return Err(CliError::Config(
                        "constants.h, c and b apply to [walk] models; use gamma, kappa and beta for [risk]".into(),
                    ));
                }
                if matches!(k.stated, Some(StatedConstants::Theorem(_))) {
                    return Err(CliError::Config(
                        "constants.stated for a [risk] model needs fields alpha, beta, kappa, epsilon, gamma, nu1, nu2".into(),
                    ));
                }
            }
        }
        if let Some(d) = k.delta {
            if !(d > 0.0 && d <= 0.5) {
                return Err(CliError::Config(format!("constants.delta = {d} must lie in (0, 1/2]")));
            }
        }
        self.simulation.plan().validate().map_err(|e| CliError::Config(format!("[simulation]: {e}")))?;
        self.simulation.threshold_list()?;
        Ok(())
    }

    pub fn model(&self) -> Model<'_> {
        match (&self.walk, &self.risk) {
            (Some(w), _) => Model::Walk(w),
            (None, Some(r)) => Model::Risk(r),
            (None, None) => unreachable!("validated config has a model"),
        }
    }
}

/// Parses `"start:stop:step"` into `start, start + step, …` up to and including `stop`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("grid {spec:?} must look like \"start:stop:step\" with step > 0"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(CliError::Config(format!("grid {spec:?} has more than 10⁶ points")));
    }
    Ok((0..=n).map(|j| start + step * j as f64).collect())
}
