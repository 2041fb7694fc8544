//! Experiment configuration: strict JSON schema with explicit units.
//!
//! Every config carries a `kind` discriminator matching the subcommand.
//! Unknown keys are rejected. Rates are in units of `Γ₂⁺`; times in units of
//! `1/Γ₂⁺`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use pnme_core::bath::{BathParams, CorrelatorIndex, Sign};
use pnme_core::models::{collective_model, CollectiveModel, Representation};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Simulate,
    Steady,
    Corr,
    DecayRate,
    Converge,
    Multitime,
    Sweep,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Steady => "steady",
            Kind::Corr => "corr",
            Kind::DecayRate => "decay_rate",
            Kind::Converge => "converge",
            Kind::Multitime => "multitime",
            Kind::Sweep => "sweep",
        }
    }
}

/// Model block: `{"model": "collective", "N": 6, "omega": 1.0,
/// "representation": "symmetric"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub model: ModelName,
    #[serde(rename = "N")]
    pub n: usize,
    pub omega: f64,
    #[serde(default = "default_representation")]
    pub representation: RepresentationName,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Collective,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationName {
    Symmetric,
    Full,
}

fn default_representation() -> RepresentationName {
    RepresentationName::Symmetric
}

impl ModelBlock {
    pub fn build(&self) -> CliResult<CollectiveModel> {
        let repr = match self.representation {
            RepresentationName::Symmetric => Representation::Symmetric,
            RepresentationName::Full => Representation::Full,
        };
        collective_model(self.n, self.omega, repr).map_err(CliError::validation)
    }
}

/// Poisson master-equation block.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonBlock {
    pub mu: f64,
    pub gamma1_plus: f64,
    pub gamma2_plus: f64,
}

/// Bath block. Either all four rates are given explicitly together with
/// `lambda`, or `detailed_balance = true` with `beta` derives the upward
/// rates from the downward ones.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathBlock {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1_minus: f64,
    pub gamma2_minus: f64,
    pub lambda: f64,
    #[serde(default)]
    pub detailed_balance: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2_plus: Option<f64>,
}

impl BathBlock {
    pub fn build(&self) -> CliResult<BathParams> {
        if self.detailed_balance {
            let beta = self.beta.ok_or_else(|| {
                CliError::Validation("detailed-balance mode requires `beta`".into())
            })?;
            if self.gamma1_plus.is_some() || self.gamma2_plus.is_some() {
                return Err(CliError::Validation(
                    "detailed-balance mode derives gamma1_plus/gamma2_plus; do not set them"
                        .into(),
                ));
            }
            BathParams::detailed_balance(
                self.omega1,
                self.omega2,
                beta,
                self.gamma1_minus,
                self.gamma2_minus,
                self.lambda,
            )
            .map_err(CliError::validation)
        } else {
            let g1 = self.gamma1_plus.ok_or_else(|| {
                CliError::Validation("explicit mode requires `gamma1_plus`".into())
            })?;
            let g2 = self.gamma2_plus.ok_or_else(|| {
                CliError::Validation("explicit mode requires `gamma2_plus`".into())
            })?;
            if self.beta.is_some() {
                return Err(CliError::Validation(
                    "`beta` is only meaningful with detailed_balance = true".into(),
                ));
            }
            BathParams::new(
                self.omega1,
                self.omega2,
                g1,
                self.gamma1_minus,
                g2,
                self.gamma2_minus,
                self.lambda,
            )
            .map_err(CliError::validation)
        }
    }

    /// Enforce `λ = μΓ₁⁻` against the Poisson block.
    pub fn check_mu_consistency(&self, mu: f64) -> CliResult<()> {
        let expect = mu * self.gamma1_minus;
        let scale = expect.abs().max(1.0);
        if (self.lambda - expect).abs() > 1e-12 * scale {
            return Err(CliError::Validation(format!(
                "inconsistent coupling: lambda = {} but mu * gamma1_minus = {expect}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Time grid: either a uniform `{"t_max": 10.0, "points": 201}` grid starting
/// at zero or an explicit ascending list starting at zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimesBlock {
    Uniform { t_max: f64, points: usize },
    Explicit { values: Vec<f64> },
}

impl TimesBlock {
    pub fn build(&self) -> CliResult<Vec<f64>> {
        let values = match self {
            TimesBlock::Uniform { t_max, points } => {
                if *points < 2 || !(*t_max > 0.0) {
                    return Err(CliError::Validation(format!(
                        "time grid needs t_max > 0 and ≥ 2 points, got t_max = {t_max}, points = {points}"
                    )));
                }
                (0..*points)
                    .map(|k| t_max * k as f64 / (*points - 1) as f64)
                    .collect()
            }
            TimesBlock::Explicit { values } => values.clone(),
        };
        if values.is_empty() {
            return Err(CliError::Validation("empty time grid".into()));
        }
        if values[0] != 0.0 || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation(
                "time grid must start at 0 and ascend strictly".into(),
            ));
        }
        Ok(values)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ObservableName {
    PGround,
    Jx,
    Jz,
}

impl ObservableName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObservableName::PGround => "p_ground",
            ObservableName::Jx => "jx",
            ObservableName::Jz => "jz",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateName {
    Ground,
    Dicke1,
    GroundPlusDicke1,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EngineName {
    Poisson,
    Gaussian,
    Composite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub kind: Kind,
    pub engine: EngineName,
    pub model: ModelBlock,
    pub poisson: PoissonBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathBlock>,
    pub initial_state: InitialStateName,
    pub times: TimesBlock,
    pub observables: Vec<ObservableName>,
    pub output: String,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SteadyGenerator {
    Poisson,
    Gaussian,
    Bath,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    pub kind: Kind,
    pub generator: SteadyGenerator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson: Option<PoissonBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathBlock>,
    pub output: String,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorType {
    TwoPoint,
    CorrelationLike,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexPair {
    pub l: String,
    pub k: String,
}

impl IndexPair {
    pub fn build(&self) -> CliResult<CorrelatorIndex> {
        let parse = |s: &str| -> CliResult<Sign> {
            match s {
                "+" => Ok(Sign::Plus),
                "-" => Ok(Sign::Minus),
                other => Err(CliError::Validation(format!(
                    "index sign must be \"+\" or \"-\", got {other:?}"
                ))),
            }
        };
        Ok(CorrelatorIndex::new(parse(&self.l)?, parse(&self.k)?))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrConfig {
    pub kind: Kind,
    pub bath: BathBlock,
    pub correlator: CorrelatorType,
    /// Exactly two insertions `(l, k)`, outermost first.
    pub indices: Vec<IndexPair>,
    /// Initial projector sign for `correlation_like` ("+" or "-").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    pub t_grid: TimesBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<TimesBlock>,
    pub output: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayRateConfig {
    pub kind: Kind,
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_x_points")]
    pub points: usize,
    #[serde(default = "default_gamma2")]
    pub gamma2_plus: f64,
    pub output: String,
}

fn default_x_min() -> f64 {
    1e-3
}
fn default_x_max() -> f64 {
    1e3
}
fn default_x_points() -> usize {
    121
}
fn default_gamma2() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub kind: Kind,
    pub model: ModelBlock,
    pub poisson: PoissonBlock,
    pub omega1: f64,
    pub omega2: f64,
    pub gamma_minus_ladder: Vec<f64>,
    pub initial_state: InitialStateName,
    pub times: TimesBlock,
    pub observables: Vec<ObservableName>,
    pub output: String,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultitimeOperator {
    SigmaX,
    Jx,
    Jz,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultitimeConfig {
    pub kind: Kind,
    pub model: ModelBlock,
    pub poisson: PoissonBlock,
    pub bath: BathBlock,
    pub initial_state: InitialStateName,
    pub op: MultitimeOperator,
    /// Values of the earlier time t₂.
    pub t2_values: Vec<f64>,
    /// Gaps t₁ − t₂ ≥ 0.
    pub gap_values: Vec<f64>,
    pub output: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: Kind,
    /// Complete experiment configs, run concurrently.
    pub experiments: Vec<Value>,
    pub output: String,
}

#[derive(Clone, Debug)]
pub enum ExperimentConfig {
    Simulate(SimulateConfig),
    Steady(SteadyConfig),
    Corr(CorrConfig),
    DecayRate(DecayRateConfig),
    Converge(ConvergeConfig),
    Multitime(MultitimeConfig),
    Sweep(SweepConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> Kind {
        match self {
            ExperimentConfig::Simulate(_) => Kind::Simulate,
            ExperimentConfig::Steady(_) => Kind::Steady,
            ExperimentConfig::Corr(_) => Kind::Corr,
            ExperimentConfig::DecayRate(_) => Kind::DecayRate,
            ExperimentConfig::Converge(_) => Kind::Converge,
            ExperimentConfig::Multitime(_) => Kind::Multitime,
            ExperimentConfig::Sweep(_) => Kind::Sweep,
        }
    }

}

/// Parse a config value, dispatching on its `kind` tag.
pub fn parse_config(value: &Value) -> CliResult<ExperimentConfig> {
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Parse("config is missing the `kind` field".into()))?;
    let parse = |e: serde_json::Error| CliError::Parse(e.to_string());
    let config = match kind {
        "simulate" => {
            ExperimentConfig::Simulate(serde_json::from_value(value.clone()).map_err(parse)?)
        }
        "steady" => ExperimentConfig::Steady(serde_json::from_value(value.clone()).map_err(parse)?),
        "corr" => ExperimentConfig::Corr(serde_json::from_value(value.clone()).map_err(parse)?),
        "decay_rate" => {
            ExperimentConfig::DecayRate(serde_json::from_value(value.clone()).map_err(parse)?)
        }
        "converge" => {
            ExperimentConfig::Converge(serde_json::from_value(value.clone()).map_err(parse)?)
        }
        "multitime" => {
            ExperimentConfig::Multitime(serde_json::from_value(value.clone()).map_err(parse)?)
        }
        "sweep" => ExperimentConfig::Sweep(serde_json::from_value(value.clone()).map_err(parse)?),
        other => {
            return Err(CliError::Parse(format!(
                "unknown experiment kind {other:?} (expected simulate, steady, corr, decay_rate, converge, multitime or sweep)"
            )))
        }
    };
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Parse(format!("cannot read config {}: {e}", path.display()))
    })?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("invalid JSON: {e}")))?;
    parse_config(&value)
}
