//! Pipeline configuration: one human-editable TOML document that fully
//! determines a dataset build. Configs round-trip losslessly through
//! serialization so the manifest can embed an exact snapshot.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::IndicatorKind;
use crate::labeling::{LabelFamily, ProbeCondition, QClassThresholds, TrendMethod};
use crate::market_data::{CsvSchema, ReturnKind};
use crate::scaling::{ChannelGroups, ScaleMethod, ScalingOrder};
use crate::splitting::Embargo;

/// Channel names that resolve without an indicator definition.
pub const BASE_CHANNELS: [&str; 7] =
    ["open", "high", "low", "close", "volume", "returns", "log_returns"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub indicators: Vec<IndicatorConfig>,
    pub slices: SliceConfig,
    pub scaling: ScalingConfig,
    pub label: LabelConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub balance: BalanceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeStageConfig>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    /// Column mapping; defaults to `date,open,high,low,close,volume`.
    #[serde(default)]
    pub schema: CsvSchema,
    /// Formula for the derived `returns` channel.
    #[serde(default = "default_return_kind")]
    pub returns: ReturnKind,
}

fn default_return_kind() -> ReturnKind {
    ReturnKind::Simple
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    pub kind: IndicatorKind,
    pub period: usize,
}

impl IndicatorConfig {
    /// Channel name the indicator provides, e.g. `ema5` or `rsi14`.
    pub fn channel_name(&self) -> String {
        let prefix = match self.kind {
            IndicatorKind::Sma => "sma",
            IndicatorKind::Ema => "ema",
            IndicatorKind::RollingMax => "hmax",
            IndicatorKind::RollingMin => "lmin",
            IndicatorKind::Rsi => "rsi",
        };
        format!("{prefix}{}", self.period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub lookback: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    pub channels: Vec<String>,
    pub label_horizon: usize,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub method: ScaleMethod,
    #[serde(default = "default_feature_range")]
    pub feature_range: (f64, f64),
    #[serde(default = "default_order")]
    pub order: ScalingOrder,
    /// Channel grouping; when left empty the groups are derived from the
    /// channel taxonomy (prices and overlaid indicators pooled, bounded
    /// indicators divided by their bound, volume and returns separate).
    #[serde(default)]
    pub groups: ChannelGroups,
}

fn default_feature_range() -> (f64, f64) {
    (0.0, 1.0)
}

fn default_order() -> ScalingOrder {
    ScalingOrder::SliceThenScale
}

impl ScalingConfig {
    pub fn groups_are_empty(&self) -> bool {
        self.groups.overlaid.is_empty()
            && self.groups.bounded.is_empty()
            && self.groups.separate.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    pub family: LabelFamily,
    pub horizon: usize,
    #[serde(default = "default_ma_period")]
    pub ma_period: usize,
    #[serde(default)]
    pub qclass: QClassThresholds,
    #[serde(default = "default_trend_method")]
    pub trend_method: TrendMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_threshold: Option<f64>,
}

fn default_ma_period() -> usize {
    20
}

fn default_trend_method() -> TrendMethod {
    TrendMethod::Regression
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub fractions: (f64, f64, f64),
    pub seed: u64,
    #[serde(default = "default_embargo")]
    pub embargo: EmbargoConfig,
}

fn default_embargo() -> EmbargoConfig {
    EmbargoConfig::Auto
}

/// `"auto"` or an explicit slice count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmbargoConfig {
    Slices(usize),
    #[serde(with = "auto_literal")]
    Auto,
}

mod auto_literal {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<(), D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "auto" {
            Ok(())
        } else {
            Err(de::Error::custom(format!("expected \"auto\", got \"{raw}\"")))
        }
    }
}

impl From<EmbargoConfig> for Embargo {
    fn from(value: EmbargoConfig) -> Self {
        match value {
            EmbargoConfig::Auto => Embargo::Auto,
            EmbargoConfig::Slices(n) => Embargo::Slices(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceConfig {
    pub enabled: bool,
    /// Sampling seed; falls back to the split seed.
    pub seed: Option<u64>,
}

/// Scaling applied inside the probe stage; `raw` runs the control without
/// any scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeScaler {
    Raw,
    MinMax,
    Standardize,
}

impl ProbeScaler {
    pub fn as_method(self) -> Option<ScaleMethod> {
        match self {
            ProbeScaler::Raw => None,
            ProbeScaler::MinMax => Some(ScaleMethod::MinMax),
            ProbeScaler::Standardize => Some(ScaleMethod::Standardize),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProbeScaler::Raw => "raw",
            ProbeScaler::MinMax => "minmax",
            ProbeScaler::Standardize => "standardize",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeStageConfig {
    pub scaler: ProbeScaler,
    pub conditions: Vec<ProbeCondition>,
    pub lookback: usize,
    pub hidden_units: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub use_bias: bool,
}

impl Default for ProbeStageConfig {
    fn default() -> Self {
        Self {
            scaler: ProbeScaler::Standardize,
            conditions: ProbeCondition::ALL.to_vec(),
            lookback: 20,
            hidden_units: 32,
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            dropout: 0.0,
            seed: 42,
            train_fraction: 0.8,
            use_bias: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_toml(&text)?;
        let problems = config.check();
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Channel names an indicator section provides.
    pub fn indicator_channels(&self) -> Vec<String> {
        self.indicators.iter().map(|i| i.channel_name()).collect()
    }

    /// Structural and cross-field checks that need no market data.
    /// Returns an empty list when the config is usable.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();

        if self.slices.lookback <= 1 {
            problems.push("slices.lookback must be > 1".into());
        }
        if self.slices.stride == 0 {
            problems.push("slices.stride must be >= 1".into());
        }
        if self.slices.channels.is_empty() {
            problems.push("slices.channels must name at least one channel".into());
        }
        let indicator_names = self.indicator_channels();
        for name in &self.slices.channels {
            let known = BASE_CHANNELS.contains(&name.as_str())
                || indicator_names.iter().any(|n| n == name);
            if !known {
                problems.push(format!(
                    "slices.channels: unknown channel '{name}' (define an indicator or use one of {BASE_CHANNELS:?})"
                ));
            }
        }
        for ind in &self.indicators {
            if ind.period == 0 {
                problems.push(format!("indicators: {:?} period must be >= 1", ind.kind));
            }
        }

        let (lo, hi) = self.scaling.feature_range;
        if !(lo < hi) {
            problems.push(format!("scaling.feature_range: min {lo} must be below max {hi}"));
        }
        if !self.scaling.groups_are_empty() {
            let mut named: Vec<&String> = self
                .scaling
                .groups
                .overlaid
                .iter()
                .chain(self.scaling.groups.separate.iter())
                .chain(self.scaling.groups.bounded.keys())
                .collect();
            named.sort();
            for pair in named.windows(2) {
                if pair[0] == pair[1] {
                    problems.push(format!(
                        "scaling.groups: channel '{}' appears in more than one group",
                        pair[0]
                    ));
                }
            }
            for name in &self.slices.channels {
                if !named.contains(&name) {
                    problems.push(format!("scaling.groups: channel '{name}' is not grouped"));
                }
            }
            for name in named {
                if !self.slices.channels.contains(name) {
                    problems.push(format!(
                        "scaling.groups: '{name}' is not one of slices.channels"
                    ));
                }
            }
        }

        if self.label.horizon == 0 {
            problems.push("label.horizon must be >= 1".into());
        }
        if self.label.horizon > self.slices.label_horizon {
            problems.push(format!(
                "label.horizon {} exceeds slices.label_horizon {}",
                self.label.horizon, self.slices.label_horizon
            ));
        }
        if self.label.family == LabelFamily::ProbeCondition {
            problems.push("label.family: probe conditions are produced by the probe stage".into());
        }
        if self.label.family == LabelFamily::Qclass {
            if let Err(e) = self.label.qclass.validate() {
                problems.push(e.to_string());
            }
        }
        if matches!(self.label.family, LabelFamily::TrendStrength | LabelFamily::TrendDirection)
            && self.label.trend_method == TrendMethod::Regression
            && self.label.horizon < 2
        {
            problems.push("label.horizon: regression trend needs at least 2 bars".into());
        }

        let (ft, fv, fs) = self.split.fractions;
        if (ft + fv + fs - 1.0).abs() > 1e-9 {
            problems.push(format!("split.fractions must sum to 1, got {}", ft + fv + fs));
        }
        if ft <= 0.0 || fv < 0.0 || fs < 0.0 {
            problems.push("split.fractions: train must be positive, others non-negative".into());
        }

        if self.balance.enabled && self.label.family.class_count().is_none() {
            problems.push(format!(
                "balance requires a classifier label family, got {:?}",
                self.label.family
            ));
        }

        if let Some(probe) = &self.probe {
            if probe.lookback <= 1 {
                problems.push("probe.lookback must be > 1".into());
            }
            if probe.epochs == 0 {
                problems.push("probe.epochs must be >= 1".into());
            }
            if !(0.0..1.0).contains(&probe.dropout) {
                problems.push("probe.dropout must be in [0, 1)".into());
            }
            if !(0.0 < probe.train_fraction && probe.train_fraction < 1.0) {
                problems.push("probe.train_fraction must be in (0, 1)".into());
            }
            if probe.conditions.is_empty() {
                problems.push("probe.conditions must name at least one condition".into());
            }
        }
        problems
    }
}

/// Parses and checks a config file, returning the list of problems instead
/// of failing on the first.
pub fn validate_config(path: impl AsRef<Path>) -> std::result::Result<PipelineConfig, Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    let config: PipelineConfig = toml::from_str(&text).map_err(|e| vec![e.to_string()])?;
    let problems = config.check();
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(problems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
[input]
path = "data.csv"

[slices]
lookback = 20
stride = 1
channels = ["returns"]
label_horizon = 1

[[indicators]]
kind = "ema"
period = 5

[scaling]
method = "minmax"

[label]
family = "nbar_updown"
horizon = 1

[split]
fractions = [0.8, 0.2, 0.0]
seed = 42

[output]
dir = "out"
"#;

    #[test]
    fn sample_config_parses_and_checks_clean() {
        let config = PipelineConfig::from_toml(SAMPLE).unwrap();
        assert!(config.check().is_empty(), "{:?}", config.check());
        assert_eq!(config.slices.lookback, 20);
        assert_eq!(config.split.embargo, EmbargoConfig::Auto);
        assert_eq!(config.indicators[0].channel_name(), "ema5");
    }

    #[test]
    fn config_round_trips_losslessly() {
        let config = PipelineConfig::from_toml(SAMPLE).unwrap();
        let text = config.to_toml().unwrap();
        let back = PipelineConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn bad_fraction_sum_reported_under_fractions() {
        let text = SAMPLE.replace("[0.8, 0.2, 0.0]", "[0.8, 0.2, 0.1]");
        let config = PipelineConfig::from_toml(&text).unwrap();
        let problems = config.check();
        assert!(problems.iter().any(|p| p.contains("fractions")), "{problems:?}");
    }

    #[test]
    fn unknown_scaler_name_is_a_method_error() {
        let text = SAMPLE.replace("method = \"minmax\"", "method = \"quantile\"");
        let err = PipelineConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("method"), "{err}");
    }

    #[test]
    fn unknown_channel_reported() {
        let text = SAMPLE.replace("channels = [\"returns\"]", "channels = [\"macd\"]");
        let config = PipelineConfig::from_toml(&text).unwrap();
        assert!(config.check().iter().any(|p| p.contains("macd")));
    }

    #[test]
    fn label_horizon_cannot_exceed_reserved_window() {
        let mut config = PipelineConfig::from_toml(SAMPLE).unwrap();
        config.label.horizon = 5;
        assert!(config.check().iter().any(|p| p.contains("exceeds")));
    }

    #[test]
    fn embargo_accepts_auto_and_integers() {
        let with_int = SAMPLE.replace("seed = 42", "seed = 42\nembargo = 3");
        let config = PipelineConfig::from_toml(&with_int).unwrap();
        assert_eq!(config.split.embargo, EmbargoConfig::Slices(3));
        let with_auto = SAMPLE.replace("seed = 42", "seed = 42\nembargo = \"auto\"");
        let config = PipelineConfig::from_toml(&with_auto).unwrap();
        assert_eq!(config.split.embargo, EmbargoConfig::Auto);
    }
}
