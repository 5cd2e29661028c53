//! Dataset manifest: everything needed to audit or reproduce a pipeline run.

use serde::{Deserialize, Serialize};

use crate::pipeline::config::PipelineConfig;
use crate::splitting::{LeakageAudit, SplitMethod};

/// Summary of the labels written alongside the tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub family: String,
    /// Per-class counts for classifier families (sums to the slice count);
    /// empty for regression targets.
    pub class_histogram: Vec<usize>,
    /// Range and mean for regression targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub real_stats: Option<RealStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub method: SplitMethod,
    pub seed: u64,
    pub train: (usize, usize),
    pub embargo: (usize, usize),
    pub val: (usize, usize),
    pub test: (usize, usize),
    pub balanced_train_size: Option<usize>,
}

/// ADF result for one channel of the final (scaled) tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelAdf {
    pub channel: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lags_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub condition: String,
    pub scaler: String,
    pub accuracy: f64,
    pub precision: Vec<f64>,
}

/// The record written next to every dataset. Re-running the embedded config
/// snapshot against an input whose digest matches reproduces every output
/// byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    pub symbol: String,
    /// SHA-256 of the raw input file bytes.
    pub input_digest: String,
    pub input_rows: usize,
    pub tensor_shape: (usize, usize, usize),
    /// Source index where slicing began (end of the indicator warm-up).
    pub warmup_offset: usize,
    pub labels: LabelSummary,
    pub split: SplitSummary,
    pub leakage: LeakageAudit,
    /// Stationarity of each scaled channel, slices concatenated.
    pub adf_scaled: Vec<ChannelAdf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<ProbeSummary>>,
    /// Files the run produced, relative to the output directory.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    /// Exact configuration snapshot.
    pub config: PipelineConfig,
}

impl DatasetManifest {
    /// Compact aligned-text rendering for the terminal.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(&format!("{k:<18} {v}\n"));
        };
        line("tool version", self.tool_version.clone());
        line("symbol", self.symbol.clone());
        line("input digest", self.input_digest.clone());
        line("input rows", self.input_rows.to_string());
        let (m, s, i) = self.tensor_shape;
        line("tensor shape", format!("({m}, {s}, {i})"));
        line("warm-up offset", self.warmup_offset.to_string());
        line("label family", self.labels.family.clone());
        if !self.labels.class_histogram.is_empty() {
            line("label histogram", format!("{:?}", self.labels.class_histogram));
        }
        if let Some(stats) = &self.labels.real_stats {
            line(
                "label range",
                format!("[{:.6}, {:.6}] mean {:.6}", stats.min, stats.max, stats.mean),
            );
        }
        line(
            "split",
            format!(
                "train {:?} embargo {:?} val {:?} test {:?} seed {}",
                self.split.train, self.split.embargo, self.split.val, self.split.test,
                self.split.seed
            ),
        );
        if let Some(balanced) = self.split.balanced_train_size {
            line("balanced train", balanced.to_string());
        }
        line(
            "leakage",
            format!(
                "max {:.4} mean {:.4} pairs {} label-violations {}",
                self.leakage.max_cross_overlap,
                self.leakage.mean_cross_overlap,
                self.leakage.violating_pairs,
                self.leakage.label_window_violations
            ),
        );
        for adf in &self.adf_scaled {
            match (adf.statistic, adf.p_value) {
                (Some(stat), Some(p)) => line(
                    &format!("adf[{}]", adf.channel),
                    format!("stat {stat:.4} p {p:.6} lags {}", adf.lags_used.unwrap_or(0)),
                ),
                _ => line(
                    &format!("adf[{}]", adf.channel),
                    format!("skipped: {}", adf.error.clone().unwrap_or_default()),
                ),
            }
        }
        if let Some(probe) = &self.probe {
            for p in probe {
                line(
                    &format!("probe[{}/{}]", p.condition, p.scaler),
                    format!("accuracy {:.4} precision {:?}", p.accuracy, p.precision),
                );
            }
        }
        for w in &self.warnings {
            line("warning", w.clone());
        }
        line("files", self.files.join(", "));
        out
    }
}
