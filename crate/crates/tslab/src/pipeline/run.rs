//! Pipeline execution: ingest -> indicators -> slice -> scale -> label ->
//! split -> balance -> probe/adf -> export, in the order that keeps leakage
//! structurally impossible (slice first, then scale; split, then shuffle).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::indicators;
use crate::labeling::{
    label_ma, label_nbar, label_pctq, label_qclass, label_trend, LabelFamily, LabelValues,
    LabelVector,
};
use crate::market_data::{load_csv, BarSeries, ReturnKind};
use crate::pipeline::config::{PipelineConfig, ProbeStageConfig};
use crate::pipeline::manifest::{
    ChannelAdf, DatasetManifest, LabelSummary, ProbeSummary, RealStats, SplitSummary,
};
use crate::probe::{run_learnability_suite, ProbeReport, SuiteOptions, TrainConfig};
use crate::scaling::{scale_slices, scale_then_slice, ChannelGroups, ScalerConfig, ScalingOrder};
use crate::splitting::{downsample_majority, split_then_shuffle, SplitPlan};
use crate::stationarity::adf_on_slices;
use crate::windowing::{flatten, make_slices_from, warmup_offset, Channel, SliceSpec, SliceTensor};

/// Lag cap for the per-channel stationarity summary; the concatenated
/// series can be long and the summary does not need the full lag search.
const SUMMARY_MAX_LAGS: usize = 12;

/// Everything a pipeline run computes before export.
#[derive(Debug, Clone)]
pub struct BuiltDataset {
    pub series: BarSeries,
    pub spec: SliceSpec,
    pub warmup: usize,
    pub tensor: SliceTensor,
    pub labels: LabelVector,
    pub split: SplitPlan,
    pub balanced_train_order: Option<Vec<usize>>,
    pub probe_reports: Option<Vec<(String, ProbeReport)>>,
}

pub fn slice_spec(config: &PipelineConfig) -> SliceSpec {
    SliceSpec {
        lookback: config.slices.lookback,
        stride: config.slices.stride,
        channels: config.slices.channels.clone(),
        label_horizon: config.slices.label_horizon,
    }
}

pub fn load_input(config: &PipelineConfig) -> Result<BarSeries> {
    load_csv(&config.input.path, &config.input.schema)
        .map_err(|e| Error::stage("ingest", e))
}

/// Bar-aligned channel for a base name; derived series carry NaN warm-ups.
fn base_channel(name: &str, series: &BarSeries, returns: ReturnKind) -> Result<Option<Vec<f64>>> {
    let values = match name {
        "open" => Some(series.open_vector()),
        "high" => Some(series.high_vector()),
        "low" => Some(series.low_vector()),
        "close" => Some(series.close_vector()),
        "volume" => Some(series.volume_vector().ok_or_else(|| {
            Error::ChannelMismatch("volume channel requested but the input has no volume".into())
        })?),
        "returns" | "log_returns" => {
            let kind = if name == "returns" { returns } else { ReturnKind::Log };
            let r = series.to_returns(kind)?;
            let mut aligned = Vec::with_capacity(series.len());
            aligned.push(f64::NAN);
            aligned.extend(r.values);
            Some(aligned)
        }
        _ => None,
    };
    Ok(values)
}

/// Resolves the configured channel names against the bar series and the
/// indicator definitions.
pub fn build_channels(config: &PipelineConfig, series: &BarSeries) -> Result<Vec<Channel>> {
    let closes = series.close_vector();
    let mut computed: Vec<indicators::IndicatorSeries> = Vec::new();
    for ind in &config.indicators {
        computed.push(
            indicators::compute(ind.kind, &closes, ind.period)
                .map_err(|e| Error::stage("indicators", e))?,
        );
    }
    let mut channels = Vec::with_capacity(config.slices.channels.len());
    for name in &config.slices.channels {
        let values = match base_channel(name, series, config.input.returns)
            .map_err(|e| Error::stage("channels", e))?
        {
            Some(v) => v,
            None => computed
                .iter()
                .find(|i| &i.name == name)
                .map(|i| i.values.clone())
                .ok_or_else(|| {
                    Error::stage(
                        "channels",
                        Error::ChannelMismatch(format!("unknown channel '{name}'")),
                    )
                })?,
        };
        channels.push(Channel::new(name.clone(), values));
    }
    Ok(channels)
}

/// Scaling groups: the configured partition, or one derived from the
/// channel taxonomy when the config leaves groups empty.
pub fn resolve_groups(config: &PipelineConfig) -> ChannelGroups {
    if !config.scaling.groups_are_empty() {
        return config.scaling.groups.clone();
    }
    let mut groups = ChannelGroups::default();
    for name in &config.slices.channels {
        let overlaid = matches!(name.as_str(), "open" | "high" | "low" | "close")
            || ["sma", "ema", "hmax", "lmin"].iter().any(|p| name.starts_with(p));
        if overlaid {
            groups.overlaid.push(name.clone());
        } else if name.starts_with("rsi") {
            groups.bounded.insert(name.clone(), 100.0);
        } else {
            groups.separate.push(name.clone());
        }
    }
    groups
}

fn scaler_config(config: &PipelineConfig) -> ScalerConfig {
    ScalerConfig {
        method: config.scaling.method,
        feature_range: config.scaling.feature_range,
        groups: resolve_groups(config),
    }
}

/// Slices the channels past their warm-up. Returns the tensor (unscaled)
/// and the source offset where slicing began.
pub fn build_unscaled(config: &PipelineConfig, channels: &[Channel]) -> Result<(SliceTensor, usize)> {
    let spec = slice_spec(config);
    let warmup = warmup_offset(channels).map_err(|e| Error::stage("slice", e))?;
    let tensor =
        make_slices_from(channels, &spec, warmup).map_err(|e| Error::stage("slice", e))?;
    Ok((tensor, warmup))
}

/// Applies the configured scaling in the configured order.
pub fn build_scaled(
    config: &PipelineConfig,
    channels: &[Channel],
    unscaled: &SliceTensor,
    warmup: usize,
) -> Result<SliceTensor> {
    let scaler = scaler_config(config);
    match config.scaling.order {
        ScalingOrder::SliceThenScale => {
            scale_slices(unscaled, &scaler).map_err(|e| Error::stage("scale", e))
        }
        ScalingOrder::ScaleThenSlice => {
            scale_then_slice(channels, &slice_spec(config), &scaler, warmup)
                .map_err(|e| Error::stage("scale", e))
        }
    }
}

/// Labels at the tensor's end indices, always computed from the raw bars.
pub fn build_labels(
    config: &PipelineConfig,
    series: &BarSeries,
    end_indices: &[usize],
) -> Result<LabelVector> {
    let closes = series.close_vector();
    let label = &config.label;
    let result = match label.family {
        LabelFamily::NbarUpdown | LabelFamily::NbarChange | LabelFamily::NbarLogret => {
            label_nbar(&closes, end_indices, label.horizon, label.family)
        }
        LabelFamily::MaUpdown => label_ma(&closes, end_indices, label.horizon, label.ma_period),
        LabelFamily::Pctq => label_pctq(
            &series.high_vector(),
            &series.low_vector(),
            &closes,
            end_indices,
            label.horizon,
        ),
        LabelFamily::Qclass => {
            let pctq = label_pctq(
                &series.high_vector(),
                &series.low_vector(),
                &closes,
                end_indices,
                label.horizon,
            )?;
            label_qclass(&pctq, label.qclass)
        }
        LabelFamily::TrendStrength | LabelFamily::TrendDirection => label_trend(
            &closes,
            end_indices,
            label.horizon,
            label.trend_method,
            label.ma_period,
            label.direction_threshold,
            label.family == LabelFamily::TrendDirection,
        ),
        LabelFamily::ProbeCondition => Err(Error::Config(
            "probe conditions are produced by the probe stage".into(),
        )),
    };
    result.map_err(|e| Error::stage("label", e))
}

pub fn build_split(config: &PipelineConfig, slice_count: usize) -> Result<SplitPlan> {
    split_then_shuffle(
        slice_count,
        config.split.fractions,
        config.split.seed,
        &slice_spec(config),
        config.split.embargo.into(),
    )
    .map_err(|e| Error::stage("split", e))
}

pub fn build_balance(
    config: &PipelineConfig,
    labels: &LabelVector,
    split: &SplitPlan,
) -> Result<Option<Vec<usize>>> {
    if !config.balance.enabled {
        return Ok(None);
    }
    let seed = config.balance.seed.unwrap_or(config.split.seed);
    downsample_majority(labels, &split.train_order, seed)
        .map(Some)
        .map_err(|e| Error::stage("balance", e))
}

fn probe_options(probe: &ProbeStageConfig) -> SuiteOptions {
    SuiteOptions {
        lookback: probe.lookback,
        hidden_units: probe.hidden_units,
        train: TrainConfig {
            epochs: probe.epochs,
            batch_size: probe.batch_size,
            learning_rate: probe.learning_rate,
            seed: probe.seed,
            dropout_rate: probe.dropout,
        },
        train_fraction: probe.train_fraction,
        use_bias: probe.use_bias,
        conditions: probe.conditions.clone(),
    }
}

pub fn build_probe(
    config: &PipelineConfig,
    series: &BarSeries,
) -> Result<Option<Vec<(String, ProbeReport)>>> {
    let Some(probe) = &config.probe else {
        return Ok(None);
    };
    let closes = series.close_vector();
    let reports = run_learnability_suite(&closes, probe.scaler.as_method(), &probe_options(probe))
        .map_err(|e| Error::stage("probe", e))?;
    Ok(Some(
        reports
            .into_iter()
            .map(|(cond, report)| (cond.short_name().to_string(), report))
            .collect(),
    ))
}

/// Runs every configured stage in memory.
pub fn build_dataset(config: &PipelineConfig) -> Result<BuiltDataset> {
    let series = load_input(config)?;
    let channels = build_channels(config, &series)?;
    let (unscaled, warmup) = build_unscaled(config, &channels)?;
    let labels = build_labels(config, &series, &unscaled.end_indices)?;
    let tensor = build_scaled(config, &channels, &unscaled, warmup)?;
    let split = build_split(config, tensor.slice_count())?;
    let balanced_train_order = build_balance(config, &labels, &split)?;
    let probe_reports = build_probe(config, &series)?;
    Ok(BuiltDataset {
        series,
        spec: slice_spec(config),
        warmup,
        tensor,
        labels,
        split,
        balanced_train_order,
        probe_reports,
    })
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn label_summary(labels: &LabelVector) -> LabelSummary {
    let real_stats = labels.values.as_reals().map(|reals| {
        let min = reals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = reals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = reals.iter().sum::<f64>() / reals.len().max(1) as f64;
        RealStats { min, max, mean }
    });
    LabelSummary {
        family: format!("{:?}", labels.family),
        class_histogram: labels.class_histogram(),
        real_stats,
    }
}

fn adf_summary(tensor: &SliceTensor) -> Vec<ChannelAdf> {
    (0..tensor.channel_count())
        .map(|c| {
            let channel = tensor.channel_names[c].clone();
            match adf_on_slices(tensor, c, Some(SUMMARY_MAX_LAGS)) {
                Ok(report) => ChannelAdf {
                    channel,
                    statistic: Some(report.statistic),
                    p_value: Some(report.p_value),
                    lags_used: Some(report.lags_used),
                    error: None,
                },
                Err(e) => ChannelAdf {
                    channel,
                    statistic: None,
                    p_value: None,
                    lags_used: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Tracks written files so a failed export never leaves partial outputs.
struct ExportGuard {
    written: Vec<PathBuf>,
    committed: bool,
}

impl ExportGuard {
    fn new() -> Self {
        Self { written: Vec::new(), committed: false }
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.written.push(path.to_path_buf());
        file.write_all(bytes).map_err(|e| Error::io(path, e))
    }
}

impl Drop for ExportGuard {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

pub fn tensor_blob_bytes(tensor: &SliceTensor) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(tensor.raw_data().len() * 8);
    for v in tensor.raw_data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

#[derive(serde::Serialize)]
struct TensorMeta<'a> {
    shape: (usize, usize, usize),
    channel_names: &'a [String],
    end_indices: &'a [usize],
    stride: usize,
    label_horizon: usize,
    warmup_offset: usize,
    scaling: &'a Option<crate::scaling::ScalingInfo>,
}

pub fn tensor_meta_json(tensor: &SliceTensor, warmup: usize) -> Result<Vec<u8>> {
    let meta = TensorMeta {
        shape: tensor.shape(),
        channel_names: &tensor.channel_names,
        end_indices: &tensor.end_indices,
        stride: tensor.stride,
        label_horizon: tensor.label_horizon,
        warmup_offset: warmup,
        scaling: &tensor.scaling,
    };
    Ok(serde_json::to_vec_pretty(&meta)?)
}

pub fn flattened_csv_bytes(tensor: &SliceTensor) -> Vec<u8> {
    let (_, s, _) = tensor.shape();
    let mut out = String::new();
    out.push_str("end_index");
    for step in 0..s {
        for name in &tensor.channel_names {
            out.push_str(&format!(",{name}_t{step}"));
        }
    }
    out.push('\n');
    for (k, row) in flatten(tensor).into_iter().enumerate() {
        out.push_str(&tensor.end_indices[k].to_string());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn labels_csv_bytes(labels: &LabelVector, end_indices: &[usize]) -> Vec<u8> {
    let mut out = String::from("end_index,value\n");
    match &labels.values {
        LabelValues::Classes(classes) => {
            for (&e, &c) in end_indices.iter().zip(classes) {
                out.push_str(&format!("{e},{c}\n"));
            }
        }
        LabelValues::Reals(reals) => {
            for (&e, &v) in end_indices.iter().zip(reals) {
                out.push_str(&format!("{e},{v}\n"));
            }
        }
    }
    out.into_bytes()
}

fn losses_csv_bytes(report: &ProbeReport) -> Vec<u8> {
    let mut out = String::from("epoch,train_loss,val_loss\n");
    for (epoch, (t, v)) in report.train_loss.iter().zip(&report.val_loss).enumerate() {
        out.push_str(&format!("{epoch},{t},{v}\n"));
    }
    out.into_bytes()
}

#[derive(serde::Serialize)]
struct SplitDocument<'a> {
    plan: &'a SplitPlan,
    balanced_train_order: &'a Option<Vec<usize>>,
}

#[derive(serde::Serialize)]
struct ProbeDocument<'a> {
    condition: &'a str,
    scaler: &'a str,
    report: &'a ProbeReport,
}

/// Runs the full pipeline and writes every output into the configured
/// directory. Outputs are removed again if any write fails.
pub fn run_pipeline(config: &PipelineConfig) -> Result<DatasetManifest> {
    let problems = config.check();
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    let built = build_dataset(config)?;
    let input_digest = sha256_hex(&config.input.path).map_err(|e| Error::stage("export", e))?;

    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let scaler_name = match &config.probe {
        Some(p) => p.scaler.name(),
        None => "",
    };
    let mut files = vec![
        "tensor.bin".to_string(),
        "tensor_meta.json".to_string(),
        "flattened.csv".to_string(),
        "labels.csv".to_string(),
        "split.json".to_string(),
    ];
    if let Some(reports) = &built.probe_reports {
        files.push("probe_report.json".to_string());
        for (cond, _) in reports {
            files.push(format!("probe_losses_{cond}_{scaler_name}.csv"));
        }
    }
    files.push("manifest.json".to_string());

    let mut warnings = Vec::new();
    if let Some(info) = &built.tensor.scaling {
        warnings.extend(info.warnings.iter().cloned());
    }
    warnings.extend(built.labels.warnings.iter().cloned());

    let manifest = DatasetManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        symbol: built.series.symbol().to_string(),
        input_digest,
        input_rows: built.series.len(),
        tensor_shape: built.tensor.shape(),
        warmup_offset: built.warmup,
        labels: label_summary(&built.labels),
        split: SplitSummary {
            method: built.split.method,
            seed: built.split.seed,
            train: (built.split.train_range.start, built.split.train_range.end),
            embargo: (built.split.embargo_range.start, built.split.embargo_range.end),
            val: (built.split.val_range.start, built.split.val_range.end),
            test: (built.split.test_range.start, built.split.test_range.end),
            balanced_train_size: built.balanced_train_order.as_ref().map(|v| v.len()),
        },
        leakage: built.split.leakage.clone(),
        adf_scaled: adf_summary(&built.tensor),
        probe: built.probe_reports.as_ref().map(|reports| {
            reports
                .iter()
                .map(|(cond, report)| ProbeSummary {
                    condition: cond.clone(),
                    scaler: scaler_name.to_string(),
                    accuracy: report.accuracy,
                    precision: report.precision.clone(),
                })
                .collect()
        }),
        files,
        warnings,
        config: config.clone(),
    };

    let mut guard = ExportGuard::new();
    let write_stage = |guard: &mut ExportGuard, name: &str, bytes: &[u8]| -> Result<()> {
        guard
            .write(&dir.join(name), bytes)
            .map_err(|e| Error::stage("export", e))
    };
    write_stage(&mut guard, "tensor.bin", &tensor_blob_bytes(&built.tensor))?;
    write_stage(&mut guard, "tensor_meta.json", &tensor_meta_json(&built.tensor, built.warmup)?)?;
    write_stage(&mut guard, "flattened.csv", &flattened_csv_bytes(&built.tensor))?;
    write_stage(
        &mut guard,
        "labels.csv",
        &labels_csv_bytes(&built.labels, &built.tensor.end_indices),
    )?;
    let split_doc = SplitDocument {
        plan: &built.split,
        balanced_train_order: &built.balanced_train_order,
    };
    write_stage(&mut guard, "split.json", &serde_json::to_vec_pretty(&split_doc)?)?;
    if let Some(reports) = &built.probe_reports {
        let docs: Vec<ProbeDocument> = reports
            .iter()
            .map(|(cond, report)| ProbeDocument { condition: cond, scaler: scaler_name, report })
            .collect();
        write_stage(&mut guard, "probe_report.json", &serde_json::to_vec_pretty(&docs)?)?;
        for (cond, report) in reports {
            write_stage(
                &mut guard,
                &format!("probe_losses_{cond}_{scaler_name}.csv"),
                &losses_csv_bytes(report),
            )?;
        }
    }
    write_stage(&mut guard, "manifest.json", &serde_json::to_vec_pretty(&manifest)?)?;
    guard.committed = true;

    Ok(manifest)
}
