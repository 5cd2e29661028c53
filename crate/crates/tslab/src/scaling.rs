//! Per-slice scaling with channel grouping.
//!
//! Every slice is scaled independently of all others. Within a slice the
//! overlaid channels (prices and anything plotted on the price axis) share
//! one set of statistics pooled across channels and timesteps, so their
//! relative positions survive scaling; each separate channel gets its own
//! statistics; bounded channels are simply divided by their bound so fixed
//! reference levels keep their meaning (RSI 70 becomes 0.7).
//!
//! `scale_then_slice` applies one global scaling before slicing instead.
//! It exists for comparison and is flagged as not recommended in the
//! output metadata: distant slices land in disjoint value ranges and the
//! long-term trend leaks into every example.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::windowing::{make_slices_from, Channel, SliceSpec, SliceTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    #[serde(rename = "minmax")]
    MinMax,
    Standardize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingOrder {
    /// Slice first, then scale each slice independently (recommended).
    SliceThenScale,
    /// One global scaling before slicing; kept for comparison runs.
    ScaleThenSlice,
}

/// Partition of tensor channels into scaling groups.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelGroups {
    /// Channels scaled jointly with pooled statistics.
    pub overlaid: Vec<String>,
    /// Channel name -> fixed bound to divide by.
    pub bounded: BTreeMap<String, f64>,
    /// Channels scaled independently, one set of statistics each.
    pub separate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerConfig {
    pub method: ScaleMethod,
    /// Target range for minmax; ignored by standardization.
    pub feature_range: (f64, f64),
    pub groups: ChannelGroups,
}

impl ScalerConfig {
    /// Minmax into `[0, 1]` treating every channel as overlaid.
    pub fn minmax_unit(channels: &[String]) -> Self {
        Self {
            method: ScaleMethod::MinMax,
            feature_range: (0.0, 1.0),
            groups: ChannelGroups { overlaid: channels.to_vec(), ..Default::default() },
        }
    }

    /// Standardization treating every channel as overlaid.
    pub fn standardize(channels: &[String]) -> Self {
        Self {
            method: ScaleMethod::Standardize,
            feature_range: (0.0, 1.0),
            groups: ChannelGroups { overlaid: channels.to_vec(), ..Default::default() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.feature_range;
        if !(lo < hi) {
            return Err(Error::Config(format!("feature_range min {lo} must be below max {hi}")));
        }
        for (name, bound) in &self.bounded() {
            if !bound.is_finite() || *bound <= 0.0 {
                return Err(Error::Config(format!("bounded channel '{name}' needs a positive bound")));
            }
        }
        Ok(())
    }

    fn bounded(&self) -> BTreeMap<String, f64> {
        self.groups.bounded.clone()
    }

    /// Resolves group membership to channel indices of `tensor_channels`,
    /// checking the groups partition the channels exactly.
    fn resolve(&self, tensor_channels: &[String]) -> Result<Vec<GroupSpec>> {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for name in self
            .groups
            .overlaid
            .iter()
            .chain(self.groups.separate.iter())
            .chain(self.groups.bounded.keys())
        {
            *seen.entry(name.as_str()).or_insert(0) += 1;
            if seen[name.as_str()] > 1 {
                return Err(Error::Config(format!("channel '{name}' assigned to multiple groups")));
            }
        }
        for name in tensor_channels {
            if !seen.contains_key(name.as_str()) {
                return Err(Error::Config(format!("channel '{name}' missing from scaling groups")));
            }
        }
        for name in seen.keys() {
            if !tensor_channels.iter().any(|c| c == name) {
                return Err(Error::Config(format!("scaling group names unknown channel '{name}'")));
            }
        }

        let index_of = |name: &str| tensor_channels.iter().position(|c| c == name).unwrap();
        let mut groups = Vec::new();
        let overlaid: Vec<usize> = self.groups.overlaid.iter().map(|n| index_of(n)).collect();
        if !overlaid.is_empty() {
            groups.push(GroupSpec { channels: overlaid, bound: None });
        }
        for name in &self.groups.separate {
            groups.push(GroupSpec { channels: vec![index_of(name)], bound: None });
        }
        for (name, bound) in &self.groups.bounded {
            groups.push(GroupSpec { channels: vec![index_of(name)], bound: Some(*bound) });
        }
        Ok(groups)
    }
}

struct GroupSpec {
    channels: Vec<usize>,
    bound: Option<f64>,
}

/// Statistics used to scale one group inside one slice, kept for inversion
/// and audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupStats {
    MinMax { x_min: f64, x_max: f64 },
    Standard { mean: f64, std_dev: f64 },
    Bounded { bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeta {
    /// Channel indices the statistics were pooled over.
    pub channels: Vec<usize>,
    pub stats: GroupStats,
    /// True when the group was flat (zero range or zero variance) and the
    /// degenerate fill was used.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceScalingMeta {
    pub groups: Vec<GroupMeta>,
}

/// Scaling provenance attached to a scaled tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingInfo {
    pub method: ScaleMethod,
    pub feature_range: (f64, f64),
    pub order: ScalingOrder,
    pub per_slice: Vec<SliceScalingMeta>,
    pub warnings: Vec<String>,
}

fn group_stats(
    method: ScaleMethod,
    values: impl Iterator<Item = f64> + Clone,
    count: usize,
) -> (GroupStats, bool) {
    match method {
        ScaleMethod::MinMax => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (GroupStats::MinMax { x_min: lo, x_max: hi }, hi == lo)
        }
        ScaleMethod::Standardize => {
            let n = count as f64;
            let mean = values.clone().sum::<f64>() / n;
            let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let std_dev = var.sqrt();
            (GroupStats::Standard { mean, std_dev }, std_dev == 0.0)
        }
    }
}

fn apply_stats(v: f64, stats: &GroupStats, degenerate: bool, range: (f64, f64)) -> f64 {
    match stats {
        GroupStats::MinMax { x_min, x_max } => {
            if degenerate {
                (range.0 + range.1) / 2.0
            } else {
                (v - x_min) / (x_max - x_min) * (range.1 - range.0) + range.0
            }
        }
        GroupStats::Standard { mean, std_dev } => {
            if degenerate {
                0.0
            } else {
                (v - mean) / std_dev
            }
        }
        GroupStats::Bounded { bound } => v / bound,
    }
}

fn invert_stats(z: f64, stats: &GroupStats, degenerate: bool, range: (f64, f64)) -> f64 {
    match stats {
        GroupStats::MinMax { x_min, x_max } => {
            if degenerate {
                *x_min
            } else {
                (z - range.0) / (range.1 - range.0) * (x_max - x_min) + x_min
            }
        }
        GroupStats::Standard { mean, std_dev } => {
            if degenerate {
                *mean
            } else {
                z * std_dev + mean
            }
        }
        GroupStats::Bounded { bound } => z * bound,
    }
}

/// Scales every slice independently, attaching per-slice statistics.
pub fn scale_slices(slices: &SliceTensor, config: &ScalerConfig) -> Result<SliceTensor> {
    if slices.scaling.is_some() {
        return Err(Error::Config("tensor is already scaled".into()));
    }
    config.validate()?;
    let groups = config.resolve(&slices.channel_names)?;
    let (m, s, _i) = slices.shape();

    let mut out = slices.clone();
    let mut per_slice = Vec::with_capacity(m);
    let mut warnings = Vec::new();
    for k in 0..m {
        let mut metas = Vec::with_capacity(groups.len());
        for g in &groups {
            let (stats, degenerate) = match g.bound {
                Some(bound) => (GroupStats::Bounded { bound }, false),
                None => {
                    let values = g
                        .channels
                        .iter()
                        .flat_map(|&c| (0..s).map(move |t| (t, c)))
                        .map(|(t, c)| slices.value(k, t, c));
                    group_stats(config.method, values, s * g.channels.len())
                }
            };
            if degenerate {
                warnings.push(format!(
                    "slice {k}: flat group over channels {:?}; degenerate fill applied",
                    g.channels
                ));
            }
            for &c in &g.channels {
                for t in 0..s {
                    let v = slices.value(k, t, c);
                    out.set_value(k, t, c, apply_stats(v, &stats, degenerate, config.feature_range));
                }
            }
            metas.push(GroupMeta { channels: g.channels.clone(), stats, degenerate });
        }
        per_slice.push(SliceScalingMeta { groups: metas });
    }

    out.scaling = Some(ScalingInfo {
        method: config.method,
        feature_range: config.feature_range,
        order: ScalingOrder::SliceThenScale,
        per_slice,
        warnings,
    });
    Ok(out)
}

/// Applies ONE global scaling over the full series, then slices.
///
/// Provided for reproducing the ordering comparison; the output metadata
/// flags it as not recommended. Statistics pool over the defined (non-NaN)
/// entries of each group's channels.
pub fn scale_then_slice(
    channels: &[Channel],
    spec: &SliceSpec,
    config: &ScalerConfig,
    start: usize,
) -> Result<SliceTensor> {
    config.validate()?;
    let names: Vec<String> = channels.iter().map(|c| c.name.clone()).collect();
    let groups = config.resolve(&names)?;

    let mut scaled: Vec<Channel> = channels.to_vec();
    let mut metas = Vec::with_capacity(groups.len());
    let mut warnings = vec!["global scale-then-slice ordering is not recommended".to_string()];
    for g in &groups {
        let (stats, degenerate) = match g.bound {
            Some(bound) => (GroupStats::Bounded { bound }, false),
            None => {
                let values = g
                    .channels
                    .iter()
                    .flat_map(|&c| channels[c].values.iter().copied())
                    .filter(|v| !v.is_nan());
                let count = values.clone().count();
                if count == 0 {
                    return Err(Error::UndefinedValues("group has no defined values".into()));
                }
                group_stats(config.method, values, count)
            }
        };
        if degenerate {
            warnings.push(format!(
                "flat group over channels {:?}; degenerate fill applied",
                g.channels
            ));
        }
        for &c in &g.channels {
            for v in scaled[c].values.iter_mut() {
                if !v.is_nan() {
                    *v = apply_stats(*v, &stats, degenerate, config.feature_range);
                }
            }
        }
        metas.push(GroupMeta { channels: g.channels.clone(), stats, degenerate });
    }

    let mut tensor = make_slices_from(&scaled, spec, start)?;
    let m = tensor.slice_count();
    tensor.scaling = Some(ScalingInfo {
        method: config.method,
        feature_range: config.feature_range,
        order: ScalingOrder::ScaleThenSlice,
        per_slice: vec![SliceScalingMeta { groups: metas }; m],
        warnings,
    });
    Ok(tensor)
}

/// Reconstructs the pre-scaling tensor from the stored statistics.
pub fn invert_scaling(slices: &SliceTensor) -> Result<SliceTensor> {
    let info = slices.scaling.as_ref().ok_or(Error::MissingScalingMeta)?;
    let (m, s, _i) = slices.shape();
    if info.per_slice.len() != m {
        return Err(Error::DimensionMismatch(
            "scaling metadata does not cover every slice".into(),
        ));
    }
    let mut out = slices.clone();
    for k in 0..m {
        for g in &info.per_slice[k].groups {
            for &c in &g.channels {
                for t in 0..s {
                    let z = slices.value(k, t, c);
                    out.set_value(k, t, c, invert_stats(z, &g.stats, g.degenerate, info.feature_range));
                }
            }
        }
    }
    out.scaling = None;
    Ok(out)
}
