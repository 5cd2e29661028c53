//! Overlapping slice construction: turning aligned channels into a
//! `(slices, timesteps, channels)` tensor.
//!
//! Slices are indexed by their end bar, and the label horizon is reserved at
//! construction time: the last `label_horizon` bars never end a slice, so
//! every emitted slice has a full future window and labeling cannot run off
//! the end of the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::ScalingInfo;

/// One named channel aligned to the source bar series. Warm-up entries
/// (indicator seeding, the first return) are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

impl Channel {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), values }
    }
}

/// Geometry of the slice dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    /// Bars per slice; must exceed 1.
    pub lookback: usize,
    /// Increment between consecutive slice starts.
    pub stride: usize,
    /// Channel names, in tensor order.
    pub channels: Vec<String>,
    /// Future bars reserved after each slice for labeling.
    pub label_horizon: usize,
}

impl SliceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lookback <= 1 {
            return Err(Error::InvalidParameter("lookback must be > 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidParameter("at least one channel required".into()));
        }
        Ok(())
    }
}

/// Dataset of `K` slices, `n` timesteps, `i` channels, stored row-major as
/// `(slice, timestep, channel)`, with per-slice provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceTensor {
    data: Vec<f64>,
    slice_count: usize,
    timesteps: usize,
    channel_count: usize,
    /// Source index of each slice's last bar; strictly increasing by stride.
    pub end_indices: Vec<usize>,
    pub channel_names: Vec<String>,
    pub stride: usize,
    pub label_horizon: usize,
    /// Present once the tensor has been scaled.
    pub scaling: Option<ScalingInfo>,
}

impl SliceTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.slice_count, self.timesteps, self.channel_count)
    }

    pub fn slice_count(&self) -> usize {
        self.slice_count
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    #[inline]
    pub fn value(&self, slice: usize, step: usize, channel: usize) -> f64 {
        self.data[(slice * self.timesteps + step) * self.channel_count + channel]
    }

    #[inline]
    pub fn set_value(&mut self, slice: usize, step: usize, channel: usize, v: f64) {
        self.data[(slice * self.timesteps + step) * self.channel_count + channel] = v;
    }

    /// Raw row-major `(m, s, i)` storage.
    pub fn raw_data(&self) -> &[f64] {
        &self.data
    }

    /// One slice as a contiguous `(timesteps * channels)` block.
    pub fn slice_block(&self, slice: usize) -> &[f64] {
        let w = self.timesteps * self.channel_count;
        &self.data[slice * w..(slice + 1) * w]
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|n| n == name)
    }

    /// Rebuilds a tensor from parts; used by scaling and deserialization.
    pub fn from_parts(
        data: Vec<f64>,
        shape: (usize, usize, usize),
        end_indices: Vec<usize>,
        channel_names: Vec<String>,
        stride: usize,
        label_horizon: usize,
        scaling: Option<ScalingInfo>,
    ) -> Result<Self> {
        let (m, s, i) = shape;
        if data.len() != m * s * i {
            return Err(Error::DimensionMismatch(format!(
                "data length {} does not match shape ({m}, {s}, {i})",
                data.len()
            )));
        }
        if end_indices.len() != m {
            return Err(Error::DimensionMismatch("end_indices length != slice count".into()));
        }
        if channel_names.len() != i {
            return Err(Error::DimensionMismatch("channel_names length != channel count".into()));
        }
        Ok(Self {
            data,
            slice_count: m,
            timesteps: s,
            channel_count: i,
            end_indices,
            channel_names,
            stride,
            label_horizon,
            scaling,
        })
    }
}

/// First index at which every channel is defined (non-NaN), i.e. the end of
/// the longest warm-up. Returns an error when some channel never defines.
pub fn warmup_offset(channels: &[Channel]) -> Result<usize> {
    let mut offset = 0;
    for ch in channels {
        let first = ch
            .values
            .iter()
            .position(|v| !v.is_nan())
            .ok_or_else(|| Error::UndefinedValues(format!("channel '{}' has no defined values", ch.name)))?;
        offset = offset.max(first);
    }
    Ok(offset)
}

/// Builds the slice tensor over source indices `[start, T)`.
///
/// `K = floor((T' - n - label_horizon) / stride) + 1` slices with
/// `T' = T - start`; slice `k` covers `[start + k*stride, start + k*stride + n - 1]`,
/// and `end_indices` refer to the original (untrimmed) source indexing.
pub fn make_slices_from(channels: &[Channel], spec: &SliceSpec, start: usize) -> Result<SliceTensor> {
    spec.validate()?;
    if channels.len() != spec.channels.len()
        || channels.iter().zip(&spec.channels).any(|(c, n)| &c.name != n)
    {
        return Err(Error::ChannelMismatch(format!(
            "channels {:?} do not match spec {:?}",
            channels.iter().map(|c| &c.name).collect::<Vec<_>>(),
            spec.channels
        )));
    }
    let t_total = channels[0].values.len();
    if channels.iter().any(|c| c.values.len() != t_total) {
        return Err(Error::ChannelMismatch("channels have differing lengths".into()));
    }
    let n = spec.lookback;
    let usable = t_total.saturating_sub(start);
    if usable < n + spec.label_horizon {
        return Err(Error::SeriesTooShort {
            needed: start + n + spec.label_horizon,
            got: t_total,
        });
    }
    let k_count = (usable - n - spec.label_horizon) / spec.stride + 1;

    let mut data = Vec::with_capacity(k_count * n * channels.len());
    let mut end_indices = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let begin = start + k * spec.stride;
        for step in 0..n {
            for ch in channels {
                let v = ch.values[begin + step];
                if v.is_nan() {
                    return Err(Error::UndefinedValues(format!(
                        "channel '{}' undefined at index {} inside slice {k}",
                        ch.name,
                        begin + step
                    )));
                }
                data.push(v);
            }
        }
        end_indices.push(begin + n - 1);
    }

    SliceTensor::from_parts(
        data,
        (k_count, n, channels.len()),
        end_indices,
        spec.channels.clone(),
        spec.stride,
        spec.label_horizon,
        None,
    )
}

/// `make_slices_from` starting at index 0.
pub fn make_slices(channels: &[Channel], spec: &SliceSpec) -> Result<SliceTensor> {
    make_slices_from(channels, spec, 0)
}

/// Flattens `(m, s, i)` into `(m, s*i)` rows, timestep-major (channel values
/// of one timestep stay adjacent). The tensor's storage already has this
/// layout, so each row is a copy of the slice block.
pub fn flatten(slices: &SliceTensor) -> Vec<Vec<f64>> {
    (0..slices.slice_count())
        .map(|k| slices.slice_block(k).to_vec())
        .collect()
}

/// Inverse of [`flatten`]: reshapes rows back into a tensor with the given
/// provenance.
pub fn unflatten(
    rows: &[Vec<f64>],
    timesteps: usize,
    channel_names: Vec<String>,
    end_indices: Vec<usize>,
    stride: usize,
    label_horizon: usize,
    scaling: Option<ScalingInfo>,
) -> Result<SliceTensor> {
    let channel_count = channel_names.len();
    let width = timesteps * channel_count;
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::DimensionMismatch(format!(
            "flattened rows must have width {width}"
        )));
    }
    SliceTensor::from_parts(
        rows.iter().flatten().copied().collect(),
        (rows.len(), timesteps, channel_count),
        end_indices,
        channel_names,
        stride,
        label_horizon,
        scaling,
    )
}

/// Fraction of source indices shared by slices `a` and `b`: `max(0, n - |a-b|*stride) / n`.
pub fn slice_overlap_fraction(a: usize, b: usize, spec: &SliceSpec) -> f64 {
    let distance = a.abs_diff(b) * spec.stride;
    if distance >= spec.lookback {
        0.0
    } else {
        (spec.lookback - distance) as f64 / spec.lookback as f64
    }
}
