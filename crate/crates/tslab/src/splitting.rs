//! Train/validation/test partitioning with a leakage audit.
//!
//! The proper procedure splits the slice index space into contiguous,
//! temporally ordered ranges and shuffles only the training block. The
//! anti-pattern (shuffle everything, then split) is also provided so its
//! leakage can be measured rather than argued about.
//!
//! Overlapping slices leave two residual leaks even in the proper split:
//! boundary input windows share up to `(n - stride) / n` of their bars
//! (accepted, and reported by the audit), and a training slice's label
//! window can reach past the boundary into bars the training inputs never
//! cover. The embargo closes the second leak by dropping the last
//! `ceil(label_horizon / stride)` training slices.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::LabelVector;
use crate::windowing::{slice_overlap_fraction, SliceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMethod {
    SplitThenShuffle,
    ShuffleThenSplit,
}

/// Embargo policy at the train/validation boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embargo {
    /// Drop `ceil(label_horizon / stride)` slices from the train tail —
    /// exactly enough that no kept training label reads a bar beyond the
    /// training block's input coverage.
    Auto,
    /// Explicit number of slices to drop from the train tail.
    Slices(usize),
}

impl Embargo {
    fn resolve(self, spec: &SliceSpec) -> usize {
        match self {
            Embargo::Auto => spec.label_horizon.div_ceil(spec.stride),
            Embargo::Slices(n) => n,
        }
    }
}

/// Cross-set window-overlap figures.
///
/// `mean_cross_overlap` is the average, over validation/test slices, of the
/// largest input-window overlap with any kept training slice; a uniformly
/// shuffled split drives it toward 1 while the proper split leaves only the
/// boundary pairs. `label_window_violations` counts kept training slices
/// whose label window reads a bar outside the training block's input
/// coverage (bars first seen by validation/test).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageAudit {
    pub max_cross_overlap: f64,
    pub mean_cross_overlap: f64,
    /// Number of (train, val/test) pairs with any input-window overlap.
    pub violating_pairs: usize,
    pub label_window_violations: usize,
}

/// A reproducible split: contiguous ranges, the shuffled training order,
/// and the audit that justifies (or indicts) it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub method: SplitMethod,
    pub seed: u64,
    pub slice_count: usize,
    /// Slices dropped from the train tail by the embargo.
    pub embargo_slices: usize,
    /// Temporal ranges. For the anti-pattern they carry the set sizes;
    /// membership then comes from the explicit index lists below.
    pub train_range: Range<usize>,
    pub embargo_range: Range<usize>,
    pub val_range: Range<usize>,
    pub test_range: Range<usize>,
    /// Training slice indices in presentation (shuffled) order.
    pub train_order: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub leakage: LeakageAudit,
}

fn set_sizes(k: usize, fractions: (f64, f64, f64)) -> Result<(usize, usize, usize)> {
    let (ft, fv, fs) = fractions;
    if ft <= 0.0 || fv < 0.0 || fs < 0.0 {
        return Err(Error::Split(format!(
            "fractions must be positive for train and non-negative elsewhere, got {fractions:?}"
        )));
    }
    if (ft + fv + fs - 1.0).abs() > 1e-9 {
        return Err(Error::Split(format!("fractions must sum to 1, got {}", ft + fv + fs)));
    }
    if k < 3 {
        return Err(Error::Split(format!("need at least 3 slices, got {k}")));
    }
    let ts = (k as f64 * ft).round() as usize;
    let vs = ((k as f64 * fv).round() as usize).min(k - ts);
    let rest = k - ts - vs;
    if ts == 0 || (fv > 0.0 && vs == 0) || (fs > 0.0 && rest == 0) {
        return Err(Error::Split(format!(
            "{k} slices are too few for nonzero sets at fractions {fractions:?}"
        )));
    }
    Ok((ts, vs, rest))
}

fn audit(
    kept_train: &[usize],
    block_train: &[usize],
    others: &[usize],
    spec: &SliceSpec,
) -> LeakageAudit {
    let mut max_cross = 0.0f64;
    let mut mean_sum = 0.0f64;
    let mut violating_pairs = 0usize;
    for &v in others {
        let mut best = 0.0f64;
        for &t in kept_train {
            let o = slice_overlap_fraction(t, v, spec);
            if o > 0.0 {
                violating_pairs += 1;
            }
            best = best.max(o);
        }
        mean_sum += best;
        max_cross = max_cross.max(best);
    }
    let mean_cross = if others.is_empty() { 0.0 } else { mean_sum / others.len() as f64 };

    // Bars covered by the (pre-embargo) training block's input windows.
    let n = spec.lookback;
    let h = spec.label_horizon;
    let max_bar = block_train
        .iter()
        .chain(others.iter())
        .map(|&k| k * spec.stride + n - 1 + h)
        .max()
        .unwrap_or(0);
    let mut covered = vec![false; max_bar + 1];
    for &t in block_train {
        let start = t * spec.stride;
        for bar in start..start + n {
            covered[bar] = true;
        }
    }
    let label_window_violations = kept_train
        .iter()
        .filter(|&&t| {
            let end = t * spec.stride + n - 1;
            (end + 1..=end + h).any(|bar| !covered[bar])
        })
        .count();

    LeakageAudit {
        max_cross_overlap: max_cross,
        mean_cross_overlap: mean_cross,
        violating_pairs,
        label_window_violations,
    }
}

/// Contiguous split in temporal order, then a seeded shuffle of the
/// training block only.
pub fn split_then_shuffle(
    slice_count: usize,
    fractions: (f64, f64, f64),
    seed: u64,
    spec: &SliceSpec,
    embargo: Embargo,
) -> Result<SplitPlan> {
    let (ts, vs, rest) = set_sizes(slice_count, fractions)?;
    let embargo_slices = embargo.resolve(spec);
    if embargo_slices >= ts {
        return Err(Error::Split(format!(
            "embargo of {embargo_slices} slices consumes the whole training set ({ts})"
        )));
    }
    let kept = ts - embargo_slices;
    let mut train_order: Vec<usize> = (0..kept).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    train_order.shuffle(&mut rng);

    let val_indices: Vec<usize> = (ts..ts + vs).collect();
    let test_indices: Vec<usize> = (ts + vs..ts + vs + rest).collect();
    let block_train: Vec<usize> = (0..ts).collect();
    let others: Vec<usize> = val_indices.iter().chain(&test_indices).copied().collect();
    let leakage = audit(&train_order, &block_train, &others, spec);

    Ok(SplitPlan {
        method: SplitMethod::SplitThenShuffle,
        seed,
        slice_count,
        embargo_slices,
        train_range: 0..kept,
        embargo_range: kept..ts,
        val_range: ts..ts + vs,
        test_range: ts + vs..slice_count,
        train_order,
        val_indices,
        test_indices,
        leakage,
    })
}

/// The anti-pattern: shuffle the full index space, then split. Provided so
/// the audit can quantify the leakage this causes; never used by the
/// pipeline.
pub fn shuffle_then_split(
    slice_count: usize,
    fractions: (f64, f64, f64),
    seed: u64,
    spec: &SliceSpec,
) -> Result<SplitPlan> {
    let (ts, vs, _) = set_sizes(slice_count, fractions)?;
    let mut indices: Vec<usize> = (0..slice_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_order = indices[..ts].to_vec();
    let val_indices = indices[ts..ts + vs].to_vec();
    let test_indices = indices[ts + vs..].to_vec();
    let others: Vec<usize> = val_indices.iter().chain(&test_indices).copied().collect();
    let leakage = audit(&train_order, &train_order.clone(), &others, spec);

    Ok(SplitPlan {
        method: SplitMethod::ShuffleThenSplit,
        seed,
        slice_count,
        embargo_slices: 0,
        train_range: 0..ts,
        embargo_range: ts..ts,
        val_range: ts..ts + vs,
        test_range: ts + vs..slice_count,
        train_order,
        val_indices,
        test_indices,
        leakage,
    })
}

/// Downsamples every class to the minority-class count by seeded sampling
/// without replacement, returning the kept training indices in their
/// original presentation order. Only training indices are touched.
pub fn downsample_majority(
    labels: &LabelVector,
    train_order: &[usize],
    seed: u64,
) -> Result<Vec<usize>> {
    let class_count = labels
        .family
        .class_count()
        .ok_or_else(|| Error::Label(format!("{:?} is not a classifier family", labels.family)))?;
    let classes = labels
        .values
        .as_classes()
        .ok_or_else(|| Error::Label("labels do not carry classes".into()))?;
    let mut counts = vec![0usize; class_count];
    for &idx in train_order {
        let c = classes.get(idx).copied().ok_or_else(|| {
            Error::Label(format!("train index {idx} outside label vector ({})", classes.len()))
        })?;
        counts[c] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass { class: empty });
    }
    let minority = *counts.iter().min().expect("at least one class");
    if counts.iter().all(|&c| c == minority) {
        return Ok(train_order.to_vec());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; classes.len()];
    for class in 0..class_count {
        let members: Vec<usize> =
            train_order.iter().copied().filter(|&i| classes[i] == class).collect();
        let chosen = rand::seq::index::sample(&mut rng, members.len(), minority);
        for pos in chosen.iter() {
            keep[members[pos]] = true;
        }
    }
    Ok(train_order.iter().copied().filter(|&i| keep[i]).collect())
}
