//! Label generation aligned to slice end indices.
//!
//! Forward-looking families read only bars in `(t, t+n]`; the probe
//! conditions read only bars in the slice's own lookback. Ties resolve to
//! the down/0 side everywhere: the conditions are strict inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelFamily {
    NbarUpdown,
    NbarChange,
    NbarLogret,
    MaUpdown,
    TrendStrength,
    TrendDirection,
    Pctq,
    Qclass,
    ProbeCondition,
}

impl LabelFamily {
    /// Number of classes for classifier families, `None` for regression.
    pub fn class_count(self) -> Option<usize> {
        match self {
            LabelFamily::NbarUpdown
            | LabelFamily::MaUpdown
            | LabelFamily::TrendDirection
            | LabelFamily::ProbeCondition => Some(2),
            LabelFamily::Qclass => Some(3),
            _ => None,
        }
    }
}

/// One label per slice: integer classes for classifiers, reals for
/// regression targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LabelValues {
    Classes(Vec<usize>),
    Reals(Vec<f64>),
}

impl LabelValues {
    pub fn len(&self) -> usize {
        match self {
            LabelValues::Classes(v) => v.len(),
            LabelValues::Reals(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_classes(&self) -> Option<&[usize]> {
        match self {
            LabelValues::Classes(v) => Some(v),
            LabelValues::Reals(_) => None,
        }
    }

    pub fn as_reals(&self) -> Option<&[f64]> {
        match self {
            LabelValues::Reals(v) => Some(v),
            LabelValues::Classes(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelVector {
    pub family: LabelFamily,
    pub horizon: usize,
    pub values: LabelValues,
    /// Family-specific parameters, recorded for the manifest.
    pub params: LabelParams,
    pub warnings: Vec<String>,
}

impl LabelVector {
    /// Histogram over classes; empty for regression families.
    pub fn class_histogram(&self) -> Vec<usize> {
        match (&self.values, self.family.class_count()) {
            (LabelValues::Classes(v), Some(count)) => {
                let mut hist = vec![0usize; count];
                for &c in v {
                    hist[c] += 1;
                }
                hist
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelParams {
    pub ma_period: Option<usize>,
    pub qclass: Option<QClassThresholds>,
    pub trend_method: Option<TrendMethod>,
    pub direction_threshold: Option<f64>,
    pub condition: Option<ProbeCondition>,
}

/// Class separators for the three-way quality classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QClassThresholds {
    /// Values at or above this are class 0 (up).
    pub up_min: f64,
    /// Values at or below this are class 2 (down).
    pub down_max: f64,
}

impl Default for QClassThresholds {
    fn default() -> Self {
        Self { up_min: 0.6, down_max: 0.4 }
    }
}

impl QClassThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.down_max && self.down_max < self.up_min && self.up_min < 1.0) {
            return Err(Error::Config(format!(
                "qclass thresholds need 0 < down_max < up_min < 1, got {} / {}",
                self.down_max, self.up_min
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMethod {
    /// Slope of an OLS line over the future closes, divided by the current
    /// close (per-bar drift, scale-free).
    Regression,
    /// Fraction of future closes strictly above their moving average.
    MaFraction,
}

/// Within-slice price relationships used by the learnability probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeCondition {
    /// Last close above the close 5 bars earlier.
    #[serde(rename = "c5")]
    CloseVs5Ago,
    /// Last close above the 5-period exponential moving average.
    #[serde(rename = "ema5")]
    CloseVsEma5,
    /// Last close above the highest close of the 10 last bars, current bar
    /// excluded — with the current bar included the condition could never
    /// hold strictly.
    #[serde(rename = "hc10")]
    CloseVsHighest10,
}

impl ProbeCondition {
    pub const ALL: [ProbeCondition; 3] = [
        ProbeCondition::CloseVs5Ago,
        ProbeCondition::CloseVsEma5,
        ProbeCondition::CloseVsHighest10,
    ];

    /// Bars of history needed at the slice end, beyond the end bar itself.
    pub fn history(&self) -> usize {
        match self {
            ProbeCondition::CloseVs5Ago => 5,
            ProbeCondition::CloseVsEma5 => 4,
            ProbeCondition::CloseVsHighest10 => 9,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            ProbeCondition::CloseVs5Ago => "c5",
            ProbeCondition::CloseVsEma5 => "ema5",
            ProbeCondition::CloseVsHighest10 => "hc10",
        }
    }
}

fn check_horizon(end_indices: &[usize], horizon: usize, len: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("label horizon must be >= 1".into()));
    }
    if let Some(&max_end) = end_indices.iter().max() {
        if max_end + horizon >= len {
            return Err(Error::Label(format!(
                "horizon {horizon} past end of data for slice ending at {max_end} (length {len})"
            )));
        }
    }
    Ok(())
}

/// Direction, price change, or log return `n` bars ahead of each slice end.
pub fn label_nbar(
    closes: &[f64],
    end_indices: &[usize],
    horizon: usize,
    family: LabelFamily,
) -> Result<LabelVector> {
    check_horizon(end_indices, horizon, closes.len())?;
    let values = match family {
        LabelFamily::NbarUpdown => LabelValues::Classes(
            end_indices
                .iter()
                .map(|&t| usize::from(closes[t + horizon] > closes[t]))
                .collect(),
        ),
        LabelFamily::NbarChange => LabelValues::Reals(
            end_indices.iter().map(|&t| closes[t + horizon] - closes[t]).collect(),
        ),
        LabelFamily::NbarLogret => LabelValues::Reals(
            end_indices.iter().map(|&t| (closes[t + horizon] / closes[t]).ln()).collect(),
        ),
        other => {
            return Err(Error::Label(format!("label_nbar cannot produce {other:?}")));
        }
    };
    Ok(LabelVector {
        family,
        horizon,
        values,
        params: LabelParams::default(),
        warnings: Vec::new(),
    })
}

/// Moving-average direction: 1 when the MA is higher `n` bars ahead.
pub fn label_ma(
    closes: &[f64],
    end_indices: &[usize],
    horizon: usize,
    ma_period: usize,
) -> Result<LabelVector> {
    check_horizon(end_indices, horizon, closes.len())?;
    let ma = indicators::sma(closes, ma_period)?;
    let mut classes = Vec::with_capacity(end_indices.len());
    for &t in end_indices {
        let now = ma.values[t];
        let later = ma.values[t + horizon];
        if now.is_nan() || later.is_nan() {
            return Err(Error::Label(format!(
                "moving average undefined at slice end {t} (period {ma_period})"
            )));
        }
        classes.push(usize::from(later > now));
    }
    Ok(LabelVector {
        family: LabelFamily::MaUpdown,
        horizon,
        values: LabelValues::Classes(classes),
        params: LabelParams { ma_period: Some(ma_period), ..Default::default() },
        warnings: Vec::new(),
    })
}

/// Quality of the forward window: `(HH - C_t) / (HH - LL)` over bars
/// `(t, t+n]`, clamped to `[0, 1]`. 1 is a flawless up-move, 0 a flawless
/// down-move, 0.5 balanced. Flat windows yield 0.5 with a warning.
pub fn label_pctq(
    highs: &[f64],
    lows: &[f64],
    closes: &[f64],
    end_indices: &[usize],
    horizon: usize,
) -> Result<LabelVector> {
    if highs.len() != closes.len() || lows.len() != closes.len() {
        return Err(Error::DimensionMismatch("high/low/close lengths differ".into()));
    }
    if highs.iter().zip(lows).any(|(h, l)| h < l) {
        return Err(Error::Label("high below low in quality window input".into()));
    }
    check_horizon(end_indices, horizon, closes.len())?;
    let mut values = Vec::with_capacity(end_indices.len());
    let mut warnings = Vec::new();
    for &t in end_indices {
        let window = (t + 1)..=(t + horizon);
        let hh = window.clone().map(|i| highs[i]).fold(f64::NEG_INFINITY, f64::max);
        let ll = window.map(|i| lows[i]).fold(f64::INFINITY, f64::min);
        if hh == ll {
            warnings.push(format!("flat forward window after index {t}; quality set to 0.5"));
            values.push(0.5);
        } else {
            values.push(((hh - closes[t]) / (hh - ll)).clamp(0.0, 1.0));
        }
    }
    Ok(LabelVector {
        family: LabelFamily::Pctq,
        horizon,
        values: LabelValues::Reals(values),
        params: LabelParams::default(),
        warnings,
    })
}

/// Discretizes quality values: class 0 at or above `up_min`, class 2 at or
/// below `down_max`, class 1 between.
pub fn label_qclass(pctq: &LabelVector, thresholds: QClassThresholds) -> Result<LabelVector> {
    if pctq.family != LabelFamily::Pctq {
        return Err(Error::Label(format!("expected quality labels, got {:?}", pctq.family)));
    }
    thresholds.validate()?;
    let reals = pctq.values.as_reals().expect("pctq labels are real-valued");
    let classes = reals
        .iter()
        .map(|&q| {
            if q >= thresholds.up_min {
                0
            } else if q <= thresholds.down_max {
                2
            } else {
                1
            }
        })
        .collect();
    Ok(LabelVector {
        family: LabelFamily::Qclass,
        horizon: pctq.horizon,
        values: LabelValues::Classes(classes),
        params: LabelParams { qclass: Some(thresholds), ..Default::default() },
        warnings: pctq.warnings.clone(),
    })
}

/// Simple-regression slope of `y` on `0..n`, closed form.
fn line_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (v - y_mean);
        den += dx * dx;
    }
    num / den
}

/// Trend strength and direction over the forward window `(t, t+n]`.
pub fn label_trend(
    closes: &[f64],
    end_indices: &[usize],
    horizon: usize,
    method: TrendMethod,
    ma_period: usize,
    direction_threshold: Option<f64>,
    want_direction: bool,
) -> Result<LabelVector> {
    check_horizon(end_indices, horizon, closes.len())?;
    if method == TrendMethod::Regression && horizon < 2 {
        return Err(Error::InvalidParameter(
            "regression trend needs a horizon of at least 2 bars".into(),
        ));
    }
    let threshold = direction_threshold.unwrap_or(match method {
        TrendMethod::Regression => 0.0,
        TrendMethod::MaFraction => 0.5,
    });
    let ma = match method {
        TrendMethod::MaFraction => Some(indicators::sma(closes, ma_period)?),
        TrendMethod::Regression => None,
    };

    let mut strengths = Vec::with_capacity(end_indices.len());
    for &t in end_indices {
        let strength = match method {
            TrendMethod::Regression => {
                let window: Vec<f64> = closes[t + 1..=t + horizon].to_vec();
                line_slope(&window) / closes[t]
            }
            TrendMethod::MaFraction => {
                let ma = ma.as_ref().expect("ma computed for ma_fraction");
                let mut above = 0usize;
                for i in (t + 1)..=(t + horizon) {
                    if ma.values[i].is_nan() {
                        return Err(Error::Label(format!(
                            "moving average undefined inside forward window at {i}"
                        )));
                    }
                    if closes[i] > ma.values[i] {
                        above += 1;
                    }
                }
                above as f64 / horizon as f64
            }
        };
        strengths.push(strength);
    }

    let params = LabelParams {
        ma_period: (method == TrendMethod::MaFraction).then_some(ma_period),
        trend_method: Some(method),
        direction_threshold: Some(threshold),
        ..Default::default()
    };
    if want_direction {
        let classes = strengths.iter().map(|&s| usize::from(s > threshold)).collect();
        Ok(LabelVector {
            family: LabelFamily::TrendDirection,
            horizon,
            values: LabelValues::Classes(classes),
            params,
            warnings: Vec::new(),
        })
    } else {
        Ok(LabelVector {
            family: LabelFamily::TrendStrength,
            horizon,
            values: LabelValues::Reals(strengths),
            params,
            warnings: Vec::new(),
        })
    }
}

/// Binary labels for the learnability-probe conditions, computed from
/// unscaled closes at each slice end.
pub fn label_probe_conditions(
    closes: &[f64],
    end_indices: &[usize],
    condition: ProbeCondition,
) -> Result<LabelVector> {
    let need = condition.history();
    if let Some(&min_end) = end_indices.iter().min() {
        if min_end < need {
            return Err(Error::Label(format!(
                "condition {:?} needs {need} bars of history; slice ends at {min_end}",
                condition
            )));
        }
    }
    if end_indices.iter().any(|&t| t >= closes.len()) {
        return Err(Error::Label("slice end index past end of closes".into()));
    }
    let ema5 = match condition {
        ProbeCondition::CloseVsEma5 => Some(indicators::ema(closes, 5)?),
        _ => None,
    };
    let classes = end_indices
        .iter()
        .map(|&t| {
            let hit = match condition {
                ProbeCondition::CloseVs5Ago => closes[t] > closes[t - 5],
                ProbeCondition::CloseVsEma5 => {
                    closes[t] > ema5.as_ref().expect("ema computed").values[t]
                }
                ProbeCondition::CloseVsHighest10 => {
                    let highest = closes[t - 9..t].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    closes[t] > highest
                }
            };
            usize::from(hit)
        })
        .collect();
    Ok(LabelVector {
        family: LabelFamily::ProbeCondition,
        horizon: 0,
        values: LabelValues::Classes(classes),
        params: LabelParams { condition: Some(condition), ..Default::default() },
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationarity::{ols, Matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng_series(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = vec![100.0];
        for _ in 1..len {
            let step: f64 = rng.gen_range(-1.0..1.0);
            v.push((v.last().unwrap() + step).max(1.0));
        }
        v
    }

    #[test]
    fn nbar_families_hand_values() {
        let closes = vec![100.0, 101.0, 102.0, 105.0];
        let ends = [0usize];
        let up = label_nbar(&closes, &ends, 3, LabelFamily::NbarUpdown).unwrap();
        assert_eq!(up.values.as_classes().unwrap(), &[1]);
        let change = label_nbar(&closes, &ends, 3, LabelFamily::NbarChange).unwrap();
        assert!((change.values.as_reals().unwrap()[0] - 5.0).abs() < 1e-12);
        let logret = label_nbar(&closes, &ends, 3, LabelFamily::NbarLogret).unwrap();
        assert!((logret.values.as_reals().unwrap()[0] - 1.05f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn nbar_tie_goes_down() {
        let closes = vec![100.0, 90.0, 100.0];
        let up = label_nbar(&closes, &[0], 2, LabelFamily::NbarUpdown).unwrap();
        assert_eq!(up.values.as_classes().unwrap(), &[0]);
        let change = label_nbar(&closes, &[0], 2, LabelFamily::NbarChange).unwrap();
        assert_eq!(change.values.as_reals().unwrap(), &[0.0]);
    }

    #[test]
    fn nbar_matches_brute_force_relabeling() {
        let closes = rng_series(41, 120);
        let ends: Vec<usize> = (10..100).collect();
        let up = label_nbar(&closes, &ends, 7, LabelFamily::NbarUpdown).unwrap();
        for (i, &t) in ends.iter().enumerate() {
            let expected = usize::from(closes[t + 7] > closes[t]);
            assert_eq!(up.values.as_classes().unwrap()[i], expected);
        }
    }

    #[test]
    fn updown_equals_thresholded_change() {
        let closes = rng_series(42, 150);
        let ends: Vec<usize> = (20..120).collect();
        let up = label_nbar(&closes, &ends, 5, LabelFamily::NbarUpdown).unwrap();
        let change = label_nbar(&closes, &ends, 5, LabelFamily::NbarChange).unwrap();
        for (u, c) in up
            .values
            .as_classes()
            .unwrap()
            .iter()
            .zip(change.values.as_reals().unwrap())
        {
            assert_eq!(*u, usize::from(*c > 0.0));
        }
    }

    #[test]
    fn ma_direction_on_monotone_series() {
        let rising: Vec<f64> = (1..60).map(|i| i as f64).collect();
        let ends: Vec<usize> = (10..40).collect();
        let labels = label_ma(&rising, &ends, 5, 5).unwrap();
        assert!(labels.values.as_classes().unwrap().iter().all(|&c| c == 1));

        let flat = vec![50.0; 60];
        let labels = label_ma(&flat, &ends, 5, 5).unwrap();
        assert!(labels.values.as_classes().unwrap().iter().all(|&c| c == 0));
    }

    #[test]
    fn ma_direction_matches_oracle() {
        let closes = rng_series(43, 150);
        let ends: Vec<usize> = (20..120).collect();
        let labels = label_ma(&closes, &ends, 10, 5).unwrap();
        let ma = indicators::sma(&closes, 5).unwrap();
        for (i, &t) in ends.iter().enumerate() {
            assert_eq!(
                labels.values.as_classes().unwrap()[i],
                usize::from(ma.values[t + 10] > ma.values[t])
            );
        }
    }

    #[test]
    fn pctq_anchor_values() {
        // C_t = 100, HH = 115, LL = 95 -> 0.75 (1:3 risk/reward).
        let highs = vec![100.0, 110.0, 115.0, 112.0];
        let lows = vec![100.0, 95.0, 108.0, 109.0];
        let closes = vec![100.0, 100.0, 110.0, 110.0];
        let q = label_pctq(&highs, &lows, &closes, &[0], 3).unwrap();
        assert!((q.values.as_reals().unwrap()[0] - 0.75).abs() < 1e-12);

        // Monotone rise with every future low at or above C_t -> 1.
        let highs = vec![100.0, 102.0, 104.0, 106.0];
        let lows = vec![99.0, 100.5, 102.5, 104.5];
        let closes = vec![100.0, 101.0, 103.0, 105.0];
        let q = label_pctq(&highs, &lows, &closes, &[0], 3).unwrap();
        assert_eq!(q.values.as_reals().unwrap()[0], 1.0);

        // HH = 110, LL = 90 around C_t = 100 -> 0.5.
        let highs = vec![100.0, 110.0, 105.0];
        let lows = vec![100.0, 95.0, 90.0];
        let closes = vec![100.0, 105.0, 95.0];
        let q = label_pctq(&highs, &lows, &closes, &[0], 2).unwrap();
        assert!((q.values.as_reals().unwrap()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pctq_matches_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let len = 200;
        let closes = rng_series(45, len);
        let highs: Vec<f64> = closes.iter().map(|c| c + rng.gen_range(0.0..2.0)).collect();
        let lows: Vec<f64> = closes.iter().map(|c| c - rng.gen_range(0.0..2.0)).collect();
        let ends: Vec<usize> = (20..150).collect();
        let horizon = 10;
        let q = label_pctq(&highs, &lows, &closes, &ends, horizon).unwrap();
        for (i, &t) in ends.iter().enumerate() {
            let mut hh = f64::NEG_INFINITY;
            let mut ll = f64::INFINITY;
            for j in t + 1..=t + horizon {
                hh = hh.max(highs[j]);
                ll = ll.min(lows[j]);
            }
            let expected = ((hh - closes[t]) / (hh - ll)).clamp(0.0, 1.0);
            assert!((q.values.as_reals().unwrap()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn pctq_mirror_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let closes = rng_series(47, 120);
        let highs: Vec<f64> = closes.iter().map(|c| c + rng.gen_range(0.01..2.0)).collect();
        let lows: Vec<f64> = closes.iter().map(|c| c - rng.gen_range(0.01..2.0)).collect();
        let ends: Vec<usize> = (10..100).collect();
        let q = label_pctq(&highs, &lows, &closes, &ends, 8).unwrap();
        // Negate prices and swap the high/low roles.
        let m_highs: Vec<f64> = lows.iter().map(|v| -v).collect();
        let m_lows: Vec<f64> = highs.iter().map(|v| -v).collect();
        let m_closes: Vec<f64> = closes.iter().map(|v| -v).collect();
        let mq = label_pctq(&m_highs, &m_lows, &m_closes, &ends, 8).unwrap();
        for (a, b) in q
            .values
            .as_reals()
            .unwrap()
            .iter()
            .zip(mq.values.as_reals().unwrap())
        {
            assert!((a + b - 1.0).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn pctq_flat_window_warns_and_centers() {
        let highs = vec![100.0, 100.0, 100.0];
        let lows = vec![100.0, 100.0, 100.0];
        let closes = vec![100.0, 100.0, 100.0];
        let q = label_pctq(&highs, &lows, &closes, &[0], 2).unwrap();
        assert_eq!(q.values.as_reals().unwrap(), &[0.5]);
        assert_eq!(q.warnings.len(), 1);
    }

    #[test]
    fn qclass_boundary_behavior() {
        let pctq = LabelVector {
            family: LabelFamily::Pctq,
            horizon: 5,
            values: LabelValues::Reals(vec![0.6, 0.5, 0.4, 0.95, 0.05]),
            params: LabelParams::default(),
            warnings: Vec::new(),
        };
        let qc = label_qclass(&pctq, QClassThresholds::default()).unwrap();
        assert_eq!(qc.values.as_classes().unwrap(), &[0, 1, 2, 0, 2]);
    }

    #[test]
    fn qclass_monotone_in_thresholds() {
        let values: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let pctq = LabelVector {
            family: LabelFamily::Pctq,
            horizon: 1,
            values: LabelValues::Reals(values),
            params: LabelParams::default(),
            warnings: Vec::new(),
        };
        let loose = label_qclass(&pctq, QClassThresholds { up_min: 0.6, down_max: 0.4 }).unwrap();
        let strict = label_qclass(&pctq, QClassThresholds { up_min: 0.8, down_max: 0.4 }).unwrap();
        for (a, b) in loose
            .values
            .as_classes()
            .unwrap()
            .iter()
            .zip(strict.values.as_classes().unwrap())
        {
            // Raising up_min never converts a non-up to up.
            if *a != 0 {
                assert_ne!(*b, 0);
            }
        }
    }

    #[test]
    fn trend_regression_on_exact_line() {
        // Slope +1 per bar from C_t = 100: strength 0.01, direction 1.
        let closes: Vec<f64> = (0..=12).map(|i| 100.0 + i as f64).collect();
        let strength =
            label_trend(&closes, &[0], 10, TrendMethod::Regression, 5, None, false).unwrap();
        assert!((strength.values.as_reals().unwrap()[0] - 0.01).abs() < 1e-12);
        let direction =
            label_trend(&closes, &[0], 10, TrendMethod::Regression, 5, None, true).unwrap();
        assert_eq!(direction.values.as_classes().unwrap(), &[1]);
    }

    #[test]
    fn trend_constant_series_is_zero_and_down() {
        let closes = vec![100.0; 20];
        let strength =
            label_trend(&closes, &[0], 10, TrendMethod::Regression, 5, None, false).unwrap();
        assert_eq!(strength.values.as_reals().unwrap()[0], 0.0);
        let frac =
            label_trend(&closes, &[5], 10, TrendMethod::MaFraction, 5, None, false).unwrap();
        assert_eq!(frac.values.as_reals().unwrap()[0], 0.0);
        let dir = label_trend(&closes, &[5], 10, TrendMethod::MaFraction, 5, None, true).unwrap();
        assert_eq!(dir.values.as_classes().unwrap(), &[0]);
    }

    #[test]
    fn trend_slope_matches_least_squares_module() {
        let closes = rng_series(48, 100);
        let ends: Vec<usize> = (10..70).collect();
        let horizon = 12;
        let labels =
            label_trend(&closes, &ends, horizon, TrendMethod::Regression, 5, None, false).unwrap();
        for (i, &t) in ends.iter().enumerate() {
            let y = &closes[t + 1..=t + horizon];
            let design = Matrix::from_fn(horizon, 2, |r, c| if c == 0 { 1.0 } else { r as f64 });
            let fit = ols(&design, y).unwrap();
            let expected = fit.coefficients[1] / closes[t];
            assert!((labels.values.as_reals().unwrap()[i] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_conditions_on_monotone_series() {
        let rising: Vec<f64> = (1..80).map(|i| i as f64).collect();
        let ends: Vec<usize> = (20..60).collect();
        for cond in ProbeCondition::ALL {
            let labels = label_probe_conditions(&rising, &ends, cond).unwrap();
            assert!(labels.values.as_classes().unwrap().iter().all(|&c| c == 1), "{cond:?}");
        }
        let falling: Vec<f64> = (1..80).rev().map(|i| i as f64).collect();
        for cond in ProbeCondition::ALL {
            let labels = label_probe_conditions(&falling, &ends, cond).unwrap();
            assert!(labels.values.as_classes().unwrap().iter().all(|&c| c == 0), "{cond:?}");
        }
    }

    #[test]
    fn probe_conditions_match_direct_reevaluation() {
        let closes = rng_series(49, 200);
        let ends: Vec<usize> = (15..180).collect();
        let ema5 = indicators::ema(&closes, 5).unwrap();
        for cond in ProbeCondition::ALL {
            let labels = label_probe_conditions(&closes, &ends, cond).unwrap();
            for (i, &t) in ends.iter().enumerate() {
                let expected = match cond {
                    ProbeCondition::CloseVs5Ago => closes[t] > closes[t - 5],
                    ProbeCondition::CloseVsEma5 => closes[t] > ema5.values[t],
                    ProbeCondition::CloseVsHighest10 => {
                        let hi = closes[t - 9..t].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        closes[t] > hi
                    }
                };
                assert_eq!(labels.values.as_classes().unwrap()[i], usize::from(expected));
            }
        }
    }

    #[test]
    fn probe_conditions_require_history() {
        let closes = rng_series(50, 40);
        let err = label_probe_conditions(&closes, &[3], ProbeCondition::CloseVsHighest10);
        assert!(err.is_err());
    }

    #[test]
    fn labels_read_only_their_windows() {
        // Perturb bars outside (t, t+n] and assert forward labels unchanged;
        // perturb bars outside the lookback and assert probe labels unchanged.
        let closes = rng_series(51, 100);
        let ends = [30usize, 40, 50];
        let horizon = 6;
        let before = label_nbar(&closes, &ends, horizon, LabelFamily::NbarUpdown).unwrap();
        let mut tampered = closes.clone();
        for i in 0..100 {
            let inside_any = ends.iter().any(|&t| i > t && i <= t + horizon);
            let is_end = ends.contains(&i);
            if !inside_any && !is_end {
                tampered[i] += 37.5;
            }
        }
        let after = label_nbar(&tampered, &ends, horizon, LabelFamily::NbarUpdown).unwrap();
        assert_eq!(before.values, after.values);

        let before = label_probe_conditions(&closes, &ends, ProbeCondition::CloseVs5Ago).unwrap();
        let mut tampered = closes.clone();
        for i in 0..100 {
            let inside_any = ends.iter().any(|&t| i + 5 >= t && i <= t);
            if !inside_any {
                tampered[i] += 37.5;
            }
        }
        let after = label_probe_conditions(&tampered, &ends, ProbeCondition::CloseVs5Ago).unwrap();
        assert_eq!(before.values, after.values);
    }

    #[test]
    fn horizon_past_data_rejected() {
        let closes = rng_series(52, 30);
        assert!(label_nbar(&closes, &[25], 10, LabelFamily::NbarUpdown).is_err());
    }
}
