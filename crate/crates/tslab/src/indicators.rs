//! Technical indicator channels: SMA, EMA, rolling extrema, RSI.
//!
//! Each indicator produces a series aligned index-for-index with its input;
//! warm-up entries are NaN and must never enter a slice (the windowing stage
//! rejects them, the pipeline skips past them). Every series carries its
//! scaling taxonomy: overlaid indicators share the price scaling, bounded
//! ones are divided by their fixed bound, separate ones get their own
//! per-slice statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a channel participates in per-slice scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taxonomy {
    /// Plotted on the price axis; scaled jointly with prices.
    Overlaid,
    /// Fixed output range; scaled by dividing by `bound_max`.
    Bounded,
    /// Own range unrelated to price level; scaled independently.
    Separate,
}

/// An indicator output aligned to its source series. Warm-up entries are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub taxonomy: Taxonomy,
    pub bound_max: Option<f64>,
}

impl IndicatorSeries {
    /// Index of the first defined (non-NaN) value, or `None` if all warm-up.
    pub fn first_defined(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_nan())
    }
}

fn check_period(period: usize, len: usize) -> Result<()> {
    if period == 0 {
        return Err(Error::InvalidParameter("indicator period must be >= 1".into()));
    }
    if period > len {
        return Err(Error::InvalidParameter(format!(
            "indicator period {period} exceeds series length {len}"
        )));
    }
    Ok(())
}

/// Simple moving average over the trailing `period` values.
pub fn sma(closes: &[f64], period: usize) -> Result<IndicatorSeries> {
    check_period(period, closes.len())?;
    let mut values = vec![f64::NAN; closes.len()];
    let mut sum = 0.0;
    for (t, &c) in closes.iter().enumerate() {
        sum += c;
        if t >= period {
            sum -= closes[t - period];
        }
        if t + 1 >= period {
            values[t] = sum / period as f64;
        }
    }
    Ok(IndicatorSeries {
        name: format!("sma{period}"),
        values,
        taxonomy: Taxonomy::Overlaid,
        bound_max: None,
    })
}

/// Exponential moving average, seeded with the SMA of the first `period`
/// values, then `ema_t = a*close_t + (1-a)*ema_{t-1}` with `a = 2/(period+1)`.
pub fn ema(closes: &[f64], period: usize) -> Result<IndicatorSeries> {
    check_period(period, closes.len())?;
    let alpha = 2.0 / (period as f64 + 1.0);
    let mut values = vec![f64::NAN; closes.len()];
    let seed: f64 = closes[..period].iter().sum::<f64>() / period as f64;
    values[period - 1] = seed;
    let mut prev = seed;
    for t in period..closes.len() {
        prev = alpha * closes[t] + (1.0 - alpha) * prev;
        values[t] = prev;
    }
    Ok(IndicatorSeries {
        name: format!("ema{period}"),
        values,
        taxonomy: Taxonomy::Overlaid,
        bound_max: None,
    })
}

/// Highest value over the trailing `period` entries (inclusive of `t`).
pub fn rolling_max(closes: &[f64], period: usize) -> Result<IndicatorSeries> {
    rolling_extremum(closes, period, true)
}

/// Lowest value over the trailing `period` entries (inclusive of `t`).
pub fn rolling_min(closes: &[f64], period: usize) -> Result<IndicatorSeries> {
    rolling_extremum(closes, period, false)
}

fn rolling_extremum(closes: &[f64], period: usize, max: bool) -> Result<IndicatorSeries> {
    check_period(period, closes.len())?;
    let mut values = vec![f64::NAN; closes.len()];
    for t in (period - 1)..closes.len() {
        let window = &closes[t + 1 - period..=t];
        values[t] = window
            .iter()
            .copied()
            .fold(if max { f64::NEG_INFINITY } else { f64::INFINITY }, |acc, v| {
                if max { acc.max(v) } else { acc.min(v) }
            });
    }
    Ok(IndicatorSeries {
        name: format!("{}{period}", if max { "hmax" } else { "lmin" }),
        values,
        taxonomy: Taxonomy::Overlaid,
        bound_max: None,
    })
}

/// Wilder-smoothed relative strength index in [0, 100].
///
/// Average gains/losses are seeded over the first `period` moves and then
/// recursively updated with weight `1/period`. Defined from index `period`.
pub fn rsi(closes: &[f64], period: usize) -> Result<IndicatorSeries> {
    check_period(period, closes.len())?;
    if closes.len() <= period {
        return Err(Error::SeriesTooShort { needed: period + 1, got: closes.len() });
    }
    let mut values = vec![f64::NAN; closes.len()];
    let mut avg_gain = 0.0;
    let mut avg_loss = 0.0;
    for t in 1..=period {
        let diff = closes[t] - closes[t - 1];
        if diff >= 0.0 {
            avg_gain += diff;
        } else {
            avg_loss -= diff;
        }
    }
    avg_gain /= period as f64;
    avg_loss /= period as f64;
    let rsi_at = |gain: f64, loss: f64| {
        if gain + loss == 0.0 {
            // No movement at all in the window: neutral.
            50.0
        } else {
            100.0 * gain / (gain + loss)
        }
    };
    values[period] = rsi_at(avg_gain, avg_loss);
    let p = period as f64;
    for t in (period + 1)..closes.len() {
        let diff = closes[t] - closes[t - 1];
        let (gain, loss) = if diff >= 0.0 { (diff, 0.0) } else { (0.0, -diff) };
        avg_gain = (avg_gain * (p - 1.0) + gain) / p;
        avg_loss = (avg_loss * (p - 1.0) + loss) / p;
        values[t] = rsi_at(avg_gain, avg_loss);
    }
    Ok(IndicatorSeries {
        name: format!("rsi{period}"),
        values,
        taxonomy: Taxonomy::Bounded,
        bound_max: Some(100.0),
    })
}

/// Indicator kinds the pipeline can instantiate from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Sma,
    Ema,
    RollingMax,
    RollingMin,
    Rsi,
}

/// Computes the indicator named by `kind` with the given period.
pub fn compute(kind: IndicatorKind, closes: &[f64], period: usize) -> Result<IndicatorSeries> {
    match kind {
        IndicatorKind::Sma => sma(closes, period),
        IndicatorKind::Ema => ema(closes, period),
        IndicatorKind::RollingMax => rolling_max(closes, period),
        IndicatorKind::RollingMin => rolling_min(closes, period),
        IndicatorKind::Rsi => rsi(closes, period),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sma_hand_values() {
        let s = sma(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert!(s.values[0].is_nan());
        assert_eq!(&s.values[1..], &[1.5, 2.5, 3.5]);
    }

    #[test]
    fn sma_period_one_is_identity() {
        let closes = [3.0, 1.0, 4.0];
        let s = sma(&closes, 1).unwrap();
        assert_eq!(s.values, closes);
    }

    #[test]
    fn sma_matches_brute_force_window_means() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let closes: Vec<f64> = (0..50).map(|_| rng.gen_range(1.0..100.0)).collect();
        let period = 10;
        let s = sma(&closes, period).unwrap();
        for t in 0..closes.len() {
            if t + 1 < period {
                assert!(s.values[t].is_nan());
            } else {
                let brute: f64 =
                    closes[t + 1 - period..=t].iter().sum::<f64>() / period as f64;
                assert!((s.values[t] - brute).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ema_constant_series_is_fixed_point() {
        let s = ema(&[5.0; 5], 5).unwrap();
        assert_eq!(s.values[4], 5.0);
    }

    #[test]
    fn ema_hand_recursion_alpha_one_third() {
        let s = ema(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 5).unwrap();
        assert!((s.values[4] - 3.0).abs() < 1e-12); // SMA seed
        assert!((s.values[5] - 4.0).abs() < 1e-12); // 1/3*6 + 2/3*3
    }

    #[test]
    fn rolling_max_hand_values() {
        let s = rolling_max(&[3.0, 1.0, 4.0, 1.0, 5.0], 3).unwrap();
        assert!(s.values[0].is_nan() && s.values[1].is_nan());
        assert_eq!(&s.values[2..], &[4.0, 4.0, 5.0]);
    }

    #[test]
    fn rolling_extrema_period_one_identity() {
        let closes = [3.0, 1.0, 4.0];
        assert_eq!(rolling_max(&closes, 1).unwrap().values, closes);
        assert_eq!(rolling_min(&closes, 1).unwrap().values, closes);
    }

    #[test]
    fn rolling_extrema_match_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let closes: Vec<f64> = (0..80).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let period = 7;
        let hi = rolling_max(&closes, period).unwrap();
        let lo = rolling_min(&closes, period).unwrap();
        for t in (period - 1)..closes.len() {
            let window = &closes[t + 1 - period..=t];
            let bmax = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let bmin = window.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(hi.values[t], bmax);
            assert_eq!(lo.values[t], bmin);
            assert!(hi.values[t] >= closes[t]);
            assert!(lo.values[t] <= closes[t]);
        }
    }

    #[test]
    fn rsi_saturates_on_monotone_series() {
        let up: Vec<f64> = (1..40).map(|i| i as f64).collect();
        let s = rsi(&up, 14).unwrap();
        assert_eq!(s.values[20], 100.0);
        let down: Vec<f64> = (1..40).rev().map(|i| i as f64).collect();
        let s = rsi(&down, 14).unwrap();
        assert_eq!(s.values[20], 0.0);
    }

    #[test]
    fn rsi_alternating_moves_oscillate_around_fifty() {
        // +1/-1 alternation: the two-step Wilder fixed point straddles 50
        // symmetrically, so consecutive values average to 50.
        let mut closes = vec![100.0];
        for i in 0..400 {
            let last = *closes.last().unwrap();
            closes.push(if i % 2 == 0 { last + 1.0 } else { last - 1.0 });
        }
        let s = rsi(&closes, 14).unwrap();
        let n = s.values.len();
        let pair_mean = (s.values[n - 1] + s.values[n - 2]) / 2.0;
        assert!((pair_mean - 50.0).abs() < 1e-6, "pair mean {pair_mean}");
    }

    #[test]
    fn rsi_mirror_symmetry() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let mut closes = vec![500.0];
        for _ in 0..120 {
            let step: f64 = rng.gen_range(-1.0..1.0);
            closes.push(closes.last().unwrap() + step);
        }
        // Mirror the moves around the start: gains and losses swap exactly.
        let mirrored: Vec<f64> = closes.iter().map(|c| 1000.0 - c).collect();
        let a = rsi(&closes, 14).unwrap();
        let b = rsi(&mirrored, 14).unwrap();
        for t in 14..closes.len() {
            assert!((a.values[t] + b.values[t] - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn period_errors() {
        assert!(sma(&[1.0, 2.0], 0).is_err());
        assert!(sma(&[1.0, 2.0], 3).is_err());
        assert!(rsi(&[1.0, 2.0], 2).is_err()); // length must exceed period
    }

    proptest! {
        /// SMA stays inside its own window's min/max; EMA inside the prefix
        /// min/max (its recursion mixes in all history since the seed).
        #[test]
        fn moving_averages_are_convex_combinations(
            closes in proptest::collection::vec(1.0f64..1000.0, 6..50),
            period in 1usize..6,
        ) {
            let s = sma(&closes, period).unwrap();
            for t in (period - 1)..closes.len() {
                let w = &closes[t + 1 - period..=t];
                let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(s.values[t] >= lo - 1e-9 && s.values[t] <= hi + 1e-9);
            }
            let e = ema(&closes, period).unwrap();
            for t in (period - 1)..closes.len() {
                let prefix = &closes[..=t];
                let lo = prefix.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = prefix.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(e.values[t] >= lo - 1e-9 && e.values[t] <= hi + 1e-9);
            }
        }

        /// EMA lags a strictly increasing series: always below the last close
        /// from the seed index on.
        #[test]
        fn ema_lags_increasing_series(
            steps in proptest::collection::vec(0.01f64..5.0, 6..40),
            period in 2usize..6,
        ) {
            let mut closes = vec![10.0];
            for s in &steps {
                closes.push(closes.last().unwrap() + s);
            }
            let e = ema(&closes, period).unwrap();
            for t in (period - 1)..closes.len() {
                prop_assert!(e.values[t] < closes[t]);
            }
        }

        /// RSI is bounded for any input.
        #[test]
        fn rsi_bounded(closes in proptest::collection::vec(1.0f64..1000.0, 16..80)) {
            let s = rsi(&closes, 14).unwrap();
            for v in s.values.iter().filter(|v| !v.is_nan()) {
                prop_assert!((0.0..=100.0).contains(v));
            }
        }
    }
}
