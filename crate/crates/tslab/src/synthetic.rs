//! Seeded synthetic series for tests, examples, and probe dry runs.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::market_data::{Bar, BarSeries};

/// Gaussian random walk starting at 0.
pub fn gaussian_walk(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(len);
    let mut level = 0.0;
    y.push(level);
    for _ in 1..len {
        let z: f64 = rng.sample(StandardNormal);
        level += z;
        y.push(level);
    }
    y
}

/// Independent standard normal draws.
pub fn white_noise(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Geometric random-walk closes: `c_{t+1} = c_t * exp(vol * z_t)`. Always
/// positive, so it can stand in for an equity close series.
pub fn gbm_closes(seed: u64, len: usize, start: f64, vol: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closes = Vec::with_capacity(len);
    let mut c = start;
    closes.push(c);
    for _ in 1..len {
        let z: f64 = rng.sample(StandardNormal);
        c *= (vol * z).exp();
        closes.push(c);
    }
    closes
}

/// Full synthetic daily OHLCV history around a geometric random walk.
pub fn ohlcv_series(seed: u64, len: usize, start: f64) -> BarSeries {
    let closes = gbm_closes(seed, len, start, 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let epoch = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let bars: Vec<Bar> = closes
        .iter()
        .enumerate()
        .map(|(i, &close)| {
            let open = if i == 0 { close } else { closes[i - 1] };
            let span = rng.gen_range(0.0..0.01);
            let high = open.max(close) * (1.0 + span);
            let low = open.min(close) * (1.0 - span);
            Bar {
                timestamp: (epoch + chrono::Duration::days(i as i64))
                    .and_hms_opt(0, 0, 0)
                    .unwrap(),
                open,
                high,
                low,
                close,
                volume: Some(rng.gen_range(1e5..1e6_f64).round()),
            }
        })
        .collect();
    BarSeries::new("synthetic", bars).expect("generated bars satisfy the invariants")
}
