//! Augmented Dickey-Fuller unit-root testing on top of an internal
//! least-squares solver.
//!
//! The test regresses the differenced series on the lagged level, lagged
//! differences, and deterministic terms:
//!
//! ```text
//! dy_t = alpha (+ beta * t) + gamma * y_{t-1} + sum_i delta_i * dy_{t-i} + e_t
//! ```
//!
//! and reports the t-ratio of `gamma`. The lag order is chosen by minimum
//! AIC over `0..=max_lags` on a common sample (all candidates trimmed to the
//! max-lag sample so their likelihoods are comparable), then the winning
//! order is refit on the longest sample it allows — the same procedure as
//! mainstream econometrics tooling, so results line up with it.

mod mackinnon;
mod ols;

pub use ols::{ols, Matrix, OlsFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::windowing::SliceTensor;

/// Deterministic terms included in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regression {
    /// Constant only; the usual choice for returns and scaled data.
    Constant,
    /// Constant plus linear trend; the usual choice for raw price levels.
    ConstantAndTrend,
}

impl Regression {
    fn ntrend(self) -> usize {
        match self {
            Regression::Constant => 1,
            Regression::ConstantAndTrend => 2,
        }
    }
}

/// Critical values at the 1%, 5% and 10% levels (increasing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub pct1: f64,
    pub pct5: f64,
    pub pct10: f64,
}

/// Result of one Augmented Dickey-Fuller test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdfReport {
    /// t-ratio of the lagged-level coefficient.
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    /// Observations entering the final regression.
    pub n_obs: usize,
    pub regression: Regression,
    pub critical_values: CriticalValues,
}

impl AdfReport {
    /// True when the unit-root null is rejected at the given level
    /// (`0.01`, `0.05` or `0.10`).
    pub fn rejects_at(&self, level: f64) -> bool {
        let crit = if level <= 0.01 {
            self.critical_values.pct1
        } else if level <= 0.05 {
            self.critical_values.pct5
        } else {
            self.critical_values.pct10
        };
        self.statistic < crit
    }
}

impl std::fmt::Display for AdfReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let reg = match self.regression {
            Regression::Constant => "constant",
            Regression::ConstantAndTrend => "constant+trend",
        };
        writeln!(f, "ADF statistic   {:>12.6}", self.statistic)?;
        writeln!(f, "p-value         {:>12.6}", self.p_value)?;
        writeln!(f, "lags used       {:>12}", self.lags_used)?;
        writeln!(f, "observations    {:>12}", self.n_obs)?;
        writeln!(f, "regression      {:>12}", reg)?;
        writeln!(f, "crit 1%         {:>12.4}", self.critical_values.pct1)?;
        writeln!(f, "crit 5%         {:>12.4}", self.critical_values.pct5)?;
        write!(f, "crit 10%        {:>12.4}", self.critical_values.pct10)
    }
}

/// Builds the ADF design for `lags` lagged differences over the sample of
/// the last `nobs` differences, plus the response vector.
fn adf_design(
    series: &[f64],
    diffs: &[f64],
    lags: usize,
    nobs: usize,
    regression: Regression,
) -> (Matrix, Vec<f64>) {
    let t_total = diffs.len();
    let start = t_total - nobs; // first difference index in the sample
    let ntrend = regression.ntrend();
    let cols = ntrend + 1 + lags;
    let design = Matrix::from_fn(nobs, cols, |row, col| {
        let t = start + row; // index into diffs; dy_t pairs with y_t (level index t)
        match col {
            0 => 1.0,
            1 if regression == Regression::ConstantAndTrend => (t + 2) as f64,
            c if c == ntrend => series[t],
            c => diffs[t - (c - ntrend)],
        }
    });
    let response = diffs[start..].to_vec();
    (design, response)
}

/// Augmented Dickey-Fuller test with AIC lag selection.
///
/// `max_lags` defaults to the Schwert bound `floor(12 * (T/100)^0.25)`,
/// clamped so the regression keeps enough degrees of freedom.
pub fn adf_test(
    series: &[f64],
    regression: Regression,
    max_lags: Option<usize>,
) -> Result<AdfReport> {
    let t_len = series.len();
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("series contains non-finite values".into()));
    }
    let ntrend = regression.ntrend();
    let schwert = (12.0 * (t_len as f64 / 100.0).powf(0.25)).floor() as usize;
    let hard_cap = (t_len / 2).saturating_sub(ntrend + 1);
    let max_lags = max_lags.unwrap_or(schwert).min(hard_cap);
    if t_len < 15 + max_lags {
        return Err(Error::SeriesTooShort { needed: 15 + max_lags, got: t_len });
    }
    let mean = series.iter().sum::<f64>() / t_len as f64;
    if series.iter().all(|v| (v - mean).abs() < 1e-14 * mean.abs().max(1.0)) {
        return Err(Error::ConstantSeries("zero variance, ADF regression undefined".into()));
    }

    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    // Lag selection on the common max-lag sample.
    let search_nobs = diffs.len() - max_lags;
    let mut best_lag = 0usize;
    let mut best_aic = f64::INFINITY;
    for lag in 0..=max_lags {
        let (design, response) = adf_design(series, &diffs, lag, search_nobs, regression);
        let fit = ols(&design, &response)?;
        let aic = fit.aic();
        if aic < best_aic {
            best_aic = aic;
            best_lag = lag;
        }
    }

    // Refit the winning order on its longest sample.
    let nobs = diffs.len() - best_lag;
    let (design, response) = adf_design(series, &diffs, best_lag, nobs, regression);
    let fit = ols(&design, &response)?;
    let gamma_idx = ntrend;
    let statistic = fit.coefficients[gamma_idx] / fit.standard_errors[gamma_idx];
    let crit = mackinnon::critical_values(regression, nobs);

    Ok(AdfReport {
        statistic,
        p_value: mackinnon::p_value(statistic, regression),
        lags_used: best_lag,
        n_obs: nobs,
        regression,
        critical_values: CriticalValues { pct1: crit[0], pct5: crit[1], pct10: crit[2] },
    })
}

/// Runs the ADF test on one channel of a slice tensor, concatenating the
/// slices in temporal order — the stationarity check applied to data as the
/// model will actually see it. Scaled data carries no trend, so the
/// constant-only regression is used.
pub fn adf_on_slices(
    slices: &SliceTensor,
    channel: usize,
    max_lags: Option<usize>,
) -> Result<AdfReport> {
    if channel >= slices.channel_count() {
        return Err(Error::ChannelMismatch(format!(
            "channel index {channel} out of range ({} channels)",
            slices.channel_count()
        )));
    }
    if slices.slice_count() == 0 {
        return Err(Error::SeriesTooShort { needed: 1, got: 0 });
    }
    let mut series = Vec::with_capacity(slices.slice_count() * slices.timesteps());
    for k in 0..slices.slice_count() {
        for t in 0..slices.timesteps() {
            series.push(slices.value(k, t, channel));
        }
    }
    adf_test(&series, Regression::Constant, max_lags)
}
