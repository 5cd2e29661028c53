//! tslab — a preprocessing lab for financial time series.
//!
//! Turns raw OHLCV history into stationarity-checked, per-slice-scaled,
//! leakage-free, labeled datasets for machine learning, and verifies via a
//! small trainable probe that the chosen scaling preserves the simple price
//! relationships a model would need to learn anything at all.
//!
//! The stages, each usable on its own:
//!
//! - [`market_data`] — CSV ingestion, validation, return series
//! - [`indicators`] — SMA / EMA / rolling extrema / RSI with their scaling
//!   taxonomy (overlaid, bounded, separate)
//! - [`stationarity`] — augmented Dickey-Fuller testing on an internal
//!   least-squares solver
//! - [`windowing`] — overlapping slice tensors `(slices, timesteps, channels)`
//! - [`scaling`] — per-slice minmax / standardization with grouped channels
//! - [`labeling`] — direction, change, log-return, moving-average, trend,
//!   forward-window quality (and its discretization) label families
//! - [`splitting`] — split-then-shuffle with embargo and a leakage audit,
//!   plus the shuffle-then-split anti-pattern for comparison
//! - [`probe`] — a from-scratch softmax classifier that measures whether
//!   scaled slices still encode simple price relationships
//! - [`pipeline`] — configuration-driven orchestration with reproducible
//!   manifests
//!
//! See the `examples/` directory for one runnable walkthrough per stage,
//! and the `tslab` binary for the command-line pipeline.

pub mod cli;
pub mod error;
pub mod indicators;
pub mod labeling;
pub mod market_data;
pub mod pipeline;
pub mod probe;
pub mod scaling;
pub mod splitting;
pub mod stationarity;
pub mod synthetic;
pub mod windowing;

pub use error::{Error, Result};
