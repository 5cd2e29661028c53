//! OHLCV ingestion and return computation.
//!
//! `BarSeries` is the validated entry point for every downstream stage:
//! bars are sorted, timestamps strictly increasing, prices positive and
//! OHLC-consistent. Rows that fail validation abort ingestion with their
//! row number instead of being silently dropped, because silent gaps would
//! corrupt the adjacency assumptions of the slicing stage.

use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One OHLCV bar. `volume` is `None` for sources that do not report it
/// (e.g. spot forex); it is never fabricated as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub timestamp: NaiveDateTime,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: Option<f64>,
}

impl Bar {
    /// Checks the bar invariants: positive prices, `high >= low`, and
    /// open/close inside the high-low envelope.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("non-positive {name} price {v}"));
            }
        }
        if self.high < self.low {
            return Err(format!("high {} < low {}", self.high, self.low));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!("low {} above min(open, close)", self.low));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!("high {} below max(open, close)", self.high));
        }
        if let Some(v) = self.volume {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("negative volume {v}"));
            }
        }
        Ok(())
    }
}

/// Ordered, validated OHLCV history for one instrument.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarSeries {
    symbol: String,
    bars: Vec<Bar>,
}

impl BarSeries {
    /// Builds a series from bars, sorting by timestamp and enforcing the
    /// series invariants (length >= 2, strictly increasing timestamps,
    /// valid bars).
    pub fn new(symbol: impl Into<String>, mut bars: Vec<Bar>) -> Result<Self> {
        if bars.len() < 2 {
            return Err(Error::SeriesTooShort { needed: 2, got: bars.len() });
        }
        bars.sort_by_key(|b| b.timestamp);
        for w in bars.windows(2) {
            if w[0].timestamp == w[1].timestamp {
                return Err(Error::InvalidParameter(format!(
                    "duplicate timestamp {}",
                    w[0].timestamp
                )));
            }
        }
        for (i, bar) in bars.iter().enumerate() {
            bar.validate()
                .map_err(|reason| Error::CsvRow { row: i + 1, reason })?;
        }
        Ok(Self { symbol: symbol.into(), bars })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Closing prices in timestamp order.
    pub fn close_vector(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn open_vector(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.open).collect()
    }

    pub fn high_vector(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn low_vector(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    /// Volumes in timestamp order, or `None` if any bar is missing volume.
    pub fn volume_vector(&self) -> Option<Vec<f64>> {
        self.bars.iter().map(|b| b.volume).collect()
    }

    /// Close-to-close returns. Length is `len() - 1`.
    pub fn to_returns(&self, kind: ReturnKind) -> Result<ReturnSeries> {
        if self.bars.len() < 2 {
            return Err(Error::SeriesTooShort { needed: 2, got: self.bars.len() });
        }
        let values = self
            .bars
            .windows(2)
            .map(|w| match kind {
                ReturnKind::Simple => w[1].close / w[0].close - 1.0,
                ReturnKind::Log => (w[1].close / w[0].close).ln(),
            })
            .collect();
        Ok(ReturnSeries { values, kind })
    }
}

/// Return formula applied to consecutive closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnKind {
    Simple,
    Log,
}

/// Close-to-close return series; entry `t` relates closes `t` and `t+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub kind: ReturnKind,
}

/// Column mapping for CSV ingestion. The defaults match a
/// `date,open,high,low,close,volume` header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvSchema {
    pub timestamp: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    /// Set to `None` for sources without a volume column.
    pub volume: Option<String>,
    pub delimiter: char,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp: "date".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: Some("volume".into()),
            delimiter: ',',
        }
    }
}

/// Parses an ISO-8601 date-time or plain `YYYY-MM-DD` date.
fn parse_timestamp(raw: &str) -> std::result::Result<NaiveDateTime, String> {
    let raw = raw.trim();
    if let Ok(dt) = NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S") {
        return Ok(dt);
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S") {
        return Ok(dt);
    }
    if let Ok(d) = chrono::NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight is valid"));
    }
    Err(format!("unparseable timestamp '{raw}'"))
}

/// Loads and validates a bar series from CSV.
///
/// Rows are sorted by timestamp after parsing, so shuffled files ingest to
/// the same series as sorted ones. Any invalid row aborts with its 1-based
/// data-row number.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<BarSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::CsvRow { row: 0, reason: e.to_string() })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Config(format!("csv is missing column '{name}'")))
    };
    let ts_col = col(&schema.timestamp)?;
    let open_col = col(&schema.open)?;
    let high_col = col(&schema.high)?;
    let low_col = col(&schema.low)?;
    let close_col = col(&schema.close)?;
    let vol_col = match &schema.volume {
        // A configured volume column that is absent from the file is treated
        // as a volume-less source rather than an error.
        Some(name) => headers.iter().position(|h| h.eq_ignore_ascii_case(name)),
        None => None,
    };

    let mut bars = Vec::new();
    let mut rows_with_volume = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::CsvRow { row, reason: e.to_string() })?;
        let field = |c: usize| -> std::result::Result<&str, String> {
            record.get(c).ok_or_else(|| format!("missing field {c}"))
        };
        let price = |c: usize, name: &str| -> std::result::Result<f64, String> {
            field(c)?
                .parse::<f64>()
                .map_err(|_| format!("unparseable {name} '{}'", field(c).unwrap_or("")))
        };
        let bar = (|| -> std::result::Result<Bar, String> {
            let timestamp = parse_timestamp(field(ts_col)?)?;
            let volume = match vol_col {
                Some(c) => {
                    let raw = field(c)?;
                    if raw.is_empty() {
                        None
                    } else {
                        Some(raw.parse::<f64>().map_err(|_| format!("unparseable volume '{raw}'"))?)
                    }
                }
                None => None,
            };
            Ok(Bar {
                timestamp,
                open: price(open_col, "open")?,
                high: price(high_col, "high")?,
                low: price(low_col, "low")?,
                close: price(close_col, "close")?,
                volume,
            })
        })()
        .map_err(|reason| Error::CsvRow { row, reason })?;
        bar.validate().map_err(|reason| Error::CsvRow { row, reason })?;
        if bar.volume.is_some() {
            rows_with_volume += 1;
        }
        bars.push(bar);
    }

    // Volume is all-or-nothing: a partially reported column would fabricate
    // gaps inside the scaled volume channel.
    if rows_with_volume > 0 && rows_with_volume < bars.len() {
        return Err(Error::Config(
            "volume column is only partially populated; drop the column or fill it".into(),
        ));
    }

    let symbol = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("series")
        .to_string();
    BarSeries::new(symbol, bars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn series_from_closes(closes: &[f64]) -> BarSeries {
        let bars = closes
            .iter()
            .enumerate()
            .map(|(i, &c)| Bar {
                timestamp: chrono::NaiveDate::from_ymd_opt(2020, 1, 1)
                    .unwrap()
                    .and_hms_opt(0, 0, 0)
                    .unwrap()
                    + chrono::Duration::days(i as i64),
                open: c,
                high: c,
                low: c,
                close: c,
                volume: None,
            })
            .collect();
        BarSeries::new("test", bars).unwrap()
    }

    #[test]
    fn loads_well_formed_csv() {
        let f = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-02,10.5,12,10,11.5,150\n\
             2020-01-03,11.5,12,11,11.8,90\n",
        );
        let series = load_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series.close_vector(), vec![10.5, 11.5, 11.8]);
        assert_eq!(series.bars()[0].volume, Some(100.0));
    }

    #[test]
    fn rejects_high_below_low_naming_row() {
        let f = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-02,10.5,9,12,11.5,150\n",
        );
        let err = load_csv(f.path(), &CsvSchema::default()).unwrap_err();
        match err {
            Error::CsvRow { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sorts_shuffled_dates() {
        let shuffled = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-03,11.5,12,11,11.8,90\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-02,10.5,12,10,11.5,150\n",
        );
        let sorted = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-02,10.5,12,10,11.5,150\n\
             2020-01-03,11.5,12,11,11.8,90\n",
        );
        let a = load_csv(shuffled.path(), &CsvSchema::default()).unwrap();
        let b = load_csv(sorted.path(), &CsvSchema::default()).unwrap();
        assert_eq!(a.bars(), b.bars());
    }

    #[test]
    fn rejects_duplicate_timestamps() {
        let f = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-01,10.5,12,10,11.5,150\n",
        );
        assert!(load_csv(f.path(), &CsvSchema::default()).is_err());
    }

    #[test]
    fn rejects_non_positive_price() {
        let f = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-02,0,12,-1,11.5,150\n",
        );
        let err = load_csv(f.path(), &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::CsvRow { row: 2, .. }));
    }

    #[test]
    fn missing_volume_column_loads_as_absent() {
        let f = write_csv(
            "date,open,high,low,close\n\
             2020-01-01,10,11,9,10.5\n\
             2020-01-02,10.5,12,10,11.5\n",
        );
        let series = load_csv(f.path(), &CsvSchema::default()).unwrap();
        assert!(series.bars().iter().all(|b| b.volume.is_none()));
        assert!(series.volume_vector().is_none());
    }

    #[test]
    fn load_is_deterministic() {
        let f = write_csv(
            "date,open,high,low,close,volume\n\
             2020-01-01,10,11,9,10.5,100\n\
             2020-01-02,10.5,12,10,11.5,150\n",
        );
        let a = load_csv(f.path(), &CsvSchema::default()).unwrap();
        let b = load_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simple_returns_hand_values() {
        let series = series_from_closes(&[100.0, 110.0, 99.0]);
        let r = series.to_returns(ReturnKind::Simple).unwrap();
        assert_eq!(r.values.len(), 2);
        assert!((r.values[0] - 0.10).abs() < 1e-12);
        assert!((r.values[1] - (-0.10)).abs() < 1e-12);
    }

    #[test]
    fn constant_series_returns_zero() {
        let series = series_from_closes(&[100.0, 100.0, 100.0]);
        let r = series.to_returns(ReturnKind::Simple).unwrap();
        assert_eq!(r.values, vec![0.0, 0.0]);
    }

    #[test]
    fn log_return_definition() {
        let series = series_from_closes(&[100.0, 110.0]);
        let r = series.to_returns(ReturnKind::Log).unwrap();
        assert!((r.values[0] - 1.1f64.ln()).abs() < 1e-12);
        assert!((r.values[0] - 0.09531).abs() < 1e-5);
    }

    #[test]
    fn close_vector_preserves_order_and_length() {
        let series = series_from_closes(&[1.0, 2.0, 3.0]);
        assert_eq!(series.close_vector(), vec![1.0, 2.0, 3.0]);
        let long = series_from_closes(&(1..=1000).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(long.close_vector().len(), 1000);
    }

    #[test]
    fn single_bar_series_rejected() {
        let bars = vec![Bar {
            timestamp: chrono::NaiveDate::from_ymd_opt(2020, 1, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            open: 1.0,
            high: 1.0,
            low: 1.0,
            close: 1.0,
            volume: None,
        }];
        assert!(matches!(
            BarSeries::new("x", bars),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    proptest! {
        /// Cumulative reconstruction from simple returns reproduces closes.
        #[test]
        fn simple_returns_round_trip(closes in proptest::collection::vec(1.0f64..1e4, 2..60)) {
            let series = series_from_closes(&closes);
            let r = series.to_returns(ReturnKind::Simple).unwrap();
            let mut rebuilt = vec![closes[0]];
            for v in &r.values {
                rebuilt.push(rebuilt.last().unwrap() * (1.0 + v));
            }
            for (a, b) in rebuilt.iter().zip(&closes) {
                prop_assert!(((a - b) / b).abs() < 1e-9);
            }
        }

        /// Log returns telescope: their sum is ln(last/first).
        #[test]
        fn log_returns_telescope(closes in proptest::collection::vec(1.0f64..1e4, 2..60)) {
            let series = series_from_closes(&closes);
            let r = series.to_returns(ReturnKind::Log).unwrap();
            let total: f64 = r.values.iter().sum();
            let expected = (closes[closes.len() - 1] / closes[0]).ln();
            prop_assert!((total - expected).abs() < 1e-9);
        }
    }
}
