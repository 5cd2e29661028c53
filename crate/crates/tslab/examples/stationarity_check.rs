//! Unit-root testing: price levels keep their trend (the test fails to
//! reject), returns are stationary (the test rejects decisively), and
//! per-slice scaled windows test stationary as well.
//!
//! ```bash
//! cargo run -p tslab --example stationarity_check
//! ```

use tslab::market_data::{load_csv, CsvSchema, ReturnKind};
use tslab::scaling::{scale_slices, ScalerConfig};
use tslab::stationarity::{adf_on_slices, adf_test, Regression};
use tslab::windowing::{make_slices, Channel, SliceSpec};

fn main() -> tslab::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/sample_ohlcv.csv");
    let series = load_csv(path, &CsvSchema::default())?;
    let closes = series.close_vector();

    println!("== raw closes (trend regression) ==");
    let report = adf_test(&closes, Regression::ConstantAndTrend, None)?;
    println!("{report}");
    println!(
        "-> {}\n",
        if report.rejects_at(0.01) { "rejects the unit root" } else { "fails to reject: not stationary" }
    );

    println!("== simple returns (constant regression) ==");
    let returns = series.to_returns(ReturnKind::Simple)?;
    let report = adf_test(&returns.values, Regression::Constant, None)?;
    println!("{report}");
    println!(
        "-> {}\n",
        if report.rejects_at(0.01) { "rejects: stationary" } else { "fails to reject" }
    );

    // Slice the closes, scale each slice on its own, and test the data the
    // model would actually see.
    let spec = SliceSpec {
        lookback: 20,
        stride: 1,
        channels: vec!["close".into()],
        label_horizon: 0,
    };
    let tensor = make_slices(&[Channel::new("close", closes)], &spec)?;
    let scaled = scale_slices(&tensor, &ScalerConfig::standardize(&spec.channels))?;
    println!("== per-slice standardized windows, concatenated ==");
    let report = adf_on_slices(&scaled, 0, Some(12))?;
    println!("{report}");
    Ok(())
}
