//! Load an OHLCV CSV, validate it, and derive return series.
//!
//! ```bash
//! cargo run -p tslab --example ingest_and_returns
//! ```

use tslab::market_data::{load_csv, CsvSchema, ReturnKind};

fn main() -> tslab::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/sample_ohlcv.csv");
    let series = load_csv(path, &CsvSchema::default())?;
    println!("loaded {} bars of {}", series.len(), series.symbol());
    println!(
        "first {} .. last {}",
        series.bars()[0].timestamp.date(),
        series.bars()[series.len() - 1].timestamp.date()
    );

    let simple = series.to_returns(ReturnKind::Simple)?;
    let log = series.to_returns(ReturnKind::Log)?;
    println!("\nfirst five simple returns: {:?}", &simple.values[..5]);
    println!("first five log returns:    {:?}", &log.values[..5]);

    // Log returns telescope to the full-period growth.
    let total: f64 = log.values.iter().sum();
    let closes = series.close_vector();
    println!(
        "\nsum of log returns {total:.6} == ln(last/first) {:.6}",
        (closes[closes.len() - 1] / closes[0]).ln()
    );
    Ok(())
}
