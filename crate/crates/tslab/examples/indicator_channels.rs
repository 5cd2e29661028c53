//! Compute indicator channels and show the scaling taxonomy each carries:
//! overlaid indicators share the price scaling, bounded ones divide by
//! their bound, separate ones scale on their own.
//!
//! ```bash
//! cargo run -p tslab --example indicator_channels
//! ```

use tslab::indicators::{ema, rolling_max, rolling_min, rsi, sma};
use tslab::market_data::{load_csv, CsvSchema};

fn main() -> tslab::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/sample_ohlcv.csv");
    let series = load_csv(path, &CsvSchema::default())?;
    let closes = series.close_vector();

    let channels = vec![
        sma(&closes, 20)?,
        ema(&closes, 5)?,
        rolling_max(&closes, 10)?,
        rolling_min(&closes, 10)?,
        rsi(&closes, 14)?,
    ];

    println!("{:<8} {:>10} {:>12} {:>10} {:>8}", "channel", "taxonomy", "warm-up idx", "last", "bound");
    for ch in &channels {
        println!(
            "{:<8} {:>10} {:>12} {:>10.4} {:>8}",
            ch.name,
            format!("{:?}", ch.taxonomy).to_lowercase(),
            ch.first_defined().unwrap(),
            ch.values.last().unwrap(),
            ch.bound_max.map_or("-".to_string(), |b| b.to_string()),
        );
    }

    let t = closes.len() - 1;
    println!("\nlast close {:.4}", closes[t]);
    println!("close above ema5:  {}", closes[t] > channels[1].values[t]);
    println!("close above sma20: {}", closes[t] > channels[0].values[t]);
    println!("rsi14 / 100:       {:.4} (bounded channels keep their levels: 70 -> 0.7)", channels[4].values[t] / 100.0);
    Ok(())
}
