//! Regenerates `examples/data/sample_ohlcv.csv`, the synthetic daily
//! history the other examples and the README commands use.
//!
//! ```bash
//! cargo run -p tslab --example make_sample_data
//! ```

use tslab::synthetic;

fn main() {
    let series = synthetic::ohlcv_series(20240, 500, 100.0);
    let mut csv = String::from("date,open,high,low,close,volume\n");
    for bar in series.bars() {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{}\n",
            bar.timestamp.format("%Y-%m-%d"),
            bar.open,
            bar.high,
            bar.low,
            bar.close,
            bar.volume.unwrap()
        ));
    }
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    std::fs::create_dir_all(dir).unwrap();
    let path = format!("{dir}/sample_ohlcv.csv");
    std::fs::write(&path, csv).unwrap();
    println!("wrote {} rows to {path}", series.len());
}
