//! Measure the leakage difference between shuffling before and after the
//! split. Overlapping windows make shuffle-then-split hand most of the
//! validation data to the training set; split-then-shuffle confines the
//! overlap to the boundary, and the embargo closes the label-window leak.
//!
//! ```bash
//! cargo run -p tslab --example leakage_audit
//! ```

use tslab::splitting::{shuffle_then_split, split_then_shuffle, Embargo};
use tslab::windowing::{slice_overlap_fraction, SliceSpec};

fn main() -> tslab::Result<()> {
    let spec = SliceSpec {
        lookback: 20,
        stride: 1,
        channels: vec!["close".into()],
        label_horizon: 5,
    };
    println!(
        "adjacent slices share {:.0}% of their bars (n = {}, stride = {})\n",
        slice_overlap_fraction(7, 8, &spec) * 100.0,
        spec.lookback,
        spec.stride
    );

    let k = 1000;
    let fractions = (0.8, 0.2, 0.0);

    let bad = shuffle_then_split(k, fractions, 42, &spec)?;
    let good = split_then_shuffle(k, fractions, 42, &spec, Embargo::Auto)?;
    let no_embargo = split_then_shuffle(k, fractions, 42, &spec, Embargo::Slices(0))?;

    println!(
        "{:<24} {:>12} {:>12} {:>14} {:>12}",
        "method", "max overlap", "mean overlap", "overlap pairs", "label leaks"
    );
    for (name, plan) in [
        ("shuffle-then-split", &bad),
        ("split-then-shuffle", &no_embargo),
        ("  + embargo (auto)", &good),
    ] {
        println!(
            "{:<24} {:>12.4} {:>12.4} {:>14} {:>12}",
            name,
            plan.leakage.max_cross_overlap,
            plan.leakage.mean_cross_overlap,
            plan.leakage.violating_pairs,
            plan.leakage.label_window_violations
        );
    }
    println!(
        "\nembargo dropped slices {:?}; train keeps {} of {} slices",
        good.embargo_range,
        good.train_order.len(),
        good.train_range.end + good.embargo_range.len()
    );
    Ok(())
}
