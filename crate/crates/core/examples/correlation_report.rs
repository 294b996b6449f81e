//! Rank and linear correlation of per-class accuracy with class frequency,
//! plus a log-binned accuracy profile.
//!
//! ```text
//! cargo run --example correlation_report
//! ```

use imbalance::stats::{
    binned_summary, correlation_report, format_float, pearson_r, spearman_rho, PerClassRow, PerClassTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Zipf-like frequencies; accuracy rises with log frequency plus noise.
    let rows: Vec<PerClassRow> = (0..200u32)
        .map(|c| {
            let frequency = (20_000.0 / (c as f64 + 1.0).powf(1.3)) as u64;
            let signal = ((frequency as f64) + 1.0).log10() / 4.5;
            let accuracy = (signal + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0);
            let pred_count = (50.0 * (0.4 + signal) + rng.random_range(0.0..10.0)) as u64;
            PerClassRow { class_id: c, frequency, accuracy, pred_count }
        })
        .collect();
    let table = PerClassTable::new(rows)?;

    let report = correlation_report(&table, true)?;
    for (name, value) in report.rows() {
        println!("{name:<14} {value}");
    }

    // Ties are ranked by their average position.
    let x = [1.0, 2.0, 2.0, 3.0];
    let y = [10.0, 20.0, 20.0, 5.0];
    println!("ties: rho={} r={}", format_float(spearman_rho(&x, &y)?), format_float(pearson_r(&x, &y)?));
    println!("constant: rho={}", format_float(spearman_rho(&x, &[1.0; 4])?));

    println!("\nbin_center  mean_acc  std     count");
    for bin in binned_summary(&table.frequencies(), &table.accuracies(), 6, true)? {
        println!(
            "{:>10.1}  {:>8}  {:>6}  {}",
            bin.center,
            bin.mean.map_or("-".into(), |m| format!("{m:.3}")),
            bin.std.map_or("-".into(), |s| format!("{s:.3}")),
            bin.count
        );
    }
    Ok(())
}
