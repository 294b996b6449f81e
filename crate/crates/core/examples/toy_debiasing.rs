//! Trains the synthetic prototype classifier with the full vocabulary and with
//! ten-class subsampled vocabularies, and compares how strongly predictions
//! follow training frequency.
//!
//! ```text
//! cargo run --release --example toy_debiasing [seed]
//! ```

use imbalance::sampler::SamplingMode;
use imbalance::stats::format_float;
use imbalance::toy::{train, SyntheticSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let spec = SyntheticSpec::reference(seed);
    let sizes = spec.class_sizes();
    println!(
        "{} classes, {} training samples, head {} / tail {}",
        spec.classes,
        sizes.iter().sum::<usize>(),
        sizes[0],
        sizes[sizes.len() - 1]
    );

    let full = TrainConfig::reference(seed);
    let sub = TrainConfig { vocab_size: Some(10), vocab_mode: SamplingMode::Frequency, ..full.clone() };

    for (name, config) in [("full vocabulary", full), ("vocabulary of 10", sub)] {
        let run = train(&spec, &config)?;
        let eval = run.evaluate()?;
        println!("\n{name}");
        for rec in run.history.iter().step_by(10).chain(run.history.last()) {
            println!(
                "  epoch {:>2}  loss {:.4}  mean_acc {:.3}  tail_acc {:.3}",
                rec.epoch, rec.loss, rec.mean_acc, rec.tail_acc
            );
        }
        println!("  Spearman(pred_count, freq) = {}", format_float(eval.report.rho_pred_freq));
        println!("  Spearman(accuracy, freq)   = {}", format_float(eval.report.rho_acc_freq));
        let head: u64 = eval.table.rows[..10].iter().map(|r| r.pred_count).sum();
        println!("  predictions landing on the 10 largest classes: {head} of {}", eval.predictions.len());
    }
    Ok(())
}
