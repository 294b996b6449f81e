//! Draws per-step training vocabularies for a long-tailed label set.
//!
//! ```text
//! cargo run --example vocabulary_sampling
//! ```

use imbalance::sampler::{restrict_logits, sample_vocabulary, step_seed, subsample_prototypes, SamplingMode};
use nalgebra::DMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let freq: Vec<u64> = (0..20u64).map(|c| 1000 / (c + 1).pow(2)).collect();
    println!("frequencies: {freq:?}");

    let batch = [0u32, 0, 3, 17];
    for mode in [SamplingMode::Frequency, SamplingMode::Uniform] {
        println!("\n{mode:?}");
        for step in 0..4 {
            let v = sample_vocabulary(&batch, &freq, 8, mode, step_seed(42, step))?;
            let marked: Vec<String> = v
                .class_ids
                .iter()
                .map(|&c| if v.is_forced(c) { format!("{c}*") } else { c.to_string() })
                .collect();
            println!("  step {step}: {}", marked.join(" "));
        }
    }

    // How often each class joins the vocabulary over many steps.
    let mut hits = vec![0u32; freq.len()];
    for step in 0..5000 {
        for c in sample_vocabulary(&[0], &freq, 5, SamplingMode::Frequency, step_seed(1, step))?.class_ids {
            hits[c as usize] += 1;
        }
    }
    println!("\ninclusion counts over 5000 steps: {hits:?}");

    let logits = DMatrix::from_fn(2, freq.len(), |b, c| (b * 100 + c) as f64);
    let vocab = sample_vocabulary(&[1, 4], &freq, 4, SamplingMode::Frequency, 9)?;
    let (restricted, map) = restrict_logits(&logits, &vocab);
    println!("\nrestricted columns {map:?}:\n{restricted}");

    println!("prototype subsample: {:?}", subsample_prototypes(65_536, 8, 5)?);
    Ok(())
}
