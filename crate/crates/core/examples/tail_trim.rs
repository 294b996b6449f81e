//! Extreme-tail experiment: the last twenty classes keep a single training
//! sample each. Compares learned prototypes, frozen oracle prototypes, and
//! frozen prototypes trained with subsampled vocabularies.
//!
//! ```text
//! cargo run --release --example tail_trim [seed]
//! ```

use imbalance::collapse::{affinity_matrix, mean_pairwise_cosine, CenterSet};
use imbalance::toy::{train, PrototypeMode, SyntheticSpec, TailTrim, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let spec = SyntheticSpec {
        tail_trim: Some(TailTrim { classes: 20, shots: 1 }),
        ..SyntheticSpec::reference(seed)
    };
    let base = TrainConfig::reference(seed);
    let variants = [
        ("learned", base.clone()),
        ("learned + subsampling", TrainConfig { vocab_size: Some(10), ..base.clone() }),
        ("frozen oracle", TrainConfig { prototype_mode: PrototypeMode::FrozenOracle, ..base.clone() }),
        (
            "frozen oracle + subsampling",
            TrainConfig { prototype_mode: PrototypeMode::FrozenOracle, vocab_size: Some(10), ..base },
        ),
    ];

    println!("{:<28} {:>9} {:>9} {:>12}", "", "mean_acc", "tail_acc", "tail_cosine");
    for (name, config) in variants {
        let run = train(&spec, &config)?;
        let eval = run.evaluate()?;
        let heads = CenterSet::new(run.model.prototypes.clone())?;
        let tail = &run.data.tail_classes;
        println!(
            "{name:<28} {:>9.3} {:>9.3} {:>12.3}",
            eval.mean_acc,
            eval.tail_acc,
            mean_pairwise_cosine(&heads, tail)?
        );
        if name == "learned" {
            let affinity = affinity_matrix(&heads)?;
            let (lo, hi) = (tail[0] as usize, tail[0] as usize + 6);
            println!(
                "  learned affinity, first tail rows:\n{:.2}",
                affinity.view((lo, lo), (hi - lo, hi - lo))
            );
        }
    }
    Ok(())
}
