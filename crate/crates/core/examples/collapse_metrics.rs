//! Neural-collapse statistics of clustered features as they tighten around a
//! simplex equiangular tight frame.
//!
//! ```text
//! cargo run --example collapse_metrics
//! ```

use imbalance::collapse::{
    affinity_matrix, class_statistics, nc1, nc2, nc2_nn, per_class_nc1_all, CenterSet, FeatureMatrix,
    DEFAULT_RTOL,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const CLASSES: usize = 4;

/// Vertices of the regular simplex in `CLASSES` dimensions.
fn etf() -> DMatrix<f64> {
    let scale = (CLASSES as f64 / (CLASSES as f64 - 1.0)).sqrt();
    DMatrix::from_fn(CLASSES, CLASSES, |i, j| scale * (if i == j { 1.0 } else { 0.0 } - 1.0 / CLASSES as f64))
}

fn features(noise: f64, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let frame = etf();
    let sizes = [60, 25, 10, 4];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in sizes.iter().enumerate() {
        for _ in 0..n {
            rows.push(
                (0..CLASSES).map(|j| frame[(c, j)] + noise * rng.sample::<f64, _>(StandardNormal)).collect(),
            );
            labels.push(c as u32);
        }
    }
    FeatureMatrix::from_rows(&rows, labels).expect("every class has samples")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    println!("noise   nc1        nc2");
    for noise in [1.0, 0.5, 0.1, 0.01, 0.0] {
        let fm = features(noise, &mut rng);
        let stats = class_statistics(&fm)?;
        let centers = CenterSet::from_class_means(&stats)?;
        println!("{noise:<6}  {:<9.3e}  {:.3e}", nc1(&stats, DEFAULT_RTOL)?.value, nc2(&centers)?);
    }

    let fm = features(0.3, &mut rng);
    let stats = class_statistics(&fm)?;
    let centers = CenterSet::from_class_means(&stats)?;
    println!("\nclass  n   nc1_c     nc2_nn");
    for (c, v) in per_class_nc1_all(&stats, &fm, DEFAULT_RTOL)?.iter().enumerate() {
        println!("{c:<5}  {:<3} {:<8.4}  {:.4}", stats.class_counts[c], v.value, nc2_nn(&centers, c as u32)?);
    }
    println!("\naffinity of class means:\n{:.2}", affinity_matrix(&centers)?);

    // Binary export round trip (values are stored as f32).
    let mut bytes = Vec::new();
    fm.write_binary(&mut bytes)?;
    let back = FeatureMatrix::read_any(&bytes)?;
    println!("binary: {} bytes, {} rows x {} dims", bytes.len(), back.len(), back.dim());
    Ok(())
}
