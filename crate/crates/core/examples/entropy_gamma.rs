//! Estimates the scaling factor from two synthetic embedding matrices.
//!
//! The "text" matrix is drawn from a narrow set of values, the "vision"
//! matrix spreads over the whole range, so vision carries more bits per
//! dimension and the estimated step comes out above one.

use omega_pe::{estimate_gamma, EmbeddingMatrix, GaessConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(rng: &mut ChaCha8Rng, rows: usize, cols: usize, levels: u32) -> EmbeddingMatrix {
    let values = (0..rows * cols)
        .map(|_| f64::from(rng.gen_range(0..levels)) / f64::from(levels))
        .collect();
    EmbeddingMatrix::new(rows, cols, values).expect("finite values")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let text = sample(&mut rng, 512, 32, 8);
    let vision = sample(&mut rng, 2048, 32, 1024);

    for cfg in [GaessConfig::default(), GaessConfig::new(64, 0.5, 1.5)?] {
        let est = estimate_gamma(&text, &vision, &cfg)?;
        println!(
            "K={:<3} h_txt={:.3} h_vis={:.3} gamma={:.4} (bounds {}..{})",
            cfg.bins(),
            est.text.h_bits,
            est.vision.h_bits,
            est.gamma,
            cfg.gamma_min(),
            cfg.gamma_max(),
        );
    }
    Ok(())
}
