//! Full pipeline: embeddings to gamma, gamma to indices, indices to an
//! index table on stdout.

use omega_pe::io::write_index_csv;
use omega_pe::{
    build_sequence, derive_omega, estimate_gamma, EmbeddingMatrix, GaessConfig, SequenceSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // One bit per dimension for text, four for vision: gamma = sqrt(4 / 1) = 2.
    let text = EmbeddingMatrix::from_rows(&[[0.0], [1.0]])?;
    let vision = EmbeddingMatrix::from_rows(&(0..16).map(|i| [f64::from(i)]).collect::<Vec<_>>())?;

    let cfg = GaessConfig::default();
    let gamma = estimate_gamma(&text, &vision, &cfg)?.gamma;

    let seq = build_sequence(&SequenceSpec::new().text(3).image(2, 2).text(2))?;
    let assignment = derive_omega(&seq, gamma, &cfg)?;
    print!("{}", write_index_csv(&assignment));
    Ok(())
}
