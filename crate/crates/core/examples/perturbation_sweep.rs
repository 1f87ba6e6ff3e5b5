//! Measures how far the attention scores move when visual indices are
//! shuffled, for MSPE and for 1D.

use omega_pe::{
    build_sequence, run_sweep, IndexStrategy, RotaryConfig, SequenceSpec, SweepConfig, SweepGrid,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = build_sequence(&SequenceSpec::new().text(4).image(4, 4).text(4))?;
    let cfg = SweepConfig {
        grid: SweepGrid::Shuffle {
            proportions: vec![0.0, 0.25, 0.5, 1.0],
        },
        trials: 16,
        seed: 2024,
        rotary: RotaryConfig::with_head_dim(32)?,
    };

    for strategy in [IndexStrategy::Mspe, IndexStrategy::OneD] {
        let rows = run_sweep(&seq, &strategy, &cfg)?;
        println!("{}", strategy.tag());
        for level in rows.chunk_by(|a, b| a.level == b.level) {
            let mean = level.iter().map(|r| r.divergence).sum::<f64>() / level.len() as f64;
            println!("  p={:<5} mean divergence {mean:.4}", level[0].level);
        }
    }
    Ok(())
}
