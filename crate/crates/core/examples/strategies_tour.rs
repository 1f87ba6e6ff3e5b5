//! Prints the index every strategy assigns to a short interleaved sequence.
//!
//! ```text
//! cargo run --example strategies_tour
//! ```

use omega_pe::{
    build_sequence, derive, GaessConfig, IndexStrategy, Modality, SequenceSpec, V2peConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = build_sequence(&SequenceSpec::new().text(2).image(2, 2).text(1))?;

    let strategies = [
        IndexStrategy::NoPe,
        IndexStrategy::OneD,
        IndexStrategy::TwoD,
        IndexStrategy::Mipe,
        IndexStrategy::V2pe(V2peConfig::new(0.25)?),
        IndexStrategy::Mspe,
        IndexStrategy::Omega {
            gamma: 1.5,
            bounds: GaessConfig::default(),
        },
    ];

    for strategy in &strategies {
        let assignment = derive(&seq, strategy)?;
        println!("{}", strategy.tag());
        for e in &assignment.entries {
            let m = match e.modality {
                Modality::Text => "T",
                _ => "V",
            };
            println!(
                "  {:>2} {m}  ({}, {}, {})",
                e.seq_pos, e.index.s, e.index.r, e.index.c
            );
        }
    }
    Ok(())
}
