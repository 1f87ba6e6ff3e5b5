//! Collapses every image to a single placeholder token and expands it back.

use omega_pe::{apply_phi, build_sequence, Modality, SequenceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = build_sequence(&SequenceSpec::new().text(1).image(2, 3).text(2).image(1, 2))?;
    let sub = apply_phi(&seq);

    let layout: String = sub
        .tokens
        .iter()
        .map(|t| match t.modality {
            Modality::Text => 'T',
            Modality::Placeholder => 'P',
            Modality::Visual => 'V',
        })
        .collect();
    println!(
        "{} tokens collapse to {} : {layout}",
        seq.len(),
        sub.tokens.len()
    );

    for entry in &sub.map.entries {
        println!(
            "placeholder at {} stands for image {} ({} patches starting at {})",
            entry.placeholder_pos,
            entry.image_id.0,
            entry.visual_positions.len(),
            entry.visual_positions[0],
        );
    }

    let restored = sub.map.expand(&sub.tokens, seq.grids())?;
    assert_eq!(restored.as_slice(), seq.tokens());
    println!("expansion restores the original sequence");
    Ok(())
}
