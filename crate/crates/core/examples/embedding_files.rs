use omega_pe::io::{decode_emb1, encode_emb1, parse_embedding_csv, write_embedding_csv};
use omega_pe::{embedding_entropy, EmbeddingMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = EmbeddingMatrix::from_rows(&[[0.5, -1.0, 2.0], [1.5, -1.0, 0.0], [2.5, -1.0, 4.0]])?;

    let bytes = encode_emb1(&z);
    println!("EMB1: {} bytes, header {:02x?}", bytes.len(), &bytes[..12]);
    let back = decode_emb1(&bytes)?;
    assert_eq!(back, z);

    let csv = write_embedding_csv(&z);
    print!("CSV:\n{csv}");
    assert_eq!(parse_embedding_csv(&csv)?, z);

    let report = embedding_entropy(&z, 4)?;
    println!(
        "entropy per dimension {:?}, mean {}",
        report.per_dim, report.h_bits
    );

    match decode_emb1(b"EMB1\x02\0\0\0") {
        Err(e) => println!("short file rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
