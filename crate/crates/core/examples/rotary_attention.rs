//! Scores a query against keys at several offsets and shows that only the
//! relative position matters, per axis.

use omega_pe::{attention_logit, HeadVector, PositionIndex3, RotaryConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RotaryConfig::new(16, (4, 2, 2), 10_000.0)?;
    let q = HeadVector::new((0..16).map(|i| ((i as f64) * 0.37).sin()).collect());
    let k = HeadVector::new((0..16).map(|i| ((i as f64) * 0.91).cos()).collect());

    let origin = PositionIndex3::new(5.0, 0.0, 0.0);
    println!("{:>12} {:>12} {:>12}", "offset", "logit", "shifted");
    for d in [1.0, 2.0, 4.0, 8.0] {
        for delta in [
            PositionIndex3::new(d, 0.0, 0.0),
            PositionIndex3::new(0.0, d, 0.0),
        ] {
            let at = attention_logit(&q, &k, &origin, &(origin + delta), &cfg)?;
            let far = PositionIndex3::new(100.0, 7.0, 3.0);
            let shifted = attention_logit(&q, &k, &far, &(far + delta), &cfg)?;
            let label = format!("({}, {}, {})", delta.s, delta.r, delta.c);
            println!("{label:>12} {at:>12.6} {shifted:>12.6}");
        }
    }
    Ok(())
}
