// Exact threshold arithmetic on instruction counts.

use sizeprobe::model::{threshold_exceeded, Fraction};

pub fn run_example() -> sizeprobe::Result<()> {
    let ten = Fraction::from_decimal("0.10").expect("decimal");
    for (offender, baseline) in [(110, 100), (111, 100), (34, 25), (1, 0)] {
        match threshold_exceeded(offender, baseline, ten) {
            Ok(hit) => println!("{offender} vs {baseline} at {}: {hit}", ten.as_percent()),
            Err(e) => println!("{offender} vs {baseline}: {e}"),
        }
    }
    assert!(!threshold_exceeded(110, 100, ten)?);
    assert!(threshold_exceeded(34, 25, ten)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
