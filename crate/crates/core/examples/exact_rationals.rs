//! Relaxation volumes of integer powers in exact rational arithmetic.

use num::{BigInt, BigRational};
use perspective_gap::relaxation::{power_box_report_exact, MuKind};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn main() -> perspective_gap::Result<()> {
    for mu in [MuKind::ConcaveEnvelope, MuKind::Constant] {
        let rep = power_box_report_exact(&[r(1, 1)], 2, &[r(1, 1)], &r(1, 1), mu)?;
        println!(
            "x² on [1,2], {mu}: volP = {}  volP⁰ = {}  Δ = {}  ratio = {}",
            rep.vol_p, rep.vol_p0, rep.delta, rep.ratio
        );
    }
    let rep = power_box_report_exact(&[r(1, 2), r(3, 1)], 3, &[r(1, 1), r(1, 3)], &r(5, 2), MuKind::ConcaveEnvelope)?;
    println!("(x/2 + 3y)³ on [1,7/2]×[1/3,17/6]: ratio = {}", rep.ratio);
    Ok(())
}
