//! Concave envelope of a supermodular function on a box: one affine piece
//! per Kuhn cell, interpolating f at the cell's vertices.

use perspective_gap::envelope::{concave_envelope, constant_bound, integrate_envelope};
use perspective_gap::functions::FunctionSpec;
use perspective_gap::geometry::BoxDomain;

fn main() -> perspective_gap::Result<()> {
    let f = FunctionSpec::power(vec![1.0, 2.0], 2.0)?;
    let b = BoxDomain::new(vec![1.0, 1.0], 1.0)?;
    let env = concave_envelope(&f, &b)?;
    for p in env.pieces() {
        println!(
            "cell {:?}: μ(x) = {:?}·x + {}",
            p.permutation, p.gradient, p.offset
        );
    }
    let mid = [1.5, 1.5];
    println!("f{mid:?} = {}  envelope = {}", f.evaluate(&mid)?, env.evaluate(&mid)?);
    println!(
        "∫ envelope: subset sum {}  per cell {}",
        integrate_envelope(&f, &b)?,
        env.integrate_by_cells()
    );
    println!("constant bound max f = {}", constant_bound(&f, &b)?.value);
    println!("{}", serde_json::to_string_pretty(env.pieces()).expect("pieces serialize"));

    let outside = env.evaluate(&[0.0, 1.0]);
    println!("outside the box: {}", outside.unwrap_err());
    Ok(())
}
