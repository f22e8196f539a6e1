//! Volumes of the perspective and naive relaxations, the cut-off amount and
//! ratio, with the trace of closed forms used.

use perspective_gap::functions::FunctionSpec;
use perspective_gap::geometry::{BoxDomain, Domain, SimplexDomain};
use perspective_gap::relaxation::{
    delta, delta_exp_box, delta_homogeneous, relaxation_report, MuKind,
};

fn main() -> perspective_gap::Result<()> {
    let square = FunctionSpec::power(vec![1.0], 2.0)?;
    let unit: Domain = BoxDomain::new(vec![1.0], 1.0)?.into();
    for mu in [MuKind::ConcaveEnvelope, MuKind::Constant] {
        let r = relaxation_report(&square, mu, &unit)?;
        println!("{}", serde_json::to_string(&r).expect("report serializes"));
    }
    println!(
        "Δ = {} (generic) = {} (homogeneous)",
        delta(&square, &unit)?,
        delta_homogeneous(&square, &unit)?
    );

    let e = FunctionSpec::exp(vec![1.0, 0.5])?;
    let b = BoxDomain::new(vec![0.5, 1.0], 2.0)?;
    if let FunctionSpec::Exp(form) = &e {
        println!("exp Δ = {} (generic) = {} (closed form)", delta(&e, &b.clone().into())?, delta_exp_box(form, &b)?);
    }

    let tri: Domain = SimplexDomain::new(vec![vec![1.0, 1.0], vec![2.0, 1.0], vec![1.0, 3.0]])?.into();
    let r = relaxation_report(&FunctionSpec::power(vec![1.0, 1.0], 3.0)?, MuKind::ConcaveEnvelope, &tri)?;
    println!("triangle: ratio {:.6} via {:?}", r.ratio, r.formula_trace);
    Ok(())
}
