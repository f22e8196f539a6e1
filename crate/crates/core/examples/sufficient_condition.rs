//! `r(u) = ∫f / ∫μ` over growing boxes: when it falls toward zero the cut-off
//! ratio vanishes. Exponential and super-polynomial forms fall, powers settle.

use perspective_gap::functions::FunctionSpec;
use perspective_gap::relaxation::{check_sufficient_condition, MuKind, DEFAULT_TREND_THRESHOLD};

fn main() -> perspective_gap::Result<()> {
    let us = [5.0, 10.0, 20.0, 40.0];
    let fs = [
        FunctionSpec::exp(vec![1.0, 1.0])?,
        FunctionSpec::superpoly(vec![1.0, 1.0])?,
        FunctionSpec::power(vec![1.0, 1.0], 2.0)?,
    ];
    for f in &fs {
        let t = check_sufficient_condition(f, MuKind::Constant, &[1.0, 1.0], &us, DEFAULT_TREND_THRESHOLD)?;
        let rs: Vec<String> = t.points.iter().map(|p| format!("{:.3e}", p.r)).collect();
        println!(
            "{:<9} r = [{}] decreasing {} satisfied {}",
            f.family(),
            rs.join(", "),
            t.decreasing,
            t.satisfied
        );
    }
    Ok(())
}
