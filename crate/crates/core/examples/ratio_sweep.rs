//! Cut-off ratio over growing boxes `v0 + u[0,1]^d` next to the limiting
//! constants. Large-u exponential rows stay finite through log scaling.

use perspective_gap::functions::FunctionSpec;
use perspective_gap::relaxation::{ratio_sweep, MuKind};

fn main() -> perspective_gap::Result<()> {
    let us = [10.0, 20.0, 40.0, 100.0, 300.0, 1000.0];
    let cases = [
        ("exp d=1, envelope", FunctionSpec::exp(vec![1.0])?, MuKind::ConcaveEnvelope),
        ("exp d=2, envelope", FunctionSpec::exp(vec![1.0, 1.0])?, MuKind::ConcaveEnvelope),
        ("exp d=2, constant", FunctionSpec::exp(vec![1.0, 1.0])?, MuKind::Constant),
        ("power q=2, constant", FunctionSpec::power(vec![1.0], 2.0)?, MuKind::Constant),
    ];
    for (name, f, mu) in &cases {
        println!("{name}");
        println!("  {:>6} {:>14} {:>14} {:>12}", "u", "ratio", "scaled", "limit");
        let v0 = vec![1.0; f.dim()];
        for row in ratio_sweep(f, *mu, &v0, &us)? {
            println!(
                "  {:>6} {:>14.6e} {:>14.6} {:>12}{}",
                row.u,
                row.ratio,
                row.scaled_ratio,
                row.theoretical.map(|t| format!("{t:.6}")).unwrap_or_default(),
                if row.asymptotic { "  (overflow)" } else { "" }
            );
        }
    }
    Ok(())
}
