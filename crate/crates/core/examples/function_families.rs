//! The three function families: evaluation, the JSON wire format and the
//! structural checks the integrators rely on.

use perspective_gap::functions::{check_genericity, is_supermodular_on_vertices, FunctionSpec};
use perspective_gap::geometry::BoxDomain;

fn main() -> perspective_gap::Result<()> {
    let specs = [
        r#"{"kind":"power","c":[1.0,2.0],"q":2.5}"#,
        r#"{"kind":"exp","c":[0.5,1.5]}"#,
        r#"{"kind":"superpoly","c":[1.0,1.0]}"#,
    ];
    let x = [1.0, 2.0];
    let b = BoxDomain::new(vec![0.5, 0.5], 3.0)?;
    for s in specs {
        let f: FunctionSpec = serde_json::from_str(s).expect("valid spec");
        println!(
            "{:<9} f({x:?}) = {:<22} homogeneous degree {:?}, supermodular on box: {}",
            f.family(),
            f.evaluate(&x)?,
            f.homogeneity_degree(),
            is_supermodular_on_vertices(&f, &b)?
        );
    }

    // exact cancellation in a subset of c breaks the vertex formulas
    for c in [vec![1.0, 2.0, 4.0], vec![1.0, -1.0], vec![2.0, 1.0, -3.0]] {
        println!("c = {c:?}: {:?}", check_genericity(&c, 1e-12)?);
    }

    let bad = serde_json::from_str::<FunctionSpec>(r#"{"kind":"power","c":[1.0],"q":0.5}"#);
    println!("q = 0.5 rejected: {}", bad.unwrap_err());
    Ok(())
}
