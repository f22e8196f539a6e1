//! `∫ (e^{cᵀx} − 1)` by the product formula and by summing Brion vertex
//! terms over the Kuhn cells.

use perspective_gap::functions::ExpLinearForm;
use perspective_gap::geometry::{BoxDomain, SimplexDomain};
use perspective_gap::integration::{
    exp_cube_product, exp_cube_triangulation, integrate_exp_box, integrate_exp_simplex,
    z_integral_exp,
};

fn main() -> perspective_gap::Result<()> {
    for c in [vec![1.0, 2.0], vec![0.4, 0.9, 1.3, 2.2, 3.1]] {
        let product = exp_cube_product(&c);
        let brion = exp_cube_triangulation(&c)?;
        println!("c = {c:?}\n  product {product:.15}\n  Brion   {brion:.15}");
    }
    match exp_cube_triangulation(&[1.0, 2.0, -3.0]) {
        Err(e) => println!("non-generic c refused: {e}"),
        Ok(v) => println!("unexpected value {v}"),
    }

    let f = ExpLinearForm::new(vec![1.0, 1.0])?;
    let b = BoxDomain::new(vec![1.0, 1.0], 1.0)?;
    let r = integrate_exp_box(&f, &b)?;
    println!("box [1,2]^2: {} via {}", r.value, r.method);
    println!("z-weighted integral: {}", z_integral_exp(&f, &b)?.value);

    let s = SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let g = ExpLinearForm::new(vec![1.0, 2.0])?;
    let r = integrate_exp_simplex(&g, &s)?;
    println!("unit triangle: {} via {}", r.value, r.method);
    Ok(())
}
