//! `∫ (cᵀx)^q` over boxes, zonotopes and simplices by the multinomial
//! expansion and by Kuhn triangulation, in floating point and exactly.

use num::{BigInt, BigRational};
use perspective_gap::functions::PowerLinearForm;
use perspective_gap::geometry::{BoxDomain, Domain, SimplexDomain, ZonotopeDomain};
use perspective_gap::integration::{
    integrate_all_one_power, integrate_power_domain_with, integrate_power_multinomial,
    integrate_power_multinomial_exact, integrate_power_triangulation, PowerRoute,
};

fn main() -> perspective_gap::Result<()> {
    let c = [0.3, 1.1, 0.7, 1.9];
    for q in [2.0, 3.0, 5.0] {
        let m = integrate_power_multinomial(&c, q)?;
        let t = integrate_power_triangulation(&c, q)?;
        println!("q = {q}: multinomial {m:.15}  triangulation {t:.15}");
    }
    // fractional exponents only go through the triangulation
    println!("q = 2.5: {:.15}", integrate_power_triangulation(&c, 2.5)?);

    let one = BigRational::from_integer(BigInt::from(1));
    let exact = integrate_power_multinomial_exact(&[one.clone(), one], 2)?;
    println!("∫_[0,1]^2 (x+y)^2 = {exact}");
    println!("∫_[0,1]^4 (Σx)^3 = {}", integrate_all_one_power(4, 3));

    let f = PowerLinearForm::new(vec![1.0, 2.0], 3.0)?;
    let domains: [(&str, Domain); 3] = [
        ("box", BoxDomain::new(vec![1.0, 0.5], 2.0)?.into()),
        (
            "zonotope",
            ZonotopeDomain::new(vec![vec![1.0, 0.5], vec![0.25, 1.0]], vec![0.5, 0.5])?
                .into(),
        ),
        (
            "simplex",
            SimplexDomain::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.5]])?.into(),
        ),
    ];
    for (name, dom) in &domains {
        let tri = integrate_power_domain_with(&f, dom, PowerRoute::Triangulation)?;
        let line = match integrate_power_domain_with(&f, dom, PowerRoute::Multinomial) {
            Ok(m) => format!("multinomial {:.12}", m.value),
            Err(e) => format!("multinomial n/a ({e})"),
        };
        println!("{name:<9} {} {:.12}  {line}", tri.method, tri.value);
    }
    Ok(())
}
