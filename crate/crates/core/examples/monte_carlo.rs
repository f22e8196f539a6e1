//! Seeded Monte Carlo and tensor Gauss–Legendre estimates next to the closed
//! forms. The Monte Carlo value does not depend on the thread count.

use perspective_gap::functions::FunctionSpec;
use perspective_gap::geometry::{BoxDomain, Domain};
use perspective_gap::integration::{
    integrate_function, monte_carlo_integrate, tensor_integrate, TENSOR_ORDER,
};
use perspective_gap::parallel::with_threads;

fn main() -> perspective_gap::Result<()> {
    let dom: Domain = BoxDomain::new(vec![0.5, 0.5, 0.5], 1.5)?.into();
    let fs = [
        FunctionSpec::power(vec![1.0, 2.0, 0.5], 3.0)?,
        FunctionSpec::exp(vec![0.5, 0.25, 1.0])?,
        FunctionSpec::superpoly(vec![1.0, 1.0, 1.0])?,
    ];
    for f in &fs {
        let exact = integrate_function(f, &dom)?;
        let mc = monte_carlo_integrate(f, &dom, 400_000, 42)?;
        let gl = tensor_integrate(f, &dom, TENSOR_ORDER)?;
        let se = mc.error_estimate.unwrap_or(f64::NAN);
        println!(
            "{:<9} {:<20} {:.10}\n          monte carlo          {:.10} ± {se:.2e} ({:+.2} SE)\n          tensor GL            {:.10}",
            f.family(),
            exact.method.to_string(),
            exact.value,
            mc.value,
            (mc.value - exact.value) / se,
            gl.value
        );
    }

    let f = &fs[1];
    let one = with_threads(1, || monte_carlo_integrate(f, &dom, 100_000, 7))?;
    let many = with_threads(4, || monte_carlo_integrate(f, &dom, 100_000, 7))?;
    println!("1 thread {} / 4 threads {}", one.value, many.value);
    Ok(())
}
