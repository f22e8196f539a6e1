use std::cell::RefCell;

use super::{IntegralResult, Method};
use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::geometry::{factorial_f64, Domain};
use crate::quadrature::tensor_gauss_legendre;

/// Default Gauss–Legendre points per axis; the reported value uses twice as
/// many and the difference serves as error estimate.
pub const TENSOR_ORDER: usize = 20;

// budget of integrand evaluations for the finer rule
const POINT_CAP: f64 = 2e7;

// Parameter point → (domain point, Jacobian of the parameterisation).
// Simplices use the collapsed (Duffy) coordinates
// λ_i = y_i·Π_{j<i}(1 − y_j), Jacobian Π_i (1 − y_i)^{d−1−i}.
fn pull(dom: &Domain, y: &[f64]) -> (Vec<f64>, f64) {
    match dom {
        Domain::Simplex(s) => {
            let v = s.vertices();
            let mut x = v[0].clone();
            let mut rest = 1.0;
            let mut jac = 1.0;
            let d = y.len();
            for (i, &yi) in y.iter().enumerate() {
                let lambda = rest * yi;
                for (xk, (a, b)) in x.iter_mut().zip(v[i + 1].iter().zip(&v[0])) {
                    *xk += lambda * (a - b);
                }
                jac *= (1.0 - yi).powi((d - 1 - i) as i32);
                rest *= 1.0 - yi;
            }
            (x, jac)
        }
        _ => (dom.map_from_cube(y), 1.0),
    }
}

fn measure_scale(dom: &Domain) -> f64 {
    match dom {
        Domain::Simplex(s) => factorial_f64(s.dim()) * s.volume(),
        _ => dom.volume(),
    }
}

fn rule<G>(dom: &Domain, order: usize, z_weight: bool, g: &G) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    let k = dom.param_dim();
    let d = dom.dim() as i32;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let total = tensor_gauss_legendre(
        |y| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let (cube, z) = if z_weight { (&y[..k], y[k]) } else { (y, 1.0) };
            let (mut x, jac) = pull(dom, cube);
            if z_weight {
                x.iter_mut().for_each(|v| *v *= z);
            }
            match g(&x) {
                Ok(val) => z.powi(if z_weight { d } else { 0 }) * jac * val,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        k + usize::from(z_weight),
        order,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(total * measure_scale(dom)),
    }
}

/// Tensor Gauss–Legendre approximation of `∫_Q g` (or of
/// `∫₀¹ z^d ∫_Q g(z·x) dx dz` when `z_weight` is set).
pub(crate) fn tensor_function<G>(
    g: G,
    dom: &Domain,
    order: usize,
    z_weight: bool,
) -> Result<IntegralResult>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    let dim = dom.param_dim() + usize::from(z_weight);
    let affordable = (POINT_CAP.powf(1.0 / dim as f64) / 2.0).floor() as usize;
    let order = order.min(affordable);
    if order < 3 {
        return Err(Error::CombinatorialBlowup {
            what: "tensor quadrature",
            n: dim,
            count: format!("(2·3)^{dim} points"),
            cap: POINT_CAP as usize,
        });
    }
    let coarse = rule(dom, order, z_weight, &g)?;
    let fine = rule(dom, 2 * order, z_weight, &g)?;
    Ok(IntegralResult::estimated(fine, Method::Quadrature, (fine - coarse).abs()))
}

/// `∫_Q f(x) dx` by tensor Gauss–Legendre quadrature.
pub fn tensor_integrate(f: &FunctionSpec, dom: &Domain, order: usize) -> Result<IntegralResult> {
    tensor_function(|x| f.evaluate(x), dom, order, false)
}

/// `∫₀¹ z^d ∫_Q f(z·x) dx dz` by tensor Gauss–Legendre quadrature.
pub fn tensor_z_integral(f: &FunctionSpec, dom: &Domain, order: usize) -> Result<IntegralResult> {
    tensor_function(|x| f.evaluate(x), dom, order, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxDomain, SimplexDomain};

    #[test]
    fn polynomials_are_exact() {
        let f = FunctionSpec::power(vec![1.0], 2.0).unwrap();
        let b: Domain = BoxDomain::new(vec![1.0], 1.0).unwrap().into();
        let r = tensor_integrate(&f, &b, 4).unwrap();
        assert!((r.value - 7.0 / 3.0).abs() < 1e-14);
        let z = tensor_z_integral(&f, &b, 4).unwrap();
        assert!((z.value - 7.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_collapsed_coordinates() {
        let f = FunctionSpec::power(vec![1.0, 2.0], 2.0).unwrap();
        let s: Domain =
            SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap().into();
        let r = tensor_integrate(&f, &s, 6).unwrap();
        assert!((r.value - 7.0 / 12.0).abs() < 1e-13, "{}", r.value);
        let tet: Domain = SimplexDomain::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![1.0, 3.0, 0.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap()
        .into();
        let one = tensor_function(|_| Ok(1.0), &tet, 4, false).unwrap();
        assert!((one.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn superpoly_matches_antiderivative_free_check() {
        // g(t) = e^{ln(1+t)^2} − 1; on [0, e−1] substitute s = ln(1+t):
        // ∫ = ∫₀¹ e^{s²+s} ds − (e − 1)
        let f = FunctionSpec::superpoly(vec![1.0]).unwrap();
        let b: Domain = BoxDomain::new(vec![1e-300], std::f64::consts::E - 1.0).unwrap().into();
        let r = tensor_integrate(&f, &b, TENSOR_ORDER).unwrap();
        let reference = crate::quadrature::integrate_adaptive(
            |s: f64| (s * s + s).exp(),
            0.0,
            1.0,
            1e-14,
            0.0,
        )
        .value
            - (std::f64::consts::E - 1.0);
        assert!((r.value - reference).abs() < 1e-12, "{} vs {reference}", r.value);
    }

    #[test]
    fn errors_propagate() {
        let f = FunctionSpec::superpoly(vec![1.0]).unwrap();
        let neg: Domain = crate::geometry::ZonotopeDomain::new(vec![vec![1.0]], vec![-2.0])
            .unwrap()
            .into();
        assert!(matches!(tensor_integrate(&f, &neg, 4), Err(Error::DomainViolation(_))));
    }
}
