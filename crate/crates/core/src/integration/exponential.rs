use super::power::chain_sums;
use super::{IntegralResult, Method};
use crate::error::{Error, Result};
use crate::functions::{check_genericity, scaled_exp_m1, ExpLinearForm, DEFAULT_GENERICITY_TOL};
use crate::geometry::{
    factorial_f64, kuhn_triangulate, nth_permutation, BoxDomain, Domain, SimplexDomain,
    ZonotopeDomain,
};
use crate::parallel::{ordered_sum, try_ordered_sum};
use crate::quadrature::integrate_adaptive;

/// Largest `d` for which the `z`-integral is expanded over all `2^d` subsets.
pub const SUBSET_EXPANSION_CAP: usize = 20;

// largest x with exp(x) finite
const EXP_LIMIT: f64 = 709.78;
const QUAD_REL_TOL: f64 = 1e-10;
// tolerated cancellation factor of the alternating subset sum
const SUBSET_LOSS_CAP: f64 = 1e5;

/// `(e^t − 1)/t`, with the limit 1 at `t = 0`.
pub fn phi1(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 + t * (0.5 + t * (1.0 / 6.0 + t / 24.0))
    } else {
        t.exp_m1() / t
    }
}

// ln φ1(t), finite for every finite t
fn ln_phi1(t: f64) -> f64 {
    if t > 1.0 {
        t + (-(-t).exp_m1()).ln() - t.ln()
    } else if t < -1.0 {
        (-t.exp_m1()).ln() - (-t).ln()
    } else {
        phi1(t).ln()
    }
}

// φ1(a)·e^{−s}
fn scaled_phi1(a: f64, s: f64) -> f64 {
    if a.abs() < 1e-4 {
        phi1(a) * (-s).exp()
    } else {
        scaled_exp_m1(a, s) / a
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(f: &ExpLinearForm, d: usize) -> Result<()> {
    if f.c().len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.c().len(),
        });
    }
    Ok(())
}

/// `∫_{[0,1]^n} e^{cᵀy} dy = Π_j (e^{c_j} − 1)/c_j`.
pub fn exp_cube_product(c: &[f64]) -> f64 {
    c.iter().map(|&cj| phi1(cj)).product()
}

/// The same integral summed cell by cell over Kuhn's triangulation, each cell
/// by its vertex formula `Σ_j e^{s_j} / Π_{k≠j} (s_j − s_k)`.
pub fn exp_cube_triangulation(c: &[f64]) -> Result<f64> {
    let n = c.len();
    check_genericity(c, DEFAULT_GENERICITY_TOL)?.into_result()?;
    let cells = kuhn_triangulate(n)?;
    try_ordered_sum(cells.len(), |idx| {
        let s = chain_sums(c, &nth_permutation(n, idx));
        Ok::<f64, Error>(brion_exp(&s))
    })
}

fn brion_exp(t: &[f64]) -> f64 {
    t.iter()
        .enumerate()
        .map(|(j, tj)| {
            let den: f64 = t
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, tk)| tj - tk)
                .product();
            tj.exp() / den
        })
        .sum()
}

// Σ_{m >= start} h_m(x)/(n+m)!, n = len − 1
fn exp_dd_series(x: &[f64], start: usize) -> f64 {
    let n = x.len() - 1;
    let mut h = vec![1.0; n + 1];
    let mut coeff = 1.0 / factorial_f64(n);
    let mut total = if start == 0 { coeff } else { 0.0 };
    let radius = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // C(n+m, n)·radius^m bounds |h_m|
    let mut reach = 1.0;
    for m in 1..600 {
        coeff /= (n + m) as f64;
        let mut prev = 0.0;
        for (k, v) in x.iter().enumerate() {
            h[k] = prev + v * h[k];
            prev = h[k];
        }
        total += coeff * h[n];
        reach *= (n + m) as f64 / m as f64 * radius;
        if coeff * reach <= 1e-17 * total.abs() {
            break;
        }
    }
    total
}

/// Divided difference of `exp` at the knots, minus `1/n!` (the divided
/// difference of `e^t − 1` scaled back to a plain integral).
fn exp_dd_minus_one(t: &[f64]) -> Result<f64> {
    let n = t.len() - 1;
    let max_abs = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs <= 4.0 {
        return Ok(exp_dd_series(t, 1));
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let offsets: Vec<f64> = t.iter().map(|v| v - mean).collect();
    let spread = offsets.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let inv = 1.0 / factorial_f64(n);
    if spread <= 2.0 {
        return Ok(mean.exp() * exp_dd_series(&offsets, 0) - inv);
    }
    for j in 0..t.len() {
        for k in j + 1..t.len() {
            if (t[j] - t[k]).abs() <= DEFAULT_GENERICITY_TOL * max_abs {
                return Err(Error::NotGeneric {
                    subset: vec![j, k],
                    sum: t[j] - t[k],
                });
            }
        }
    }
    Ok(brion_exp(t) - inv)
}

fn finite_or_range(value: f64, exponent: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Range { exponent })
    }
}

// cᵀv0 + Σ ln φ1(u c_j): log of ∫_box e^{cᵀx} dx / u^d
fn box_log(c: &[f64], b: &BoxDomain) -> f64 {
    dot(c, b.v0()) + c.iter().map(|&cj| ln_phi1(b.u() * cj)).sum::<f64>()
}

/// `∫_box (e^{cᵀx} − 1) dx = e^{cᵀv0} Π_j (e^{u c_j} − 1)/c_j − u^d`.
pub fn integrate_exp_box(f: &ExpLinearForm, b: &BoxDomain) -> Result<IntegralResult> {
    check_dim(f, b.dim())?;
    let log = box_log(f.c(), b);
    if log > EXP_LIMIT {
        return Err(Error::Range { exponent: log });
    }
    let value = finite_or_range(b.volume() * log.exp_m1(), log)?;
    Ok(IntegralResult::exact(value, Method::ProductFormula))
}

/// [`integrate_exp_box`] multiplied by `e^{−s}`, finite for any box.
pub(crate) fn integrate_exp_box_scaled(f: &ExpLinearForm, b: &BoxDomain, s: f64) -> f64 {
    b.volume() * scaled_exp_m1(box_log(f.c(), b), s)
}

/// `∫_Z (e^{cᵀx} − 1) dx = J e^{cᵀb} Π_j φ1(cᵀA_j) − J` with `J = sqrt(det(AᵀA))`.
pub fn integrate_exp_zonotope(f: &ExpLinearForm, z: &ZonotopeDomain) -> Result<IntegralResult> {
    check_dim(f, z.dim())?;
    let t = z.pull_back(f.c());
    let log = dot(f.c(), z.offset()) + t.iter().map(|&tj| ln_phi1(tj)).sum::<f64>();
    if log > EXP_LIMIT {
        return Err(Error::Range { exponent: log });
    }
    let value = finite_or_range(z.jacobian() * log.exp_m1(), log)?;
    Ok(IntegralResult::exact(value, Method::ProductFormula))
}

/// `∫_S (e^{cᵀx} − 1) dx = d!·vol(S)·Σ_j e^{t_j}/Π_{k≠j}(t_j − t_k) − vol(S)`,
/// `t_j` the form at the vertices.
pub fn integrate_exp_simplex(f: &ExpLinearForm, s: &SimplexDomain) -> Result<IntegralResult> {
    check_dim(f, s.dim())?;
    let t: Vec<f64> = s.vertices().iter().map(|v| dot(f.c(), v)).collect();
    let top = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = factorial_f64(s.dim()) * s.volume();
    let value = finite_or_range(scale * exp_dd_minus_one(&t)?, top)?;
    Ok(IntegralResult::exact(value, Method::TriangulationBrion))
}

/// `∫_Q (e^{cᵀx} − 1) dx` over any supported domain.
pub fn integrate_exp_domain(f: &ExpLinearForm, dom: &Domain) -> Result<IntegralResult> {
    match dom {
        Domain::Box(b) => integrate_exp_box(f, b),
        Domain::Zonotope(z) => integrate_exp_zonotope(f, z),
        Domain::Simplex(s) => integrate_exp_simplex(f, s),
    }
}

fn subset_expansion_usable(c: &[f64], u: f64) -> bool {
    let d = c.len();
    if d > SUBSET_EXPANSION_CAP || c.iter().any(|&cj| cj <= 0.0) {
        return false;
    }
    let shrink: f64 = c.iter().map(|&cj| (u * cj).min(1.0)).product();
    (1u64 << d) as f64 / shrink <= SUBSET_LOSS_CAP
}

/// `e^{−s}·∫₀¹ z^d ∫_box (e^{z cᵀx} − 1) dx dz`.
///
/// Uses the subset expansion
/// `(1/Π c_j) Σ_S (−1)^{d−|S|} φ1(a_S) − u^d/(d+1)`, `a_S = cᵀv0 + u Σ_{j∈S} c_j`,
/// when its cancellation is mild; adaptive quadrature in `z` otherwise.
pub(crate) fn z_integral_exp_box_scaled(
    f: &ExpLinearForm,
    b: &BoxDomain,
    s: f64,
) -> Result<IntegralResult> {
    check_dim(f, b.dim())?;
    let c = f.c();
    let d = b.dim();
    let u = b.u();
    let a0 = dot(c, b.v0());
    let tail = b.volume() / (d as f64 + 1.0) * (-s).exp();
    if subset_expansion_usable(c, u) {
        let sum = ordered_sum(1usize << d, |mask| {
            let a = a0
                + u * c
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .map(|(_, cj)| cj)
                    .sum::<f64>();
            let sign = if (d - mask.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * scaled_phi1(a, s)
        });
        let prod: f64 = c.iter().product();
        return Ok(IntegralResult::exact(sum / prod - tail, Method::SubsetExpansion));
    }
    let ud = b.volume();
    let g = |z: f64| {
        let log = z * a0 + c.iter().map(|&cj| ln_phi1(z * u * cj)).sum::<f64>();
        z.powi(d as i32) * ud * scaled_exp_m1(log, s)
    };
    let q = integrate_adaptive(g, 0.0, 1.0, QUAD_REL_TOL, 1e-300);
    Ok(IntegralResult::estimated(q.value, Method::Quadrature, q.error))
}

/// `∫₀¹ z^d ∫_box (e^{z cᵀx} − 1) dx dz`.
pub fn z_integral_exp(f: &ExpLinearForm, b: &BoxDomain) -> Result<IntegralResult> {
    check_dim(f, b.dim())?;
    let m = (dot(f.c(), b.v0()) + b.u() * f.c().iter().sum::<f64>()).max(0.0);
    let r = z_integral_exp_box_scaled(f, b, m)?;
    let scale = m.exp();
    Ok(IntegralResult {
        value: finite_or_range(r.value * scale, m)?,
        method: r.method,
        error_estimate: r.error_estimate.map(|e| e * scale),
    })
}

fn quad_result(g: impl Fn(f64) -> f64, log_top: f64) -> Result<IntegralResult> {
    let q = integrate_adaptive(g, 0.0, 1.0, QUAD_REL_TOL, 1e-300);
    let value = finite_or_range(q.value, log_top)?;
    Ok(IntegralResult::estimated(value, Method::Quadrature, q.error))
}

/// `∫₀¹ z^d ∫_Z (e^{z cᵀx} − 1) dx dz` by adaptive quadrature of the product
/// formula in `z`.
pub fn z_integral_exp_zonotope(f: &ExpLinearForm, z: &ZonotopeDomain) -> Result<IntegralResult> {
    check_dim(f, z.dim())?;
    let d = z.dim() as i32;
    let t = z.pull_back(f.c());
    let cb = dot(f.c(), z.offset());
    let jac = z.jacobian();
    let log_at = |zz: f64| zz * cb + t.iter().map(|&tj| ln_phi1(zz * tj)).sum::<f64>();
    let top = log_at(1.0).max(cb);
    if top > EXP_LIMIT {
        return Err(Error::Range { exponent: top });
    }
    quad_result(|zz| zz.powi(d) * jac * log_at(zz).exp_m1(), top)
}

/// `∫₀¹ z^d ∫_S (e^{z cᵀx} − 1) dx dz` by adaptive quadrature of the vertex
/// formula in `z`.
pub(crate) fn z_integral_exp_simplex(
    f: &ExpLinearForm,
    s: &SimplexDomain,
) -> Result<IntegralResult> {
    check_dim(f, s.dim())?;
    let d = s.dim() as i32;
    let t: Vec<f64> = s.vertices().iter().map(|v| dot(f.c(), v)).collect();
    let top = t.iter().cloned().fold(0.0f64, f64::max);
    if top > EXP_LIMIT {
        return Err(Error::Range { exponent: top });
    }
    exp_dd_minus_one(&t)?;
    let scale = factorial_f64(s.dim()) * s.volume();
    quad_result(
        |zz| {
            let tz: Vec<f64> = t.iter().map(|v| zz * v).collect();
            // knots coincide only at z = 0, where the weight vanishes
            zz.powi(d) * scale * exp_dd_minus_one(&tz).unwrap_or(0.0)
        },
        top,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn phi1_is_smooth_at_zero() {
        assert_eq!(phi1(0.0), 1.0);
        for t in [1e-12f64, -3e-5, 9.9e-5, 1.1e-4, 0.3, -2.0, 30.0] {
            let direct = if t.abs() > 1e-6 { t.exp_m1() / t } else { 1.0 + t / 2.0 };
            assert!(rel(phi1(t), direct) < 1e-12, "t={t}");
            assert!(rel(ln_phi1(t), phi1(t).ln()) < 1e-12 || phi1(t).ln().abs() < 1e-12);
        }
        assert!((ln_phi1(1000.0) - (1000.0 - 1000f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn product_formula_examples() {
        let f = ExpLinearForm::new(vec![1.0]).unwrap();
        let z = ZonotopeDomain::new(vec![vec![1.0]], vec![0.0]).unwrap();
        let v = integrate_exp_zonotope(&f, &z).unwrap().value;
        assert!((v - (E - 2.0)).abs() < 1e-15);
        let f2 = ExpLinearForm::new(vec![1.0, 1.0]).unwrap();
        let b = BoxDomain::new(vec![1.0, 1.0], 1.0).unwrap();
        let v = integrate_exp_box(&f2, &b).unwrap().value;
        let exact = E * E * (E - 1.0) * (E - 1.0) - 1.0;
        assert!(rel(v, exact) < 1e-14);
        assert!((v - 20.8155).abs() < 1e-3);
        let tiny = BoxDomain::new(vec![1.0, 1.0], 1e-12).unwrap();
        assert!(integrate_exp_box(&f2, &tiny).unwrap().value.abs() < 1e-20);
        let zb = integrate_exp_zonotope(&f2, &b.to_zonotope()).unwrap().value;
        assert!(rel(zb, v) < 1e-13);
    }

    #[test]
    fn overflow_is_a_range_error() {
        let f = ExpLinearForm::new(vec![1.0]).unwrap();
        let b = BoxDomain::new(vec![1.0], 900.0).unwrap();
        assert!(matches!(integrate_exp_box(&f, &b), Err(Error::Range { .. })));
        let scaled = integrate_exp_box_scaled(&f, &b, 901.0);
        // e^{-901}·(e^{901} − e)/1 ≈ 1
        assert!((scaled - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangulation_identity() {
        for c in [vec![0.5], vec![1.0, 2.0], vec![0.7, 1.3, 2.1], vec![0.9, 1.1, 1.7, 0.6, 1.4, 2.3]] {
            let lhs = exp_cube_triangulation(&c).unwrap();
            let rhs = exp_cube_product(&c);
            assert!(rel(lhs, rhs) < 1e-9, "{c:?}: {lhs} vs {rhs}");
        }
        assert!(matches!(
            exp_cube_triangulation(&[1.0, -1.0]),
            Err(Error::NotGeneric { .. })
        ));
    }

    #[test]
    fn z_integral_example() {
        let f = ExpLinearForm::new(vec![1.0]).unwrap();
        let b = BoxDomain::new(vec![1.0], 1.0).unwrap();
        let r = z_integral_exp(&f, &b).unwrap();
        let exact = (E * E - 1.0) / 2.0 - (E - 1.0) - 0.5;
        assert_eq!(r.method, Method::SubsetExpansion);
        assert!(rel(r.value, exact) < 1e-14);
        assert!((r.value - 0.97625).abs() < 1e-5);
        let tiny = BoxDomain::new(vec![1.0], 1e-9).unwrap();
        assert!(z_integral_exp(&f, &tiny).unwrap().value.abs() < 1e-8);
    }

    #[test]
    fn subset_expansion_matches_quadrature() {
        let cases = [
            (vec![0.8], vec![0.5], 2.0),
            (vec![1.0, 2.0], vec![1.0, 0.3], 1.5),
            (vec![0.4, 1.2, 0.9], vec![0.2, 0.7, 1.1], 3.0),
            (vec![1.1, 0.6, 1.9, 0.7, 1.3, 1.0], vec![0.5; 6], 2.0),
        ];
        for (c, v0, u) in cases {
            let f = ExpLinearForm::new(c.clone()).unwrap();
            let b = BoxDomain::new(v0, u).unwrap();
            let closed = z_integral_exp_box_scaled(&f, &b, 0.0).unwrap();
            assert_eq!(closed.method, Method::SubsetExpansion);
            let d = c.len();
            let a0 = dot(&c, b.v0());
            let g = |z: f64| {
                let log = z * a0 + c.iter().map(|&cj| ln_phi1(z * u * cj)).sum::<f64>();
                z.powi(d as i32) * b.volume() * log.exp_m1()
            };
            let quad = integrate_adaptive(g, 0.0, 1.0, 1e-13, 0.0).value;
            assert!(rel(closed.value, quad) < 1e-10, "{c:?}: {} vs {quad}", closed.value);
        }
    }

    #[test]
    fn small_boxes_fall_back_to_quadrature() {
        let f = ExpLinearForm::new(vec![1.0, 1.0, 1.0]).unwrap();
        let b = BoxDomain::new(vec![1.0; 3], 1e-3).unwrap();
        let r = z_integral_exp(&f, &b).unwrap();
        assert_eq!(r.method, Method::Quadrature);
        // f ≈ e^{3z}−1 on a box of volume 1e-9 near (z, z, z)
        let g = |z: f64| z.powi(3) * 1e-9 * (3.0 * z * (1.0 + 5e-4)).exp_m1();
        let approx = integrate_adaptive(g, 0.0, 1.0, 1e-12, 0.0).value;
        assert!(rel(r.value, approx) < 1e-6);
    }

    #[test]
    fn simplex_vertex_formula() {
        let f = ExpLinearForm::new(vec![1.0, 2.0]).unwrap();
        let s = SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let unit = integrate_exp_simplex(&f, &s).unwrap().value;
        let exact = 0.5 * (E - 1.0) * (E - 1.0) - 0.5;
        assert!(rel(unit, exact) < 1e-14, "{unit} vs {exact}");
        // far from the origin: clustered knots
        let far = SimplexDomain::new(vec![vec![5.0, 5.0], vec![5.5, 5.0], vec![5.0, 5.5]]).unwrap();
        let v = integrate_exp_simplex(&f, &far).unwrap().value;
        // ∫ over the triangle of e^{x+2y}: shift of the unit case by (5,5), scaled by 1/2
        let inner = {
            let t = [0.0, 0.5, 1.0];
            brion_exp(&t)
        };
        let exact = 2.0 * 0.125 * (15f64).exp() * inner - 0.125;
        assert!(rel(v, exact) < 1e-12, "{v} vs {exact}");
        // series check:
        // e^{zt} − 1 = Σ_{k≥1} z^k t^k/k!, and ∫_S (x+2y)^k = DD[t^{k+2}]/((k+1)(k+2))
        let series: f64 = (1..60)
            .map(|k| {
                let dd = (2f64.powi(k + 2) - 2.0) / 2.0; // DD of t^{k+2} at 0, 1, 2
                let moment = dd / ((k + 1) as f64 * (k + 2) as f64);
                moment / (1..=k).map(f64::from).product::<f64>() / (k + 3) as f64
            })
            .sum();
        let z = z_integral_exp_simplex(&f, &s).unwrap();
        assert!(rel(z.value, series) < 1e-9, "{} vs {series}", z.value);
    }
}
