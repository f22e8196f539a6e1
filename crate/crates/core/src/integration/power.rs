use num::BigRational;

use super::{IntegralResult, Method, Scalar};
use crate::error::{Error, Result};
use crate::functions::{check_genericity, PowerLinearForm, DEFAULT_GENERICITY_TOL};
use crate::geometry::{factorial_f64, kuhn_triangulate, nth_permutation, Domain};
use crate::parallel::try_ordered_sum;

/// Largest number of monomials the multinomial expansion will enumerate.
pub const MONOMIAL_CAP: u128 = 5_000_000;

/// Closed form used for `∫ (cᵀx)^q` over a box or zonotope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerRoute {
    /// Multinomial expansion with iterated monomial integrals (integer `q`).
    Multinomial,
    /// Kuhn triangulation with the vertex (Brion) formula on every cell.
    Triangulation,
}

fn integer_exponent(q: f64) -> Result<u32> {
    if !(q.is_finite() && q.fract() == 0.0 && q >= 1.0 && q <= u32::MAX as f64) {
        return Err(Error::NonIntegerExponent(q));
    }
    Ok(q as u32)
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `∫_{[0,1]^n} (cᵀy + shift)^q dy` by the multinomial theorem:
/// `q! Σ_{α0 + |α| = q} shift^{α0}/α0! · Π c_j^{α_j}/(α_j + 1)!`.
///
/// Exact when `T` is an exact field.
pub fn shifted_power_multinomial<T: Scalar>(c: &[T], shift: &T, q: u32) -> Result<T> {
    let n = c.len();
    let shifted = !shift.is_zero();
    let slots = n + usize::from(shifted);
    if slots == 0 {
        // no coefficients and no shift: the integrand is 0^q
        return Ok(if q == 0 { T::one() } else { T::zero() });
    }
    let count = binomial(q as u128 + slots as u128 - 1, slots as u128 - 1);
    if count > MONOMIAL_CAP {
        return Err(Error::CombinatorialBlowup {
            what: "multinomial expansion",
            n,
            count: format!("C({}, {}) = {count} monomials", q as usize + slots - 1, slots - 1),
            cap: MONOMIAL_CAP as usize,
        });
    }
    let qs = q as usize;
    // table[j][k] = c_j^k / (k+1)!
    let table: Vec<Vec<T>> = c
        .iter()
        .map(|cj| {
            let mut row = Vec::with_capacity(qs + 1);
            let mut power = T::one();
            let mut fact = T::one();
            for k in 0..=qs {
                fact = fact * T::from_count(k as u64 + 1);
                row.push(power.clone() / fact.clone());
                power = power * cj.clone();
            }
            row
        })
        .collect();
    let shift_table: Vec<T> = {
        let mut row = Vec::with_capacity(qs + 1);
        let mut power = T::one();
        let mut fact = T::one();
        for k in 0..=qs {
            if k > 0 {
                fact = fact * T::from_count(k as u64);
            }
            row.push(power.clone() / fact.clone());
            power = power * shift.clone();
        }
        row
    };

    fn walk<T: Scalar>(
        j: usize,
        remaining: usize,
        acc: T,
        table: &[Vec<T>],
        shift_table: &[T],
        shifted: bool,
        total: &mut T,
    ) {
        if j == table.len() {
            if shifted {
                *total = total.clone() + acc * shift_table[remaining].clone();
            } else if remaining == 0 {
                *total = total.clone() + acc;
            }
            return;
        }
        if j + 1 == table.len() && !shifted {
            let term = acc * table[j][remaining].clone();
            *total = total.clone() + term;
            return;
        }
        for k in 0..=remaining {
            let next = acc.clone() * table[j][k].clone();
            walk(j + 1, remaining - k, next, table, shift_table, shifted, total);
        }
    }

    let mut total = T::zero();
    walk(0, qs, T::one(), &table, &shift_table, shifted, &mut total);
    Ok(total * T::factorial(q))
}

/// `∫_{[0,1]^n} (cᵀy)^q dy` for integer `q >= 1` by the multinomial theorem.
pub fn integrate_power_multinomial(c: &[f64], q: f64) -> Result<f64> {
    let q = integer_exponent(q)?;
    shifted_power_multinomial(c, &0.0, q)
}

/// Exact rational value of `∫_{[0,1]^n} (cᵀy)^q dy`.
pub fn integrate_power_multinomial_exact(c: &[BigRational], q: u32) -> Result<BigRational> {
    if q == 0 {
        return Err(Error::NonIntegerExponent(0.0));
    }
    shifted_power_multinomial(c, &BigRational::from_integer(0.into()), q)
}

/// Divided difference of `t ↦ t^{q+n}` at the knots `shift + s_j`, i.e. the
/// Brion vertex sum `Σ_j (shift + s_j)^{q+n} / Π_{k≠j} (s_j − s_k)`.
///
/// When the knots cluster far from zero relative to their spread, the sum is
/// evaluated by its Taylor expansion about the knot mean
/// (`Σ_m C(q+n, n+m)·center^{q−m}·h_m(offsets)`), which avoids the
/// cancellation of the vertex formula.
fn power_divided_difference(s: &[f64], shift: f64, q: f64) -> Result<f64> {
    let n = s.len() - 1;
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let center = shift + mean;
    let spread = s.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    let exponent = q + n as f64;
    let integer = exponent.fract() == 0.0;

    if center > 0.0 && spread <= 0.5 * center {
        let offsets: Vec<f64> = s.iter().map(|v| v - mean).collect();
        // h[k] holds the complete homogeneous polynomial h_m over the first
        // k+1 offsets; advanced one degree per iteration.
        let mut h = vec![1.0; n + 1];
        let mut coeff = center.powf(q)
            * (1..=n).map(|k| (q + k as f64) / k as f64).product::<f64>();
        let mut total = coeff;
        // C(n+j, n)·spread^j bounds |h_j|
        let mut reach = 1.0;
        for m in 0..400usize {
            let ratio = (q - m as f64) / ((n + m + 1) as f64 * center);
            if ratio == 0.0 {
                break;
            }
            coeff *= ratio;
            let mut prev = 0.0;
            for (k, x) in offsets.iter().enumerate() {
                h[k] = prev + x * h[k];
                prev = h[k];
            }
            total += coeff * h[n];
            reach *= (n + m + 1) as f64 / (m + 1) as f64 * spread;
            if (coeff * reach).abs() <= 1e-17 * total.abs() {
                break;
            }
        }
        return Ok(total);
    }

    let mut total = 0.0;
    for (j, sj) in s.iter().enumerate() {
        let t = shift + sj;
        if t < 0.0 && !integer {
            return Err(Error::NegativeBase {
                base: t,
                exponent: q,
            });
        }
        let num = if integer {
            t.powi(exponent as i32)
        } else {
            t.powf(exponent)
        };
        let den: f64 = s
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, sk)| sj - sk)
            .product();
        total += num / den;
    }
    Ok(total)
}

/// Chain values `s_j = Σ of the last j entries of c permuted`, j = 0..=n.
pub(crate) fn chain_sums(c: &[f64], perm: &[usize]) -> Vec<f64> {
    let mut s = Vec::with_capacity(perm.len() + 1);
    let mut acc = 0.0;
    s.push(acc);
    for &i in perm.iter().rev() {
        acc += c[i];
        s.push(acc);
    }
    s
}

/// `∫_{[0,1]^n} (cᵀy + shift)^q dy` summed over Kuhn's triangulation, one
/// vertex formula per cell; real `q >= 1` uses `Γ(q+1)/Γ(q+n+1)`.
pub fn shifted_power_triangulation(c: &[f64], shift: f64, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidFunction(format!(
            "power exponent must be finite and >= 1, got {q}"
        )));
    }
    let n = c.len();
    if n == 0 {
        return Ok(shift.powf(q));
    }
    check_genericity(c, DEFAULT_GENERICITY_TOL)?.into_result()?;
    let cells = kuhn_triangulate(n)?;
    let sum = try_ordered_sum(cells.len(), |idx| {
        let perm = nth_permutation(n, idx);
        power_divided_difference(&chain_sums(c, &perm), shift, q)
    })?;
    let rising: f64 = (1..=n).map(|k| q + k as f64).product();
    Ok(sum / rising)
}

/// `∫_{[0,1]^n} (cᵀy)^q dy` by triangulation (requires generic `c`).
pub fn integrate_power_triangulation(c: &[f64], q: f64) -> Result<f64> {
    shifted_power_triangulation(c, 0.0, q)
}

/// `∫_{[0,1]^n} (1ᵀy)^q dy = q!/(q+n)! · Σ_j (−1)^{n−j} C(n,j) j^{q+n}`, exactly.
pub fn integrate_all_one_power(n: u32, q: u32) -> BigRational {
    use num::{BigInt, One, Zero};
    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    for j in 0..=n {
        let term = &binom * num::pow(BigInt::from(j), (q + n) as usize);
        if (n - j).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    let q_fact = <BigInt as Scalar>::factorial(q);
    let qn_fact = <BigInt as Scalar>::factorial(q + n);
    BigRational::new(sum * q_fact, qn_fact)
}

/// Companion lower bound `q!·n!/(q+n+1)! · Σ_{j=0}^{n} j^q` for [`integrate_all_one_power`].
pub fn all_one_power_lower_bound(n: u32, q: u32) -> BigRational {
    use num::BigInt;
    let sum: BigInt = (0..=n).map(|j| num::pow(BigInt::from(j), q as usize)).sum();
    let num = sum * <BigInt as Scalar>::factorial(q) * <BigInt as Scalar>::factorial(n);
    BigRational::new(num, <BigInt as Scalar>::factorial(q + n + 1))
}

/// `∫_Q (cᵀx)^q dx` over a box, zonotope or simplex, by the default route
/// (multinomial for integer `q`, triangulation otherwise).
pub fn integrate_power_domain(f: &PowerLinearForm, dom: &Domain) -> Result<IntegralResult> {
    let route = if f.integer_exponent().is_some() {
        PowerRoute::Multinomial
    } else {
        PowerRoute::Triangulation
    };
    integrate_power_domain_with(f, dom, route)
}

/// `∫_Q (cᵀx)^q dx` by an explicit route.
///
/// Boxes use `u^{q+d} ∫_{[0,1]^d} (cᵀy + cᵀv0/u)^q dy`; zonotopes pull the
/// form back to `(Aᵀc)ᵀy + cᵀb` and scale by `sqrt(det(AᵀA))`. Simplices
/// always use the vertex formula.
pub fn integrate_power_domain_with(
    f: &PowerLinearForm,
    dom: &Domain,
    route: PowerRoute,
) -> Result<IntegralResult> {
    let q = f.q();
    if f.c().len() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            got: f.c().len(),
        });
    }
    let method = match route {
        PowerRoute::Multinomial => Method::Multinomial,
        PowerRoute::Triangulation => Method::TriangulationBrion,
    };
    let cube = |coeffs: Vec<f64>, shift: f64| -> Result<f64> {
        // zero coefficients integrate out with factor one
        let coeffs: Vec<f64> = coeffs.into_iter().filter(|v| *v != 0.0).collect();
        match route {
            PowerRoute::Multinomial => {
                shifted_power_multinomial(&coeffs, &shift, integer_exponent(q)?)
            }
            PowerRoute::Triangulation => shifted_power_triangulation(&coeffs, shift, q),
        }
    };
    let value = match dom {
        Domain::Box(b) => {
            let u = b.u();
            let shift = f.c().iter().zip(b.v0()).map(|(c, v)| c * v).sum::<f64>() / u;
            u.powf(q + b.dim() as f64) * cube(f.c().to_vec(), shift)?
        }
        Domain::Zonotope(z) => {
            let shift: f64 = f.c().iter().zip(z.offset()).map(|(c, b)| c * b).sum();
            z.jacobian() * cube(z.pull_back(f.c()), shift)?
        }
        Domain::Simplex(s) => {
            let d = s.dim();
            let t: Vec<f64> = s
                .vertices()
                .iter()
                .map(|v| f.c().iter().zip(v).map(|(c, x)| c * x).sum())
                .collect();
            let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mean = t.iter().sum::<f64>() / t.len() as f64;
            let spread = t.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
            let clustered = mean > 0.0 && spread <= 0.5 * mean;
            if !clustered {
                for j in 0..t.len() {
                    for k in j + 1..t.len() {
                        if (t[j] - t[k]).abs() <= DEFAULT_GENERICITY_TOL * scale {
                            return Err(Error::NotGeneric {
                                subset: vec![j, k],
                                sum: t[j] - t[k],
                            });
                        }
                    }
                }
            }
            let rising: f64 = (1..=d).map(|k| q + k as f64).product();
            factorial_f64(d) * s.volume() * power_divided_difference(&t, 0.0, q)? / rising
        }
    };
    let method = if matches!(dom, Domain::Simplex(_)) {
        Method::TriangulationBrion
    } else {
        method
    };
    Ok(IntegralResult::exact(value, method))
}

/// Certified lower bound
/// `Γ(q+1)·d!/Γ(q+d+1) · (Σ_{j=1}^{d} j^q)/d^q · (cᵀ1 + cᵀv0/u)^q`
/// for `∫_{[0,1]^d} (cᵀx + cᵀv0/u)^q dx`.
pub fn power_lower_bound(c: &[f64], q: f64, v0: &[f64], u: f64) -> Result<f64> {
    if c.len() != v0.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: v0.len(),
        });
    }
    if c.iter().chain(v0).any(|v| !(v.is_finite() && *v > 0.0)) || !(u > 0.0) {
        return Err(Error::InvalidFunction(
            "lower bound needs c > 0, v0 > 0 and u > 0".into(),
        ));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidFunction(format!("need q >= 1, got {q}")));
    }
    let d = c.len();
    let gamma_ratio = factorial_f64(d) / (1..=d).map(|k| q + k as f64).product::<f64>();
    let mean_power =
        (1..=d).map(|j| (j as f64).powf(q)).sum::<f64>() / (d as f64).powf(q);
    let top = c.iter().sum::<f64>() + c.iter().zip(v0).map(|(c, v)| c * v).sum::<f64>() / u;
    Ok(gamma_ratio * mean_power * top.powf(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxDomain, SimplexDomain, ZonotopeDomain};
    use num::{BigInt, ToPrimitive};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn multinomial_examples() {
        assert!((integrate_power_multinomial(&[1.0, 1.0], 2.0).unwrap() - 7.0 / 6.0).abs() < 1e-15);
        assert!((integrate_power_multinomial(&[1.0], 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((integrate_power_multinomial(&[2.0], 3.0).unwrap() - 2.0).abs() < 1e-15);
        let exact = integrate_power_multinomial_exact(&[rat(1, 1), rat(1, 1)], 2).unwrap();
        assert_eq!(exact, rat(7, 6));
        assert!(matches!(
            integrate_power_multinomial(&[1.0], 2.5),
            Err(Error::NonIntegerExponent(_))
        ));
        assert!(matches!(
            integrate_power_multinomial(&[1.0; 30], 40.0),
            Err(Error::CombinatorialBlowup { .. })
        ));
    }

    #[test]
    fn shifted_multinomial_matches_antiderivative() {
        // ∫₀¹ (2y + 3)^3 dy = ((5)^4 - 3^4) / 8 = 68
        let v = shifted_power_multinomial(&[rat(2, 1)], &rat(3, 1), 3).unwrap();
        assert_eq!(v, rat(68, 1));
        // only the shift: ∫ 5^2 = 25
        let v = shifted_power_multinomial::<f64>(&[], &5.0, 2).unwrap();
        assert_eq!(v, 25.0);
    }

    #[test]
    fn triangulation_examples() {
        let v = integrate_power_triangulation(&[1.0, 1.0], 2.0).unwrap();
        assert!((v - 7.0 / 6.0).abs() < 1e-13, "{v}");
        let v = integrate_power_triangulation(&[1.0], 2.5).unwrap();
        assert!((v - 1.0 / 3.5).abs() < 1e-14);
        let a = integrate_power_triangulation(&[1.0, 2.0, 3.0], 2.0).unwrap();
        let b = integrate_power_multinomial(&[1.0, 2.0, 3.0], 2.0).unwrap();
        assert!((a - b).abs() <= 1e-10 * b);
        assert!(matches!(
            integrate_power_triangulation(&[1.0, -1.0], 2.0),
            Err(Error::NotGeneric { .. })
        ));
    }

    #[test]
    fn clustered_knots_use_the_series() {
        // ∫₀¹ (y + 1000)^{2.5} dy = ((1001)^{3.5} - 1000^{3.5}) / 3.5
        let v = shifted_power_triangulation(&[1.0], 1000.0, 2.5).unwrap();
        let exact = (1001f64.powf(3.5) - 1000f64.powf(3.5)) / 3.5;
        assert!((v - exact).abs() <= 1e-12 * exact, "{v} vs {exact}");
        let a = shifted_power_triangulation(&[0.5, 1.5, 1.0], 40.0, 3.0).unwrap();
        let b = shifted_power_multinomial(&[0.5, 1.5, 1.0], &40.0, 3).unwrap();
        assert!((a - b).abs() <= 1e-13 * b);
    }

    #[test]
    fn all_one_examples() {
        assert_eq!(integrate_all_one_power(2, 2), rat(7, 6));
        assert_eq!(integrate_all_one_power(1, 1), rat(1, 2));
        assert_eq!(all_one_power_lower_bound(2, 2), rat(1, 6));
        for n in 1..=5u32 {
            for q in 1..=5u32 {
                let ones = vec![rat(1, 1); n as usize];
                let direct = integrate_power_multinomial_exact(&ones, q).unwrap();
                assert_eq!(integrate_all_one_power(n, q), direct, "n={n} q={q}");
                assert!(all_one_power_lower_bound(n, q) <= direct);
            }
        }
    }

    #[test]
    fn domain_examples() {
        let f = PowerLinearForm::new(vec![1.0], 2.0).unwrap();
        let b: Domain = BoxDomain::new(vec![1.0], 1.0).unwrap().into();
        assert!((integrate_power_domain(&f, &b).unwrap().value - 7.0 / 3.0).abs() < 1e-14);
        let f2 = PowerLinearForm::new(vec![1.0, 1.0], 2.0).unwrap();
        let tiny: Domain = BoxDomain::new(vec![1e-9, 1e-9], 1.0).unwrap().into();
        assert!((integrate_power_domain(&f2, &tiny).unwrap().value - 7.0 / 6.0).abs() < 1e-8);
        let lin = PowerLinearForm::new(vec![1.0, 1.0], 1.0).unwrap();
        let z: Domain = ZonotopeDomain::new(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![1.0, 1.0])
            .unwrap()
            .into();
        assert!((integrate_power_domain(&lin, &z).unwrap().value - 16.0).abs() < 1e-12);
        let tri = integrate_power_domain_with(&lin, &z, PowerRoute::Triangulation).unwrap();
        assert!((tri.value - 16.0).abs() < 1e-12);
    }

    #[test]
    fn box_and_zonotope_routes_agree() {
        let f = PowerLinearForm::new(vec![0.7, 1.3, 0.0], 3.0).unwrap();
        let b = BoxDomain::new(vec![0.5, 1.0, 2.0], 1.5).unwrap();
        let via_box = integrate_power_domain(&f, &b.clone().into()).unwrap().value;
        let via_zono = integrate_power_domain(&f, &b.to_zonotope().into()).unwrap().value;
        let via_tri =
            integrate_power_domain_with(&f, &b.into(), PowerRoute::Triangulation).unwrap().value;
        assert!((via_box - via_zono).abs() <= 1e-12 * via_box);
        assert!((via_box - via_tri).abs() <= 1e-10 * via_box);
    }

    #[test]
    fn simplex_vertex_formula() {
        // ∫ over the triangle (0,0),(1,0),(0,1) of (x+2y)^2 = 1/4 + 2·... computed exactly:
        // ∫∫ x² + 4xy + 4y² = 1/12 + 4/24 + 4/12 = 7/12
        let f = PowerLinearForm::new(vec![1.0, 2.0], 2.0).unwrap();
        let s: Domain =
            SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap().into();
        let v = integrate_power_domain(&f, &s).unwrap().value;
        assert!((v - 7.0 / 12.0).abs() < 1e-14, "{v}");
        // vertex values 0 and 1 coincide for c = (1, 1)
        let g = PowerLinearForm::new(vec![1.0, 1.0], 2.0).unwrap();
        assert!(matches!(integrate_power_domain(&g, &s), Err(Error::NotGeneric { .. })));
    }

    #[test]
    fn lower_bound_examples() {
        let lb = power_lower_bound(&[1.0], 2.0, &[1.0], 1.0).unwrap();
        assert!((lb - 4.0 / 3.0).abs() < 1e-15);
        assert!(lb <= 7.0 / 3.0);
        // q = 1 is tight: the bound is the mean of the linear form
        let lb1 = power_lower_bound(&[2.0], 1.0, &[3.0], 4.0).unwrap();
        assert!((lb1 - 0.5 * (2.0 + 2.0 * 3.0 / 4.0)).abs() < 1e-15);
        let exact = integrate_power_multinomial_exact(&[rat(1, 1), rat(1, 1)], 2).unwrap();
        assert!(exact.to_f64().unwrap() > 0.0);
        let shifted = shifted_power_multinomial(&[1.0, 1.0], &0.2, 2).unwrap();
        assert!(power_lower_bound(&[1.0, 1.0], 2.0, &[1.0, 1.0], 10.0).unwrap() <= shifted);
    }
}
