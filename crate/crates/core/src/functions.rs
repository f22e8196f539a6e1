//! Convex function families built on a linear form `cᵀx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxDomain;

/// Default relative tolerance for the subset-sum genericity test.
pub const DEFAULT_GENERICITY_TOL: f64 = 1e-9;

/// Largest coefficient vector accepted by [`check_genericity`] (2^n - 1 subset sums).
pub const SUBSET_CAP: usize = 20;

/// Largest box dimension accepted by [`is_supermodular_on_vertices`] (4^d vertex pairs).
pub const SUPERMODULAR_CAP: usize = 12;

/// `(cᵀx)^q` with `q >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLinearForm {
    c: Vec<f64>,
    q: f64,
}

impl PowerLinearForm {
    pub fn new(c: Vec<f64>, q: f64) -> Result<Self> {
        check_coefficients(&c)?;
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidFunction(format!(
                "power exponent must be finite and >= 1, got {q}"
            )));
        }
        Ok(Self { c, q })
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `Some(q)` when the exponent is an integer.
    pub fn integer_exponent(&self) -> Option<u32> {
        (self.q.fract() == 0.0 && self.q <= u32::MAX as f64).then_some(self.q as u32)
    }
}

/// `exp(cᵀx) - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpLinearForm {
    c: Vec<f64>,
}

impl ExpLinearForm {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        check_coefficients(&c)?;
        Ok(Self { c })
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

/// `g(cᵀx)` with `g(t) = (t+1)^{ln(t+1)} - 1`, defined for `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperPolyForm {
    c: Vec<f64>,
}

impl SuperPolyForm {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        check_coefficients(&c)?;
        Ok(Self { c })
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

/// A member of one of the three supported families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionSpecJson", into = "FunctionSpecJson")]
pub enum FunctionSpec {
    Power(PowerLinearForm),
    Exp(ExpLinearForm),
    SuperPoly(SuperPolyForm),
}

/// Wire format of a function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpecJson {
    Power { c: Vec<f64>, q: f64 },
    Exp { c: Vec<f64> },
    Superpoly { c: Vec<f64> },
}

impl TryFrom<FunctionSpecJson> for FunctionSpec {
    type Error = Error;

    fn try_from(spec: FunctionSpecJson) -> Result<Self> {
        Ok(match spec {
            FunctionSpecJson::Power { c, q } => FunctionSpec::Power(PowerLinearForm::new(c, q)?),
            FunctionSpecJson::Exp { c } => FunctionSpec::Exp(ExpLinearForm::new(c)?),
            FunctionSpecJson::Superpoly { c } => FunctionSpec::SuperPoly(SuperPolyForm::new(c)?),
        })
    }
}

impl From<FunctionSpec> for FunctionSpecJson {
    fn from(f: FunctionSpec) -> Self {
        match f {
            FunctionSpec::Power(p) => FunctionSpecJson::Power { c: p.c, q: p.q },
            FunctionSpec::Exp(e) => FunctionSpecJson::Exp { c: e.c },
            FunctionSpec::SuperPoly(s) => FunctionSpecJson::Superpoly { c: s.c },
        }
    }
}

// c >= 0 everywhere; families need c > 0 only for the ratio asymptotics.
fn check_coefficients(c: &[f64]) -> Result<()> {
    if c.is_empty() {
        return Err(Error::InvalidFunction("coefficient vector is empty".into()));
    }
    if let Some(bad) = c.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidFunction(format!(
            "coefficients must be finite and >= 0, got {bad}"
        )));
    }
    Ok(())
}

impl FunctionSpec {
    pub fn power(c: Vec<f64>, q: f64) -> Result<Self> {
        PowerLinearForm::new(c, q).map(Self::Power)
    }

    pub fn exp(c: Vec<f64>) -> Result<Self> {
        ExpLinearForm::new(c).map(Self::Exp)
    }

    pub fn superpoly(c: Vec<f64>) -> Result<Self> {
        SuperPolyForm::new(c).map(Self::SuperPoly)
    }

    pub fn c(&self) -> &[f64] {
        match self {
            FunctionSpec::Power(p) => &p.c,
            FunctionSpec::Exp(e) => &e.c,
            FunctionSpec::SuperPoly(s) => &s.c,
        }
    }

    pub fn dim(&self) -> usize {
        self.c().len()
    }

    pub fn family(&self) -> &'static str {
        match self {
            FunctionSpec::Power(_) => "power",
            FunctionSpec::Exp(_) => "exp",
            FunctionSpec::SuperPoly(_) => "superpoly",
        }
    }

    /// True when some coefficient is exactly zero (allowed, but the ratio
    /// asymptotics assume `c > 0`).
    pub fn has_zero_coefficient(&self) -> bool {
        self.c().contains(&0.0)
    }

    pub fn linear_form(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.c().iter().zip(x).map(|(c, x)| c * x).sum())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let t = self.linear_form(x)?;
        self.apply(t)
    }

    /// The outer scalar function applied to `t = cᵀx`.
    pub fn apply(&self, t: f64) -> Result<f64> {
        match self {
            FunctionSpec::Power(p) => power_value(t, p.q),
            FunctionSpec::Exp(_) => Ok(t.exp_m1()),
            FunctionSpec::SuperPoly(_) => superpoly_value(t),
        }
    }

    /// `f(x)·exp(-log_scale)`, evaluated without forming `f(x)` when it would
    /// overflow.
    pub fn evaluate_scaled(&self, x: &[f64], log_scale: f64) -> Result<f64> {
        let t = self.linear_form(x)?;
        match self {
            FunctionSpec::Power(p) => {
                let base = power_value(t, p.q)?;
                if base.is_finite() {
                    Ok(base * (-log_scale).exp())
                } else {
                    Ok((p.q * t.ln() - log_scale).exp())
                }
            }
            FunctionSpec::Exp(_) => Ok(scaled_exp_m1(t, log_scale)),
            FunctionSpec::SuperPoly(_) => {
                check_superpoly_arg(t)?;
                let l = t.ln_1p();
                Ok(scaled_exp_m1(l * l, log_scale))
            }
        }
    }

    /// Natural log of `f` at the far box corner, a safe scale for
    /// [`FunctionSpec::evaluate_scaled`] over the box.
    pub fn log_scale_on(&self, domain: &BoxDomain) -> Result<f64> {
        let t = self.linear_form(&domain.top())?;
        Ok(match self {
            FunctionSpec::Power(p) => (p.q * t.ln()).max(0.0),
            FunctionSpec::Exp(_) => t.max(0.0),
            FunctionSpec::SuperPoly(_) => {
                let l = t.ln_1p();
                (l * l).max(0.0)
            }
        })
    }

    /// Degree `q` of positive homogeneity, when the family has one.
    pub fn homogeneity_degree(&self) -> Option<f64> {
        match self {
            FunctionSpec::Power(p) => Some(p.q),
            FunctionSpec::Exp(_) | FunctionSpec::SuperPoly(_) => None,
        }
    }
}

/// Free-function form of [`FunctionSpec::evaluate`].
pub fn evaluate(f: &FunctionSpec, x: &[f64]) -> Result<f64> {
    f.evaluate(x)
}

/// Free-function form of [`FunctionSpec::homogeneity_degree`].
pub fn homogeneity_degree(f: &FunctionSpec) -> Option<f64> {
    f.homogeneity_degree()
}

/// `(exp(a) - 1)·exp(-s)` without overflow for large `a`.
pub(crate) fn scaled_exp_m1(a: f64, s: f64) -> f64 {
    if a < 700.0 {
        a.exp_m1() * (-s).exp()
    } else {
        (a - s).exp() - (-s).exp()
    }
}

fn power_value(t: f64, q: f64) -> Result<f64> {
    if t < 0.0 && q.fract() != 0.0 {
        return Err(Error::NegativeBase {
            base: t,
            exponent: q,
        });
    }
    Ok(t.powf(q))
}

fn check_superpoly_arg(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::DomainViolation(format!(
            "superpolynomial form needs cᵀx >= 0, got {t}"
        )));
    }
    if !(t + 1.0).is_finite() {
        return Err(Error::Range { exponent: t });
    }
    Ok(())
}

// exp(ln(t+1)^2) - 1
fn superpoly_value(t: f64) -> Result<f64> {
    check_superpoly_arg(t)?;
    let l = t.ln_1p();
    Ok((l * l).exp_m1())
}

/// Outcome of [`check_genericity`].
#[derive(Debug, Clone, PartialEq)]
pub enum Genericity {
    Generic,
    /// A nonempty subset (0-based indices) whose sum is within tolerance of zero.
    Degenerate { subset: Vec<usize>, sum: f64 },
}

impl Genericity {
    pub fn is_generic(&self) -> bool {
        matches!(self, Genericity::Generic)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Genericity::Generic => Ok(()),
            Genericity::Degenerate { subset, sum } => Err(Error::NotGeneric { subset, sum }),
        }
    }
}

/// Checks that no nonempty subset of `c` sums to (relatively) zero:
/// `|Σ_{j∈S} c_j| > tol·‖c‖∞` for every `S ≠ ∅`. The first violating subset
/// in increasing bit-mask order is returned as the witness.
pub fn check_genericity(c: &[f64], tol: f64) -> Result<Genericity> {
    let n = c.len();
    if n > SUBSET_CAP {
        return Err(Error::CombinatorialBlowup {
            what: "subset-sum genericity check",
            n,
            count: format!("2^{n} - 1 = {}", (1u128 << n) - 1),
            cap: SUBSET_CAP,
        });
    }
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * scale;
    let mut sums = vec![0.0f64; 1 << n];
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        let s = sums[mask & (mask - 1)] + c[low];
        sums[mask] = s;
        if !(s.abs() > threshold) {
            let subset = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            return Ok(Genericity::Degenerate { subset, sum: s });
        }
    }
    Ok(Genericity::Generic)
}

/// Supermodularity of `f` restricted to the `2^d` vertices of `domain`:
/// `f(x∨y) + f(x∧y) >= f(x) + f(y)` up to a slack of `1e-12·(1 + max|f|)`.
pub fn is_supermodular_on_vertices(f: &FunctionSpec, domain: &BoxDomain) -> Result<bool> {
    let d = domain.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    if d > SUPERMODULAR_CAP {
        return Err(Error::CombinatorialBlowup {
            what: "vertex supermodularity check",
            n: d,
            count: format!("4^{d} = {} vertex pairs", 1u128 << (2 * d)),
            cap: SUPERMODULAR_CAP,
        });
    }
    let log_scale = f.log_scale_on(domain)?;
    let values = (0..1u64 << d)
        .map(|m| f.evaluate_scaled(&domain.vertex(m), log_scale))
        .collect::<Result<Vec<f64>>>()?;
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(is_supermodular_table(&values, 1e-12 * ((-log_scale).exp() + peak)))
}

/// Supermodularity of a table of values indexed by vertex bit mask
/// (`values.len()` must be a power of two).
pub fn is_supermodular_table(values: &[f64], slack: f64) -> bool {
    debug_assert!(values.len().is_power_of_two());
    (0..values.len()).all(|x| {
        (x + 1..values.len())
            .all(|y| values[x | y] + values[x & y] >= values[x] + values[y] - slack)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    #[test]
    fn evaluate_examples() {
        let p = FunctionSpec::power(vec![1.0, 1.0], 2.0).unwrap();
        assert_eq!(p.evaluate(&[1.0, 1.0]).unwrap(), 4.0);
        let e = FunctionSpec::exp(vec![1.0]).unwrap();
        assert_eq!(e.evaluate(&[0.0]).unwrap(), 0.0);
        let s = FunctionSpec::superpoly(vec![1.0]).unwrap();
        // g(e - 1) = e^{ln(e)^2} - 1 = e - 1
        let v = s.evaluate(&[E - 1.0]).unwrap();
        assert!((v - 1.718281828459045).abs() < 1e-12, "{v}");
    }

    #[test]
    fn evaluate_errors() {
        let p = FunctionSpec::power(vec![1.0, 1.0], 2.0).unwrap();
        assert!(matches!(
            p.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        let s = FunctionSpec::superpoly(vec![1.0]).unwrap();
        assert!(matches!(s.evaluate(&[-0.5]), Err(Error::DomainViolation(_))));
        assert!(matches!(s.evaluate(&[f64::INFINITY]), Err(Error::Range { .. })));
        assert!(FunctionSpec::power(vec![1.0], 0.5).is_err());
        assert!(FunctionSpec::exp(vec![-1.0]).is_err());
        assert!(FunctionSpec::exp(vec![]).is_err());
    }

    #[test]
    fn homogeneity_degrees() {
        assert_eq!(FunctionSpec::power(vec![1.0], 3.0).unwrap().homogeneity_degree(), Some(3.0));
        assert_eq!(FunctionSpec::power(vec![1.0], 1.0).unwrap().homogeneity_degree(), Some(1.0));
        assert_eq!(FunctionSpec::exp(vec![1.0]).unwrap().homogeneity_degree(), None);
        assert_eq!(FunctionSpec::superpoly(vec![1.0]).unwrap().homogeneity_degree(), None);
    }

    #[test]
    fn homogeneity_holds_numerically() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.random_range(1..=4);
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..3.0)).collect();
            let q = rng.random_range(1.0..4.0);
            let f = FunctionSpec::power(c, q).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
            let lambda = rng.random_range(0.0..2.0);
            let fx = f.evaluate(&x).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let lhs = f.evaluate(&scaled).unwrap();
            assert!((lhs - lambda.powf(q) * fx).abs() <= 1e-9 * (1.0 + fx.abs()));
        }
    }

    #[test]
    fn midpoint_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..300 {
            let d = rng.random_range(1..=3);
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..2.0)).collect();
            let fams = [
                FunctionSpec::power(c.clone(), rng.random_range(1.0..3.0)).unwrap(),
                FunctionSpec::exp(c.clone()).unwrap(),
                FunctionSpec::superpoly(c).unwrap(),
            ];
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..3.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..3.0)).collect();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            for f in &fams {
                let fm = f.evaluate(&mid).unwrap();
                let avg = 0.5 * (f.evaluate(&x).unwrap() + f.evaluate(&y).unwrap());
                assert!(fm <= avg + 1e-12 * (1.0 + avg.abs()), "{f:?}");
            }
        }
    }

    #[test]
    fn genericity_examples() {
        assert!(check_genericity(&[1.0, 2.0, 3.0], DEFAULT_GENERICITY_TOL)
            .unwrap()
            .is_generic());
        assert_eq!(
            check_genericity(&[1.0, -1.0], DEFAULT_GENERICITY_TOL).unwrap(),
            Genericity::Degenerate {
                subset: vec![0, 1],
                sum: 0.0
            }
        );
        // subset sums 1, 1+1e-15, 2+1e-15 are all positive
        assert!(check_genericity(&[1.0, 1.0 + 1e-15], 1e-12).unwrap().is_generic());
        assert!(check_genericity(&[1.0; 21], 1e-9).is_err());
    }

    #[test]
    fn genericity_monotone_in_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let tol = 10f64.powf(rng.random_range(-6.0..0.0));
            if check_genericity(&c, tol).unwrap().is_generic() {
                assert!(check_genericity(&c, tol / 10.0).unwrap().is_generic());
            }
        }
    }

    #[test]
    fn supermodularity_examples() {
        let b = BoxDomain::new(vec![1.0, 1.0], 1.0).unwrap();
        let e = FunctionSpec::exp(vec![1.0, 1.0]).unwrap();
        assert!(is_supermodular_on_vertices(&e, &b).unwrap());
        let p = FunctionSpec::power(vec![1.0, 1.0], 2.0).unwrap();
        assert!(is_supermodular_on_vertices(&p, &b).unwrap());
        let b1 = BoxDomain::new(vec![0.3], 2.0).unwrap();
        let s = FunctionSpec::superpoly(vec![2.0]).unwrap();
        assert!(is_supermodular_on_vertices(&s, &b1).unwrap());
        // linear: modular, accepted within slack even at large scale
        let lin = FunctionSpec::power(vec![1.0, 3.0, 0.5], 1.0).unwrap();
        let big = BoxDomain::new(vec![1e6, 2.0, 3.0], 1e8).unwrap();
        assert!(is_supermodular_on_vertices(&lin, &big).unwrap());
        // overflowing exponentials are handled in scaled form
        let huge = BoxDomain::new(vec![1.0, 1.0], 600.0).unwrap();
        assert!(is_supermodular_on_vertices(&e, &huge).unwrap());
        assert!(is_supermodular_on_vertices(&e, &BoxDomain::new(vec![1.0; 13], 1.0).unwrap()).is_err());
    }

    #[test]
    fn submodular_table_is_rejected() {
        // f(x) = -x1·x2 on {0,1}^2, indexed by mask: 00, 10, 01, 11
        assert!(!is_supermodular_table(&[0.0, 0.0, 0.0, -1.0], 1e-12));
        assert!(is_supermodular_table(&[0.0, 0.0, 0.0, 1.0], 1e-12));
        assert!(is_supermodular_table(&[3.0, 5.0], 0.0));
    }

    #[test]
    fn json_wire_format() {
        let f: FunctionSpec = serde_json::from_str(r#"{"kind":"power","c":[1,2],"q":3}"#).unwrap();
        assert_eq!(f, FunctionSpec::power(vec![1.0, 2.0], 3.0).unwrap());
        let g: FunctionSpec = serde_json::from_str(r#"{"kind":"superpoly","c":[1]}"#).unwrap();
        assert_eq!(g.family(), "superpoly");
        assert_eq!(
            serde_json::to_string(&FunctionSpec::exp(vec![1.5]).unwrap()).unwrap(),
            r#"{"kind":"exp","c":[1.5]}"#
        );
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind":"power","c":[1],"q":0.2}"#).is_err());
    }
}
