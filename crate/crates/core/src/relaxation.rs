//! Volumes of the perspective relaxation `P` and the naive relaxation `P⁰`,
//! the cut-off amount `Δ = vol(P⁰) − vol(P)` and the cut-off ratio
//! `Δ / vol(P⁰)`, with their closed-form limits and bounds.
//!
//! For a concave upper bound `μ` on a `d`-dimensional domain `Q`:
//!
//! ```text
//! vol(P)  = (∫μ − ∫f) / (d+2)
//! vol(P⁰) = ∫μ / (d+2) − ∫₀¹ z^d ∫ f(z·x) dx dz
//! Δ       = ∫f / (d+2) − ∫₀¹ z^d ∫ f(z·x) dx dz
//! ```
//!
//! On boxes every integral is carried in units of `e^{−s}`, `s` the log of
//! `f` at the far corner, so ratios stay finite for exponentials at any `u`.

use num::{BigRational, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::{constant_bound_on, integrate_envelope_scaled};
use crate::error::{Error, Result};
use crate::functions::{ExpLinearForm, FunctionSpec};
use crate::geometry::{factorial_f64, BoxDomain, Domain};
use crate::integration::{
    integrate_exp_box_scaled, integrate_function, shifted_power_multinomial, z_integral,
    z_integral_exp, z_integral_exp_box_scaled, IntegralResult, Scalar, TENSOR_ORDER,
};

/// Absolute slack for `vol(P) >= 0` and `Δ >= 0`.
pub const VOLUME_SLACK: f64 = 1e-10;
/// `vol(P⁰)` at or below this is treated as zero.
pub const DEGENERATE_VOLUME: f64 = 1e-300;
/// Default `r(u_max)` threshold of [`check_sufficient_condition`].
pub const DEFAULT_TREND_THRESHOLD: f64 = 0.1;

/// Which concave upper bound caps the lifted sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuKind {
    /// `μ ≡ max_Q f`.
    Constant,
    /// `μ = conc(f)` (Kuhn interpolant on boxes, affine interpolant on simplices).
    #[serde(alias = "envelope")]
    ConcaveEnvelope,
}

impl MuKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MuKind::Constant => "constant",
            MuKind::ConcaveEnvelope => "concave_envelope",
        }
    }
}

impl std::fmt::Display for MuKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Volumes, gap and ratio for one `(f, μ, Q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelaxationReport {
    pub vol_p: f64,
    pub vol_p0: f64,
    pub delta: f64,
    pub ratio: f64,
    pub mu_kind: MuKind,
    /// Every closed form or numerical method that contributed.
    pub formula_trace: Vec<String>,
}

// The three integrals, each multiplied by e^{−s}.
#[derive(Debug, Clone)]
struct Terms {
    dim: usize,
    log_scale: f64,
    int_f: f64,
    int_mu: f64,
    z: f64,
    trace: Vec<String>,
}

impl Terms {
    fn width(&self) -> f64 {
        self.dim as f64 + 2.0
    }

    fn vol_p(&self) -> f64 {
        (self.int_mu - self.int_f) / self.width()
    }

    fn vol_p0(&self) -> f64 {
        self.int_mu / self.width() - self.z
    }

    fn delta(&self) -> f64 {
        self.int_f / self.width() - self.z
    }

    fn ratio(&self) -> Result<f64> {
        let p0 = self.vol_p0();
        if p0 <= DEGENERATE_VOLUME * (-self.log_scale).exp() {
            return Err(Error::DegenerateVolume(p0 * self.log_scale.exp()));
        }
        Ok(self.delta() / p0)
    }

    fn unscale(&self, v: f64) -> f64 {
        if self.log_scale == 0.0 {
            v
        } else {
            v * self.log_scale.exp()
        }
    }
}

fn trace_of(r: &IntegralResult, what: &str) -> String {
    format!("{what}:{}", r.method)
}

fn check_dims(f: &FunctionSpec, dom: &Domain) -> Result<()> {
    if f.dim() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            got: f.dim(),
        });
    }
    Ok(())
}

fn int_f_terms(f: &FunctionSpec, dom: &Domain, s: f64) -> Result<(f64, f64, Vec<String>)> {
    let mut trace = Vec::new();
    let scale = (-s).exp();
    let (int_f, z) = match (f, dom) {
        (FunctionSpec::Exp(e), Domain::Box(b)) => {
            let zr = z_integral_exp_box_scaled(e, b, s)?;
            trace.push("int_f:product_formula".to_string());
            trace.push(trace_of(&zr, "z_integral"));
            (integrate_exp_box_scaled(e, b, s), zr.value)
        }
        (FunctionSpec::SuperPoly(_), Domain::Box(_)) => {
            let g = |x: &[f64]| f.evaluate_scaled(x, s);
            let fr = crate::integration::tensor::tensor_function(g, dom, TENSOR_ORDER, false)?;
            let zr = crate::integration::tensor::tensor_function(g, dom, TENSOR_ORDER, true)?;
            trace.push(trace_of(&fr, "int_f"));
            trace.push(trace_of(&zr, "z_integral"));
            (fr.value, zr.value)
        }
        _ => {
            let fr = integrate_function(f, dom)?;
            let zr = z_integral(f, dom)?;
            trace.push(trace_of(&fr, "int_f"));
            trace.push(trace_of(&zr, "z_integral"));
            (fr.value * scale, zr.value * scale)
        }
    };
    if !(int_f.is_finite() && z.is_finite()) {
        return Err(Error::Range { exponent: s });
    }
    Ok((int_f, z, trace))
}

fn int_mu_term(f: &FunctionSpec, mu: MuKind, dom: &Domain, s: f64) -> Result<(f64, String)> {
    match (mu, dom) {
        (MuKind::Constant, Domain::Box(b)) => Ok((
            f.evaluate_scaled(&b.top(), s)? * b.volume(),
            "int_mu:constant_bound".into(),
        )),
        (MuKind::Constant, _) => Ok((
            constant_bound_on(f, dom)?.value * dom.volume() * (-s).exp(),
            "int_mu:constant_bound".into(),
        )),
        (MuKind::ConcaveEnvelope, Domain::Box(b)) => Ok((
            integrate_envelope_scaled(f, b, s)?,
            "int_mu:envelope_subset_sum".into(),
        )),
        (MuKind::ConcaveEnvelope, Domain::Simplex(sx)) => {
            // conc of a convex function on a simplex is its affine interpolant
            let mut sum = 0.0;
            for v in sx.vertices() {
                sum += f.evaluate_scaled(v, s)?;
            }
            Ok((
                sx.volume() * sum / sx.vertices().len() as f64,
                "int_mu:affine_interpolant".into(),
            ))
        }
        (MuKind::ConcaveEnvelope, Domain::Zonotope(_)) => Err(Error::Unsupported(
            "concave envelopes are only built over boxes and simplices".into(),
        )),
    }
}

fn log_scale(f: &FunctionSpec, dom: &Domain) -> Result<f64> {
    match (f, dom) {
        (FunctionSpec::Power(_), _) => Ok(0.0),
        (_, Domain::Box(b)) => f.log_scale_on(b),
        _ => Ok(0.0),
    }
}

fn terms(f: &FunctionSpec, mu: MuKind, dom: &Domain) -> Result<Terms> {
    check_dims(f, dom)?;
    let s = log_scale(f, dom)?;
    let (int_f, z, mut trace) = int_f_terms(f, dom, s)?;
    let (int_mu, mu_tag) = int_mu_term(f, mu, dom, s)?;
    trace.push(mu_tag);
    if s > 0.0 {
        trace.push("log_scaled".into());
    }
    Ok(Terms {
        dim: dom.dim(),
        log_scale: s,
        int_f,
        int_mu,
        z,
        trace,
    })
}

fn finite(v: f64, s: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range { exponent: s })
    }
}

/// `vol(P) = (∫μ − ∫f)/(d+2)`.
pub fn vol_perspective(f: &FunctionSpec, mu: MuKind, dom: &Domain) -> Result<f64> {
    let t = terms(f, mu, dom)?;
    let v = t.vol_p();
    if v < -VOLUME_SLACK * (1.0 + t.int_mu.abs()) {
        return Err(Error::Inconsistent(format!(
            "negative perspective volume {v:e}: μ is not an upper bound of f"
        )));
    }
    finite(t.unscale(v), t.log_scale)
}

/// `vol(P⁰) = ∫μ/(d+2) − ∫₀¹ z^d ∫ f(z·x) dx dz`.
pub fn vol_naive(f: &FunctionSpec, mu: MuKind, dom: &Domain) -> Result<f64> {
    let t = terms(f, mu, dom)?;
    finite(t.unscale(t.vol_p0()), t.log_scale)
}

/// `Δ = ∫f/(d+2) − ∫₀¹ z^d ∫ f(z·x) dx dz`; independent of `μ`.
pub fn delta(f: &FunctionSpec, dom: &Domain) -> Result<f64> {
    check_dims(f, dom)?;
    let s = log_scale(f, dom)?;
    let (int_f, z, _) = int_f_terms(f, dom, s)?;
    let d = dom.dim() as f64;
    let v = int_f / (d + 2.0) - z;
    finite(if s == 0.0 { v } else { v * s.exp() }, s)
}

/// `Δ = (q−1)/((d+2)(q+d+1))·∫f` for `q`-homogeneous `f`.
pub fn delta_homogeneous(f: &FunctionSpec, dom: &Domain) -> Result<f64> {
    check_dims(f, dom)?;
    let q = f.homogeneity_degree().ok_or(Error::NotHomogeneous)?;
    let d = dom.dim() as f64;
    let int_f = integrate_function(f, dom)?.value;
    Ok((q - 1.0) / ((d + 2.0) * (q + d + 1.0)) * int_f)
}

// ln(e^x − 1) for x > 0
fn ln_expm1(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-x).exp_m1()).ln()
    } else {
        x.exp_m1().ln()
    }
}

/// Closed form of `Δ` for `e^{cᵀx} − 1` on a box, `c > 0`:
/// `(1/Πc)·(e^{cᵀv0}Π(e^{u c_j}−1)/(d+2) − ∫₀¹ e^{z cᵀv0}Π(e^{z u c_j}−1) dz) + u^d/((d+1)(d+2))`.
pub fn delta_exp_box(f: &ExpLinearForm, b: &BoxDomain) -> Result<f64> {
    let c = f.c();
    if c.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: c.len(),
        });
    }
    if c.iter().any(|&cj| cj <= 0.0) {
        return Err(Error::InvalidFunction("closed-form Δ needs c > 0".into()));
    }
    let d = b.dim() as f64;
    let u = b.u();
    let cv0: f64 = c.iter().zip(b.v0()).map(|(c, v)| c * v).sum();
    let log_head =
        cv0 + c.iter().map(|&cj| ln_expm1(u * cj) - cj.ln()).sum::<f64>();
    if log_head > 709.78 {
        return Err(Error::Range { exponent: log_head });
    }
    let head = log_head.exp() / (d + 2.0);
    // ∫₀¹ z^d ∫(e^{z cᵀx} − 1) = [z-part] − u^d/(d+1)
    let zr = z_integral_exp(f, b)?;
    let z_part = zr.value + b.volume() / (d + 1.0);
    Ok(head - z_part + b.volume() / ((d + 1.0) * (d + 2.0)))
}

/// `Δ / vol(P⁰)`.
pub fn cutoff_ratio(f: &FunctionSpec, mu: MuKind, dom: &Domain) -> Result<f64> {
    terms(f, mu, dom)?.ratio()
}

/// All volumes for one instance.
///
/// Fails with [`Error::Range`] when the absolute volumes leave binary64;
/// [`ratio_sweep`] still reports the ratio for such boxes.
pub fn relaxation_report(f: &FunctionSpec, mu: MuKind, dom: &Domain) -> Result<RelaxationReport> {
    let t = terms(f, mu, dom)?;
    let ratio = t.ratio()?;
    let vol_p = t.vol_p();
    if vol_p < -VOLUME_SLACK * (1.0 + t.int_mu.abs()) {
        return Err(Error::Inconsistent(format!(
            "negative perspective volume {vol_p:e}"
        )));
    }
    Ok(RelaxationReport {
        vol_p: finite(t.unscale(vol_p), t.log_scale)?,
        vol_p0: finite(t.unscale(t.vol_p0()), t.log_scale)?,
        delta: finite(t.unscale(t.delta()), t.log_scale)?,
        ratio,
        mu_kind: mu,
        formula_trace: t.trace,
    })
}

/// `(d+1)/Π c_j`: limit of `u^d·Δ/vol(P⁰)` for `e^{cᵀx} − 1` with `μ = conc(f)`
/// on `v0 + u[0,1]^d` as `u → ∞`.
pub fn exprat_limit(c: &[f64]) -> Result<f64> {
    if c.is_empty() || c.iter().any(|&cj| !(cj > 0.0 && cj.is_finite())) {
        return Err(Error::InvalidFunction("limit needs c > 0".into()));
    }
    Ok((c.len() as f64 + 1.0) / c.iter().product::<f64>())
}

/// Lower bound `(q−1)B/((q+d+1) − (d+2)B)` on the limiting cut-off ratio of
/// `(cᵀx)^q` with the constant bound, where
/// `B = Γ(q+1)·d!/Γ(q+d+1) · Σ_{j=1}^{d} j^q / d^q`.
pub fn cx_rat_lower_bound(q: f64, d: usize) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) || d == 0 {
        return Err(Error::InvalidFunction(format!(
            "bound needs q >= 1 and d >= 1, got q = {q}, d = {d}"
        )));
    }
    let gamma_ratio = factorial_f64(d) / (1..=d).map(|k| q + k as f64).product::<f64>();
    let b = gamma_ratio * (1..=d).map(|j| (j as f64).powf(q)).sum::<f64>() / (d as f64).powf(q);
    let den = (q + d as f64 + 1.0) - (d as f64 + 2.0) * b;
    if den <= 0.0 {
        return Err(Error::Inconsistent(format!("bound denominator {den:e} <= 0")));
    }
    Ok((q - 1.0) * b / den)
}

/// One row of [`ratio_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub u: f64,
    pub vol_p: f64,
    pub vol_p0: f64,
    pub delta: f64,
    pub ratio: f64,
    /// `u^d·ratio` for exponentials, the plain ratio otherwise.
    pub scaled_ratio: f64,
    /// Limit (exponentials) or limiting lower bound (powers, constant `μ`).
    pub theoretical: Option<f64>,
    /// Set when the absolute volumes leave binary64; they are then printed
    /// as `inf` and only the ratios are meaningful.
    pub asymptotic: bool,
}

/// Theoretical column of a sweep.
pub fn theoretical_value(f: &FunctionSpec, mu: MuKind) -> Option<f64> {
    match (f, mu) {
        (FunctionSpec::Exp(e), MuKind::ConcaveEnvelope) => exprat_limit(e.c()).ok(),
        (FunctionSpec::Exp(e), MuKind::Constant) => {
            exprat_limit(e.c()).ok().map(|l| l / (e.c().len() as f64 + 1.0))
        }
        (FunctionSpec::Power(p), MuKind::Constant) => cx_rat_lower_bound(p.q(), p.c().len()).ok(),
        _ => None,
    }
}

fn sweep_row(f: &FunctionSpec, mu: MuKind, v0: &[f64], u: f64) -> Result<SweepRow> {
    let b = BoxDomain::new(v0.to_vec(), u)?;
    let d = b.dim();
    let dom = Domain::Box(b);
    let t = terms(f, mu, &dom)?;
    let ratio = t.ratio()?;
    let scaled_ratio = match f {
        FunctionSpec::Exp(_) => u.powi(d as i32) * ratio,
        _ => ratio,
    };
    let (vol_p, vol_p0, delta) = (t.unscale(t.vol_p()), t.unscale(t.vol_p0()), t.unscale(t.delta()));
    let asymptotic = !(vol_p.is_finite() && vol_p0.is_finite() && delta.is_finite());
    let clip = |v: f64| if asymptotic { f64::INFINITY.copysign(v) } else { v };
    Ok(SweepRow {
        u,
        vol_p: clip(vol_p),
        vol_p0: clip(vol_p0),
        delta: clip(delta),
        ratio,
        scaled_ratio,
        theoretical: theoretical_value(f, mu),
        asymptotic,
    })
}

/// One row per `u` on boxes `v0 + u[0,1]^d`, ordered as given; rows whose
/// integrals overflow are kept with `NaN` entries and the `asymptotic` flag.
pub fn ratio_sweep(
    f: &FunctionSpec,
    mu: MuKind,
    v0: &[f64],
    u_values: &[f64],
) -> Result<Vec<SweepRow>> {
    if u_values.is_empty() {
        return Err(Error::InvalidDomain("empty u list".into()));
    }
    if u_values.iter().any(|&u| !(u > 0.0 && u.is_finite()))
        || u_values.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidDomain(
            "u values must be positive, finite and increasing".into(),
        ));
    }
    u_values
        .par_iter()
        .map(|&u| match sweep_row(f, mu, v0, u) {
            Err(Error::Range { .. }) => Ok(SweepRow {
                u,
                vol_p: f64::NAN,
                vol_p0: f64::NAN,
                delta: f64::NAN,
                ratio: f64::NAN,
                scaled_ratio: f64::NAN,
                theoretical: theoretical_value(f, mu),
                asymptotic: true,
            }),
            other => other,
        })
        .collect()
}

/// `r(u) = ∫_{[0,1]^d} f(v0+ux)dx / ∫_{[0,1]^d} μ(v0+ux)dx` at one `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub u: f64,
    pub r: f64,
}

/// Empirical check that `r(u)` decreases toward zero, the sufficient
/// condition for the cut-off ratio to vanish. Evidence only, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub points: Vec<TrendPoint>,
    pub decreasing: bool,
    pub threshold: f64,
    /// Decreasing and `r(u_max) < threshold`.
    pub satisfied: bool,
    pub formula_trace: Vec<String>,
}

/// Computes `r(u)` over the sweep; see [`TrendReport`].
pub fn check_sufficient_condition(
    f: &FunctionSpec,
    mu: MuKind,
    v0: &[f64],
    u_values: &[f64],
    threshold: f64,
) -> Result<TrendReport> {
    if u_values.is_empty() {
        return Err(Error::InvalidDomain("empty u list".into()));
    }
    let mut trace = Vec::new();
    let mut points = Vec::with_capacity(u_values.len());
    for &u in u_values {
        let dom = Domain::Box(BoxDomain::new(v0.to_vec(), u)?);
        let t = terms(f, mu, &dom)?;
        if trace.is_empty() {
            trace = t.trace.iter().filter(|s| !s.starts_with("z_integral")).cloned().collect();
        }
        points.push(TrendPoint {
            u,
            r: t.int_f / t.int_mu,
        });
    }
    let decreasing = points.windows(2).all(|w| w[1].r < w[0].r);
    let last = points[points.len() - 1].r;
    Ok(TrendReport {
        decreasing,
        threshold,
        satisfied: decreasing && last < threshold,
        points,
        formula_trace: trace,
    })
}

/// Relaxation quantities in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport {
    pub vol_p: BigRational,
    pub vol_p0: BigRational,
    pub delta: BigRational,
    pub ratio: BigRational,
}

/// Exact report for `(cᵀx)^q` with integer `q` on the box `v0 + u[0,1]^d`
/// with rational data.
pub fn power_box_report_exact(
    c: &[BigRational],
    q: u32,
    v0: &[BigRational],
    u: &BigRational,
    mu: MuKind,
) -> Result<ExactReport> {
    let d = c.len();
    if v0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v0.len(),
        });
    }
    if d == 0 || q == 0 || !u.is_positive() || v0.iter().any(|v| !v.is_positive()) {
        return Err(Error::InvalidDomain("need d >= 1, q >= 1, u > 0 and v0 > 0".into()));
    }
    if c.iter().any(|v| v.is_negative()) {
        return Err(Error::InvalidFunction("coefficients must be nonnegative".into()));
    }
    let count = |n: usize| BigRational::from_count(n as u64);
    let dot = |x: &[BigRational]| -> BigRational {
        c.iter().zip(x).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    };
    let f_at = |mask: u64| -> BigRational {
        let x: Vec<BigRational> = v0
            .iter()
            .enumerate()
            .map(|(i, v)| if mask >> i & 1 == 1 { v + u } else { v.clone() })
            .collect();
        dot(&x).powu(q)
    };
    let ud = u.powu(d as u32);
    let shift = dot(v0) / u;
    let int_f = u.powu(q + d as u32) * shifted_power_multinomial(c, &shift, q)?;
    let int_mu = match mu {
        MuKind::Constant => f_at((1u64 << d) - 1) * &ud,
        MuKind::ConcaveEnvelope => {
            let mut binom = vec![BigRational::one(); d + 1];
            for k in 1..=d {
                binom[k] = &binom[k - 1] * count(d - k + 1) / count(k);
            }
            let sum = (0..1u64 << d).fold(BigRational::zero(), |acc, m| {
                acc + f_at(m) / &binom[m.count_ones() as usize]
            });
            ud * sum / count(d + 1)
        }
    };
    let width = count(d + 2);
    let z = &int_f / count(q as usize + d + 1);
    let vol_p = (&int_mu - &int_f) / &width;
    let vol_p0 = &int_mu / &width - &z;
    let delta = &int_f / &width - &z;
    if vol_p0.is_zero() {
        return Err(Error::DegenerateVolume(0.0));
    }
    let ratio = &delta / &vol_p0;
    Ok(ExactReport {
        vol_p,
        vol_p0,
        delta,
        ratio,
    })
}
