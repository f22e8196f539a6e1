//! Exact and oracle integration of the function families over boxes,
//! zonotopes and simplices, including the `z`-weighted integral
//! `∫₀¹ z^d ∫_Q f(z·x) dx dz` of the naive relaxation.

mod exponential;
mod monte_carlo;
mod power;
mod scalar;
pub(crate) mod tensor;

use serde::{Deserialize, Serialize};

pub use exponential::{
    exp_cube_product, exp_cube_triangulation, integrate_exp_box, integrate_exp_domain,
    integrate_exp_simplex, integrate_exp_zonotope, phi1, z_integral_exp, z_integral_exp_zonotope,
    SUBSET_EXPANSION_CAP,
};
pub(crate) use exponential::{integrate_exp_box_scaled, z_integral_exp_box_scaled};
pub use monte_carlo::{monte_carlo_function, monte_carlo_integrate};
pub use power::{
    all_one_power_lower_bound, integrate_all_one_power, integrate_power_domain,
    integrate_power_domain_with, integrate_power_multinomial, integrate_power_multinomial_exact,
    integrate_power_triangulation, power_lower_bound, shifted_power_multinomial,
    shifted_power_triangulation, PowerRoute, MONOMIAL_CAP,
};
pub use scalar::Scalar;
pub use tensor::{tensor_integrate, tensor_z_integral, TENSOR_ORDER};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::geometry::Domain;

/// Which formula produced an integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Multinomial,
    TriangulationBrion,
    ProductFormula,
    SubsetExpansion,
    HomogeneousShortcut,
    MonteCarlo,
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Multinomial => "multinomial",
            Method::TriangulationBrion => "triangulation_brion",
            Method::ProductFormula => "product_formula",
            Method::SubsetExpansion => "subset_expansion",
            Method::HomogeneousShortcut => "homogeneous_shortcut",
            Method::MonteCarlo => "monte_carlo",
            Method::Quadrature => "quadrature",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An integral value with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub method: Method,
    /// Standard error (Monte Carlo) or error estimate (quadrature).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

impl IntegralResult {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            method,
            error_estimate: None,
        }
    }

    pub fn estimated(value: f64, method: Method, error: f64) -> Self {
        debug_assert!(error >= 0.0 || error.is_nan());
        Self {
            value,
            method,
            error_estimate: Some(error.abs()),
        }
    }
}

/// `∫_Q f(x) dx` by the best available closed form for the family, or by
/// tensor quadrature for the superpolynomial family.
pub fn integrate_function(f: &FunctionSpec, dom: &Domain) -> Result<IntegralResult> {
    check_dims(f, dom)?;
    match f {
        FunctionSpec::Power(p) => integrate_power_domain(p, dom),
        FunctionSpec::Exp(e) => integrate_exp_domain(e, dom),
        FunctionSpec::SuperPoly(_) => tensor_integrate(f, dom, TENSOR_ORDER),
    }
}

/// `∫₀¹ z^d ∫_Q f(z·x) dx dz`, using the homogeneous shortcut when `f` has a
/// degree, the closed form for exponentials, and tensor quadrature otherwise.
pub fn z_integral(f: &FunctionSpec, dom: &Domain) -> Result<IntegralResult> {
    check_dims(f, dom)?;
    match f {
        FunctionSpec::Power(_) => z_integral_homogeneous(f, dom),
        FunctionSpec::Exp(e) => match dom {
            Domain::Box(b) => z_integral_exp(e, b),
            Domain::Zonotope(z) => z_integral_exp_zonotope(e, z),
            Domain::Simplex(s) => exponential::z_integral_exp_simplex(e, s),
        },
        FunctionSpec::SuperPoly(_) => tensor_z_integral(f, dom, TENSOR_ORDER),
    }
}

/// `∫₀¹ z^d ∫_Q f(z·x) dx dz = ∫_Q f / (q + d + 1)` for `q`-homogeneous `f`.
pub fn z_integral_homogeneous(f: &FunctionSpec, dom: &Domain) -> Result<IntegralResult> {
    let q = f.homogeneity_degree().ok_or(Error::NotHomogeneous)?;
    let inner = integrate_function(f, dom)?;
    let d = dom.dim() as f64;
    Ok(IntegralResult {
        value: inner.value / (q + d + 1.0),
        method: Method::HomogeneousShortcut,
        error_estimate: inner.error_estimate.map(|e| e / (q + d + 1.0)),
    })
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
