//! Concave upper bounds over a box: the best constant and the concave
//! envelope of a vertex-supermodular function, i.e. its piecewise-linear
//! interpolant on Kuhn's triangulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{is_supermodular_on_vertices, FunctionSpec, SUBSET_CAP};
use crate::geometry::{factorial_f64, kuhn_triangulate, nth_permutation, BoxDomain, Domain, KuhnCell};

/// Point-location slack on the box facets.
pub const BOX_TOLERANCE: f64 = 1e-12;

/// `μ ≡ F` with `F` the maximum of `f` over the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantBound {
    pub value: f64,
}

/// `F = f(v0 + u·1)`: the maximum over the box for the nondecreasing families.
pub fn constant_bound(f: &FunctionSpec, b: &BoxDomain) -> Result<ConstantBound> {
    Ok(ConstantBound {
        value: f.evaluate(&b.top())?,
    })
}

/// Maximum of the convex `f` over the corner points of any domain.
pub fn constant_bound_on(f: &FunctionSpec, dom: &Domain) -> Result<ConstantBound> {
    let mut value = f64::NEG_INFINITY;
    for p in dom.corner_points() {
        value = value.max(f.evaluate(&p)?);
    }
    Ok(ConstantBound { value })
}

/// Affine piece `x ↦ gradient·x + offset` on the image of one Kuhn cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePiece {
    pub permutation: Vec<usize>,
    pub vertices: Vec<Vec<f64>>,
    pub gradient: Vec<f64>,
    pub offset: f64,
}

impl EnvelopePiece {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.gradient.iter().zip(x).map(|(g, x)| g * x).sum::<f64>() + self.offset
    }
}

/// Piecewise-linear interpolant of `f` on the Kuhn triangulation of a box;
/// pieces are stored in lexicographic permutation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearEnvelope {
    domain: BoxDomain,
    pieces: Vec<EnvelopePiece>,
}

fn piece_for(f: &FunctionSpec, b: &BoxDomain, cell: &KuhnCell) -> Result<EnvelopePiece> {
    let d = b.dim();
    let u = b.u();
    let masks = cell.chain_masks();
    let vertices: Vec<Vec<f64>> = masks.iter().map(|&m| b.vertex(m)).collect();
    let values = vertices
        .iter()
        .map(|v| f.evaluate(v))
        .collect::<Result<Vec<f64>>>()?;
    // consecutive chain vertices differ in one coordinate by u
    let mut gradient = vec![0.0; d];
    for j in 1..=d {
        let i = (masks[j] ^ masks[j - 1]).trailing_zeros() as usize;
        gradient[i] = (values[j] - values[j - 1]) / u;
    }
    let offset = values[0] - gradient.iter().zip(b.v0()).map(|(g, v)| g * v).sum::<f64>();
    Ok(EnvelopePiece {
        permutation: cell.permutation().to_vec(),
        vertices,
        gradient,
        offset,
    })
}

/// Concave envelope of `f` over the box.
///
/// Fails with [`Error::NotSupermodular`] when `f` is not supermodular on the
/// box vertices, since the interpolant then need not be concave.
pub fn concave_envelope(f: &FunctionSpec, b: &BoxDomain) -> Result<PiecewiseLinearEnvelope> {
    if !is_supermodular_on_vertices(f, b)? {
        return Err(Error::NotSupermodular);
    }
    let d = b.dim();
    let cells = kuhn_triangulate(d)?;
    let pieces = (0..cells.len())
        .into_par_iter()
        .map(|idx| piece_for(f, b, &KuhnCell::from_permutation(nth_permutation(d, idx))))
        .collect::<Result<Vec<_>>>()?;
    Ok(PiecewiseLinearEnvelope {
        domain: b.clone(),
        pieces,
    })
}

impl PiecewiseLinearEnvelope {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn pieces(&self) -> &[EnvelopePiece] {
        &self.pieces
    }

    /// The piece whose cell contains `x`, located by sorting `(x − v0)/u`.
    pub fn piece_at(&self, x: &[f64]) -> Result<&EnvelopePiece> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !self.domain.contains(x, BOX_TOLERANCE) {
            return Err(Error::OutsideBox(x.to_vec()));
        }
        let cell = KuhnCell::locate(&self.domain.normalize(x));
        Ok(&self.pieces[cell.index()])
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self.piece_at(x)?.evaluate(x))
    }

    /// `Σ_cells vol(cell)·mean of the piece at the cell vertices`.
    pub fn integrate_by_cells(&self) -> f64 {
        let d = self.dim();
        let cell_volume = self.domain.volume() / factorial_f64(d);
        let sum: f64 = self
            .pieces
            .iter()
            .map(|p| p.vertices.iter().map(|v| p.evaluate(v)).sum::<f64>())
            .sum();
        cell_volume * sum / (d as f64 + 1.0)
    }
}

/// Free-function form of [`PiecewiseLinearEnvelope::evaluate`].
pub fn evaluate_envelope(env: &PiecewiseLinearEnvelope, x: &[f64]) -> Result<f64> {
    env.evaluate(x)
}

// Σ_S f_S / ((d+1)·C(d,|S|)) over the box vertices; the vertex average of
// the interpolant over all d! cells.
fn subset_average<G: Fn(&[f64]) -> Result<f64>>(b: &BoxDomain, value: G) -> Result<f64> {
    let d = b.dim();
    if d > SUBSET_CAP {
        return Err(Error::CombinatorialBlowup {
            what: "envelope subset sum",
            n: d,
            count: format!("2^{d} vertices"),
            cap: SUBSET_CAP,
        });
    }
    let mut binom = vec![1.0f64; d + 1];
    for k in 1..=d {
        binom[k] = binom[k - 1] * (d - k + 1) as f64 / k as f64;
    }
    let mut total = 0.0;
    for mask in 0..1u64 << d {
        let k = mask.count_ones() as usize;
        total += value(&b.vertex(mask))? / binom[k];
    }
    Ok(total / (d as f64 + 1.0))
}

/// `∫_box conc(f) dx = u^d/(d+1)! · Σ_S |S|!(d−|S|)!·f(v0 + u·1_S)`.
pub fn integrate_envelope(f: &FunctionSpec, b: &BoxDomain) -> Result<f64> {
    if !is_supermodular_on_vertices(f, b)? {
        return Err(Error::NotSupermodular);
    }
    Ok(b.volume() * subset_average(b, |x| f.evaluate(x))?)
}

/// [`integrate_envelope`] multiplied by `e^{−s}`.
pub(crate) fn integrate_envelope_scaled(f: &FunctionSpec, b: &BoxDomain, s: f64) -> Result<f64> {
    if !is_supermodular_on_vertices(f, b)? {
        return Err(Error::NotSupermodular);
    }
    Ok(b.volume() * subset_average(b, |x| f.evaluate_scaled(x, s))?)
}
