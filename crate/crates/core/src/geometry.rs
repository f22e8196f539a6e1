//! Box, zonotope and simplex domains, plus Kuhn's triangulation of the unit cube.
//!
//! Every domain is the image of a parameter cube (or, for simplices, of the
//! standard simplex reached by sorting cube coordinates) under an affine map,
//! which is what the integrators and the Monte-Carlo sampler consume.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper limit on the dimension of a materialized Kuhn triangulation.
pub const DEFAULT_KUHN_CAP: usize = 9;

/// Relative singular-value cutoff used for the zonotope rank test.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// The box `v0 + u·[0,1]^d` with `v0 > 0` and `u > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    v0: Vec<f64>,
    u: f64,
}

impl BoxDomain {
    pub fn new(v0: Vec<f64>, u: f64) -> Result<Self> {
        if v0.is_empty() {
            return Err(Error::InvalidDomain("box needs dimension d >= 1".into()));
        }
        if let Some(bad) = v0.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidDomain(format!(
                "box corner entries must be finite and > 0, got {bad}"
            )));
        }
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "box scale must be finite and > 0, got {u}"
            )));
        }
        Ok(Self { v0, u })
    }

    pub fn dim(&self) -> usize {
        self.v0.len()
    }

    pub fn v0(&self) -> &[f64] {
        &self.v0
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// The same corner with a different scale.
    pub fn with_scale(&self, u: f64) -> Result<Self> {
        Self::new(self.v0.clone(), u)
    }

    pub fn volume(&self) -> f64 {
        self.u.powi(self.dim() as i32)
    }

    /// Box vertex `v0 + u·1_S` where bit `j` of `mask` marks `j ∈ S`.
    pub fn vertex(&self, mask: u64) -> Vec<f64> {
        self.v0
            .iter()
            .enumerate()
            .map(|(j, v)| if mask >> j & 1 == 1 { v + self.u } else { *v })
            .collect()
    }

    /// The far corner `v0 + u·1`.
    pub fn top(&self) -> Vec<f64> {
        self.v0.iter().map(|v| v + self.u).collect()
    }

    /// Normalized coordinates `(x - v0)/u`.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.v0)
            .map(|(xi, vi)| (xi - vi) / self.u)
            .collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && self
                .normalize(x)
                .iter()
                .all(|t| *t >= -tol && *t <= 1.0 + tol)
    }

    pub fn to_zonotope(&self) -> ZonotopeDomain {
        let d = self.dim();
        let rows = (0..d)
            .map(|i| (0..d).map(|j| if i == j { self.u } else { 0.0 }).collect())
            .collect();
        ZonotopeDomain::new(rows, self.v0.clone()).expect("a scaled identity has full rank")
    }
}

/// The zonotope `{A·y + b : y ∈ [0,1]^n}` with `A` of full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonotopeDomain {
    a: DMatrix<f64>,
    b: Vec<f64>,
    jacobian: f64,
}

impl ZonotopeDomain {
    /// Builds the zonotope from the rows of `A` (d rows of n entries) and the offset `b`.
    pub fn new(rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidDomain("zonotope needs at least one row".into()));
        }
        let n = rows[0].len();
        if n == 0 || n > d {
            return Err(Error::InvalidDomain(format!(
                "zonotope generator matrix must be d x n with 1 <= n <= d, got {d} x {n}"
            )));
        }
        if let Some(row) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.len(),
            });
        }
        if rows.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("non-finite zonotope entry".into()));
        }
        let a = DMatrix::from_fn(d, n, |i, j| rows[i][j]);
        let sv = a.clone().svd(false, false).singular_values;
        let largest = sv.max();
        let rank = sv.iter().filter(|s| **s > RANK_TOLERANCE * largest).count();
        if largest <= 0.0 || rank < n {
            return Err(Error::RankDeficient { rank, cols: n });
        }
        // sqrt(det(AᵀA)) is the product of the singular values.
        let jacobian: f64 = sv.iter().product();
        if !(jacobian.is_finite() && jacobian > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "zonotope Jacobian factor {jacobian} is not finite and positive"
            )));
        }
        Ok(Self { a, b, jacobian })
    }

    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of generators n.
    pub fn generators(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.a.row(i).iter().copied().collect())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.a.column(j).iter().copied().collect()
    }

    /// `n`-dimensional measure of the zonotope, `sqrt(det(AᵀA))`.
    pub fn jacobian(&self) -> f64 {
        self.jacobian
    }

    /// `A·y + b`.
    pub fn map(&self, y: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                self.b[i]
                    + self
                        .a
                        .row(i)
                        .iter()
                        .zip(y)
                        .map(|(aij, yj)| aij * yj)
                        .sum::<f64>()
            })
            .collect()
    }

    /// The generator-cube corner `A·1_S + b`.
    pub fn vertex(&self, mask: u64) -> Vec<f64> {
        let y: Vec<f64> = (0..self.generators())
            .map(|j| (mask >> j & 1) as f64)
            .collect();
        self.map(&y)
    }

    /// `Aᵀc`, the linear form pulled back to the parameter cube.
    pub fn pull_back(&self, c: &[f64]) -> Vec<f64> {
        (0..self.generators())
            .map(|j| self.a.column(j).iter().zip(c).map(|(a, ci)| a * ci).sum())
            .collect()
    }
}

/// `sqrt(det(AᵀA))` of a validated zonotope.
pub fn zonotope_jacobian(z: &ZonotopeDomain) -> f64 {
    z.jacobian()
}

/// A full-dimensional simplex given by its `d + 1` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexDomain {
    vertices: Vec<Vec<f64>>,
    volume: f64,
}

impl SimplexDomain {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidDomain("simplex needs d + 1 vertices".into()));
        };
        let d = first.len();
        if d == 0 || vertices.len() != d + 1 {
            return Err(Error::InvalidDomain(format!(
                "simplex in R^{d} needs {} vertices, got {}",
                d + 1,
                vertices.len()
            )));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("non-finite simplex vertex".into()));
        }
        let edges = DMatrix::from_fn(d, d, |i, j| vertices[j + 1][i] - vertices[0][i]);
        let scale: f64 = (0..d).map(|j| edges.column(j).norm()).product();
        let det = edges.determinant().abs();
        if !(det > 1e-12 * scale) {
            return Err(Error::InvalidDomain(
                "simplex vertices are affinely dependent".into(),
            ));
        }
        let volume = det / factorial_f64(d);
        Ok(Self { vertices, volume })
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Maps a point of the unit cube onto the simplex by sorting its
    /// coordinates; the map is `d!`-to-one and measure-preserving up to the
    /// constant factor `d!·volume`.
    pub fn map_from_cube(&self, y: &[f64]) -> Vec<f64> {
        let mut t = y.to_vec();
        t.sort_by(|a, b| b.total_cmp(a));
        let mut x = self.vertices[0].clone();
        for (k, tk) in t.iter().enumerate() {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += tk * (self.vertices[k + 1][i] - self.vertices[k][i]);
            }
        }
        x
    }
}

/// Any of the supported integration domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub enum Domain {
    Box(BoxDomain),
    Zonotope(ZonotopeDomain),
    Simplex(SimplexDomain),
}

impl Domain {
    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box(b) => b.dim(),
            Domain::Zonotope(z) => z.dim(),
            Domain::Simplex(s) => s.dim(),
        }
    }

    /// Dimension of the parameter cube sampled by [`Domain::map_from_cube`].
    pub fn param_dim(&self) -> usize {
        match self {
            Domain::Box(b) => b.dim(),
            Domain::Zonotope(z) => z.generators(),
            Domain::Simplex(s) => s.dim(),
        }
    }

    /// Measure of the domain in its own dimension.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box(b) => b.volume(),
            Domain::Zonotope(z) => z.jacobian(),
            Domain::Simplex(s) => s.volume(),
        }
    }

    /// Pushes a uniform point of `[0,1]^param_dim` to a uniform point of the domain.
    pub fn map_from_cube(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Domain::Box(b) => b.v0.iter().zip(y).map(|(v, t)| v + b.u * t).collect(),
            Domain::Zonotope(z) => z.map(y),
            Domain::Simplex(s) => s.map_from_cube(y),
        }
    }

    /// Vertex candidates: every corner of the parameter cube image (box,
    /// zonotope) or the simplex vertices.
    pub fn corner_points(&self) -> Vec<Vec<f64>> {
        match self {
            Domain::Box(b) => (0..1u64 << b.dim()).map(|m| b.vertex(m)).collect(),
            Domain::Zonotope(z) => (0..1u64 << z.generators()).map(|m| z.vertex(m)).collect(),
            Domain::Simplex(s) => s.vertices.clone(),
        }
    }

    pub fn as_box(&self) -> Option<&BoxDomain> {
        match self {
            Domain::Box(b) => Some(b),
            _ => None,
        }
    }
}

impl From<BoxDomain> for Domain {
    fn from(b: BoxDomain) -> Self {
        Domain::Box(b)
    }
}

impl From<ZonotopeDomain> for Domain {
    fn from(z: ZonotopeDomain) -> Self {
        Domain::Zonotope(z)
    }
}

impl From<SimplexDomain> for Domain {
    fn from(s: SimplexDomain) -> Self {
        Domain::Simplex(s)
    }
}

/// Wire format of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Box {
        v0: Vec<f64>,
        u: f64,
    },
    Zonotope {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Simplex {
        vertices: Vec<Vec<f64>>,
    },
}

impl TryFrom<DomainSpec> for Domain {
    type Error = Error;

    fn try_from(spec: DomainSpec) -> Result<Self> {
        Ok(match spec {
            DomainSpec::Box { v0, u } => Domain::Box(BoxDomain::new(v0, u)?),
            DomainSpec::Zonotope { a, b } => Domain::Zonotope(ZonotopeDomain::new(a, b)?),
            DomainSpec::Simplex { vertices } => Domain::Simplex(SimplexDomain::new(vertices)?),
        })
    }
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Box(b) => DomainSpec::Box { v0: b.v0, u: b.u },
            Domain::Zonotope(z) => DomainSpec::Zonotope {
                a: z.rows(),
                b: z.b,
            },
            Domain::Simplex(s) => DomainSpec::Simplex {
                vertices: s.vertices,
            },
        }
    }
}

/// One simplex `{y : 0 <= y_{i1} <= ... <= y_{in} <= 1}` of Kuhn's triangulation.
///
/// Vertex `w_j` of the chain sets the top `j` coordinates `i_{n-j+1}, ..., i_n`
/// to one, so `w_0 = 0` and `w_n = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct KuhnCell {
    perm: Vec<usize>,
    chain: Vec<u64>,
}

impl KuhnCell {
    /// Cell of a permutation of `0..n` (ascending coordinate order).
    pub fn from_permutation(perm: Vec<usize>) -> Self {
        let n = perm.len();
        let mut chain = Vec::with_capacity(n + 1);
        let mut mask = 0u64;
        chain.push(mask);
        for &i in perm.iter().rev() {
            mask |= 1 << i;
            chain.push(mask);
        }
        Self { perm, chain }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Chain vertices `w_0, ..., w_n` as bit masks.
    pub fn chain_masks(&self) -> &[u64] {
        &self.chain
    }

    /// Chain vertices `w_0, ..., w_n` as 0/1 vectors.
    pub fn chain_vertices(&self) -> Vec<Vec<u8>> {
        let n = self.dim();
        self.chain
            .iter()
            .map(|m| (0..n).map(|i| (m >> i & 1) as u8).collect())
            .collect()
    }

    pub fn volume(&self) -> f64 {
        1.0 / factorial_f64(self.dim())
    }

    /// Membership in the closed cell, with slack `tol`.
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        if y.len() != self.dim() {
            return false;
        }
        let ordered: Vec<f64> = self.perm.iter().map(|&i| y[i]).collect();
        ordered[0] >= -tol
            && ordered[ordered.len() - 1] <= 1.0 + tol
            && ordered.windows(2).all(|w| w[0] <= w[1] + tol)
    }

    /// Position of this cell in lexicographic permutation order.
    pub fn index(&self) -> usize {
        permutation_rank(&self.perm)
    }

    /// The cell containing `y`, found by sorting coordinates (ties by index).
    pub fn locate(y: &[f64]) -> Self {
        let mut perm: Vec<usize> = (0..y.len()).collect();
        perm.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
        Self::from_permutation(perm)
    }
}

/// Lazily enumerated Kuhn triangulation of `[0,1]^n`, in lexicographic
/// permutation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KuhnTriangulation {
    n: usize,
    count: usize,
}

impl KuhnTriangulation {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of cells, `n!`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The cell with lexicographic rank `index`.
    pub fn cell(&self, index: usize) -> KuhnCell {
        KuhnCell::from_permutation(nth_permutation(self.n, index))
    }

    pub fn iter(&self) -> impl Iterator<Item = KuhnCell> + '_ {
        (0..self.count).map(move |k| self.cell(k))
    }
}

impl IntoIterator for KuhnTriangulation {
    type Item = KuhnCell;
    type IntoIter = Box<dyn Iterator<Item = KuhnCell>>;

    fn into_iter(self) -> Self::IntoIter {
        Box::new((0..self.count).map(move |k| self.cell(k)))
    }
}

pub fn kuhn_triangulate(n: usize) -> Result<KuhnTriangulation> {
    kuhn_triangulate_with_cap(n, DEFAULT_KUHN_CAP)
}

pub fn kuhn_triangulate_with_cap(n: usize, cap: usize) -> Result<KuhnTriangulation> {
    if n == 0 {
        return Err(Error::InvalidDomain(
            "Kuhn triangulation needs n >= 1".into(),
        ));
    }
    if n > cap || n > 20 {
        return Err(Error::CombinatorialBlowup {
            what: "Kuhn triangulation",
            n,
            count: format!("{n}! = {}", factorial_u128(n)),
            cap,
        });
    }
    Ok(KuhnTriangulation {
        n,
        count: factorial_u128(n) as usize,
    })
}

/// Image of a Kuhn cell under `y ↦ v0 + u·y`.
pub fn affine_image_of_cell(cell: &KuhnCell, domain: &BoxDomain) -> Result<SimplexDomain> {
    if cell.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: cell.dim(),
        });
    }
    let vertices = cell.chain.iter().map(|&m| domain.vertex(m)).collect();
    SimplexDomain::new(vertices)
}

/// The `index`-th permutation of `0..n` in lexicographic order (factorial
/// number system).
pub fn nth_permutation(n: usize, mut index: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let block = factorial_u128(k) as usize;
        out.push(pool.remove(index / block));
        index %= block;
    }
    out
}

/// Inverse of [`nth_permutation`].
pub fn permutation_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0usize;
    for (pos, &p) in perm.iter().enumerate() {
        let smaller_later = perm[pos + 1..].iter().filter(|&&q| q < p).count();
        rank += smaller_later * factorial_u128(n - 1 - pos) as usize;
    }
    rank
}

pub(crate) fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub(crate) fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_interval_is_one_cell() {
        let t = kuhn_triangulate(1).unwrap();
        assert_eq!(t.len(), 1);
        let cell = t.cell(0);
        assert_eq!(cell.chain_vertices(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn square_has_two_half_cells() {
        let t = kuhn_triangulate(2).unwrap();
        assert_eq!(t.len(), 2);
        let total: f64 = t.iter().map(|c| c.volume()).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn random_points_land_in_exactly_one_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=7 {
            let t = kuhn_triangulate(n).unwrap();
            let cells: Vec<KuhnCell> = t.iter().collect();
            let trials = if n <= 5 { 10_000 } else { 500 };
            for _ in 0..trials {
                let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
                // independent oracle: sort the coordinates
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap());
                let hits: Vec<&KuhnCell> =
                    cells.iter().filter(|c| c.contains(&y, 0.0)).collect();
                assert_eq!(hits.len(), 1, "n={n}, y={y:?}");
                assert_eq!(hits[0].permutation(), &order[..]);
                assert_eq!(KuhnCell::locate(&y), *hits[0]);
            }
        }
    }

    #[test]
    fn chains_are_monotone() {
        for n in 1..=6 {
            for cell in kuhn_triangulate(n).unwrap().iter() {
                let w = cell.chain_vertices();
                assert_eq!(w.len(), n + 1);
                for (j, wj) in w.iter().enumerate() {
                    assert_eq!(wj.iter().filter(|b| **b == 1).count(), j);
                    if j > 0 {
                        assert!(w[j - 1].iter().zip(wj).all(|(a, b)| a <= b));
                    }
                }
            }
        }
    }

    #[test]
    fn lexicographic_rank_round_trips() {
        let t = kuhn_triangulate(5).unwrap();
        let mut prev: Option<Vec<usize>> = None;
        for (k, cell) in t.iter().enumerate() {
            assert_eq!(cell.index(), k);
            if let Some(p) = prev {
                assert!(p < cell.permutation().to_vec());
            }
            prev = Some(cell.permutation().to_vec());
        }
    }

    #[test]
    fn cap_reports_factorial() {
        let err = kuhn_triangulate(10).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("10! = 3628800"), "{msg}");
        assert!(kuhn_triangulate_with_cap(10, 10).is_ok());
        assert!(kuhn_triangulate(0).is_err());
    }

    #[test]
    fn image_of_unit_interval() {
        let b = BoxDomain::new(vec![1.0], 1.0).unwrap();
        let cell = kuhn_triangulate(1).unwrap().cell(0);
        let s = affine_image_of_cell(&cell, &b).unwrap();
        assert_eq!(s.vertices(), &[vec![1.0], vec![2.0]]);
        assert_eq!(s.volume(), 1.0);
    }

    #[test]
    fn image_volumes_follow_scaling_law() {
        let b = BoxDomain::new(vec![1.0, 1.0], 2.0).unwrap();
        for cell in kuhn_triangulate(2).unwrap().iter() {
            let s = affine_image_of_cell(&cell, &b).unwrap();
            assert!((s.volume() - 2.0).abs() < 1e-12);
        }
        let b3 = BoxDomain::new(vec![1.0; 3], 1.0).unwrap();
        let total: f64 = kuhn_triangulate(3)
            .unwrap()
            .iter()
            .map(|c| affine_image_of_cell(&c, &b3).unwrap().volume())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn image_rejects_dimension_mismatch() {
        let b = BoxDomain::new(vec![1.0, 1.0], 1.0).unwrap();
        let cell = kuhn_triangulate(3).unwrap().cell(0);
        assert!(matches!(
            affine_image_of_cell(&cell, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn jacobians() {
        let id = ZonotopeDomain::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        assert!((zonotope_jacobian(&id) - 1.0).abs() < 1e-14);
        let three = ZonotopeDomain::new(vec![vec![3.0, 0.0], vec![0.0, 3.0]], vec![0.0, 0.0]).unwrap();
        assert!((zonotope_jacobian(&three) - 9.0).abs() < 1e-13);
        let col = ZonotopeDomain::new(vec![vec![1.0], vec![1.0]], vec![0.0, 0.0]).unwrap();
        assert!((zonotope_jacobian(&col) - 2f64.sqrt()).abs() < 1e-14);
        let b = BoxDomain::new(vec![1.0, 2.0, 3.0], 1.5).unwrap();
        assert!((b.to_zonotope().jacobian() - 1.5f64.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn rank_deficient_zonotope_is_rejected() {
        let err = ZonotopeDomain::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![0.0, 0.0]);
        assert!(matches!(err, Err(Error::RankDeficient { rank: 1, cols: 2 })));
        assert!(ZonotopeDomain::new(vec![vec![1.0, 0.0]], vec![0.0]).is_err());
    }

    #[test]
    fn invalid_boxes_and_simplices() {
        assert!(BoxDomain::new(vec![], 1.0).is_err());
        assert!(BoxDomain::new(vec![0.0], 1.0).is_err());
        assert!(BoxDomain::new(vec![1.0], 0.0).is_err());
        assert!(SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        let s = SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((s.volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_json_round_trip() {
        let text = r#"{"kind":"zonotope","A":[[2,0],[0,2]],"b":[1,1]}"#;
        let d: Domain = serde_json::from_str(text).unwrap();
        assert_eq!(d.volume(), 4.0);
        let back = serde_json::to_string(&d).unwrap();
        let again: Domain = serde_json::from_str(&back).unwrap();
        assert_eq!(d, again);
        let b: Domain = serde_json::from_str(r#"{"kind":"box","v0":[1,2],"u":0.5}"#).unwrap();
        assert_eq!(b.as_box().unwrap().top(), vec![1.5, 2.5]);
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"box","v0":[-1],"u":1}"#).is_err());
    }

    #[test]
    fn simplex_cube_map_lands_inside() {
        let s = SimplexDomain::new(vec![vec![1.0, 1.0], vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let d = Domain::Simplex(s);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let y = [rng.random::<f64>(), rng.random::<f64>()];
            let x = d.map_from_cube(&y);
            // barycentric check for the triangle (1,1),(3,1),(1,2)
            let l1 = (x[0] - 1.0) / 2.0;
            let l2 = x[1] - 1.0;
            assert!(l1 >= -1e-12 && l2 >= -1e-12 && l1 + l2 <= 1.0 + 1e-12);
        }
    }
}
