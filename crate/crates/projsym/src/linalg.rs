//! Dense real vectors, ordered column sets, and numerically stable
//! orthonormalization.
//!
//! Everything else in the crate is built on the four operations here:
//! inner products, norms, Gram-Schmidt orthonormalization, and
//! projection onto an orthonormal basis. All arithmetic is plain `f64`;
//! values are immutable once constructed, so they are safe to share
//! across threads.

use crate::error::{Error, Result};

/// Relative residual-norm threshold below which a column counts as
/// numerically dependent on the columns before it.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Entrywise Gram-matrix deviation the orthonormalizer guarantees.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

/// A `p`-dimensional real coordinate vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    coords: Vec<f64>,
}

impl RealVector {
    /// Rejects empty coordinate lists and non-finite entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { coords })
    }

    /// Internal constructor for arithmetic whose inputs were already
    /// validated.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p])
    }

    /// The `k`-th standard basis vector of `R^p` (0-based `k`).
    pub fn basis_vector(p: usize, k: usize) -> Result<Self> {
        if k >= p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: k,
            });
        }
        let mut coords = vec![0.0; p];
        coords[k] = 1.0;
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Euclidean inner product `<a, b>`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(dot(&self.coords, &other.coords))
    }

    /// Euclidean norm; zero exactly when the vector is zero.
    pub fn norm(&self) -> f64 {
        dot(&self.coords, &self.coords).sqrt()
    }

    /// `x / ||x||`; fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.coords.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_raw(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_raw(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `v += c * u`
pub(crate) fn axpy(v: &mut [f64], c: f64, u: &[f64]) {
    debug_assert_eq!(v.len(), u.len());
    for (vi, ui) in v.iter_mut().zip(u) {
        *vi += c * ui;
    }
}

/// An ordered list of `m` columns in `R^p`, `1 <= m <= p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSet {
    columns: Vec<RealVector>,
}

impl ColumnSet {
    pub fn new(columns: Vec<RealVector>) -> Result<Self> {
        let m = columns.len();
        let p = match columns.first() {
            Some(c) => c.dim(),
            None => return Err(Error::InvalidSubspaceDim { m: 0, p: 0 }),
        };
        for c in &columns {
            if c.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: c.dim(),
                });
            }
        }
        if m > p {
            return Err(Error::InvalidSubspaceDim { m, p });
        }
        Ok(Self { columns })
    }

    pub fn p(&self) -> usize {
        self.columns[0].dim()
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[RealVector] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &RealVector {
        &self.columns[j]
    }

    /// Applies `f` to every column in order, keeping the set shape.
    pub fn try_map<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(&RealVector) -> Result<RealVector>,
    {
        let mapped = self
            .columns
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Self::new(mapped)
    }
}

/// `k` orthonormal vectors in `R^p`, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<RealVector>,
    tol: f64,
}

impl OrthonormalBasis {
    /// Checks `|<u_i, u_j> - d_ij| <= tol` for every pair before
    /// accepting the vectors.
    pub fn validated(vectors: Vec<RealVector>, tol: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidSubspaceDim { m: 0, p: 0 });
        }
        let p = vectors[0].dim();
        for v in &vectors {
            if v.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: v.dim(),
                });
            }
        }
        for i in 0..vectors.len() {
            for j in i..vectors.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                let deviation = (dot(vectors[i].coords(), vectors[j].coords()) - target).abs();
                if deviation > tol {
                    return Err(Error::NotOrthonormal { i, j, deviation });
                }
            }
        }
        Ok(Self { vectors, tol })
    }

    pub fn vectors(&self) -> &[RealVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    /// The tolerance the basis was validated at.
    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// Orthonormalizes the columns in order.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass. The output
/// spans the same prefix subspaces as the input: for every `j`,
/// `span(u_1..u_j) = span(col_1..col_j)`. The result is a deterministic
/// function of the input order.
///
/// Fails with [`Error::RankDeficient`] (carrying the 1-based column
/// position) when a column's residual norm falls to
/// `rank_tol * max column norm` or below.
pub fn gram_schmidt(cols: &ColumnSet, rank_tol: f64) -> Result<OrthonormalBasis> {
    if rank_tol <= 0.0 {
        return Err(Error::InvalidParameter("rank_tol must be positive"));
    }
    let scale = cols
        .columns()
        .iter()
        .map(RealVector::norm)
        .fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols.m());
    for (j, col) in cols.columns().iter().enumerate() {
        let mut v = col.coords().to_vec();
        for _ in 0..2 {
            for u in &basis {
                let c = dot(&v, u);
                axpy(&mut v, -c, u);
            }
        }
        let r = dot(&v, &v).sqrt();
        if r <= rank_tol * scale {
            return Err(Error::RankDeficient { column: j + 1 });
        }
        for vi in &mut v {
            *vi /= r;
        }
        basis.push(v);
    }
    OrthonormalBasis::validated(
        basis.into_iter().map(RealVector::from_raw).collect(),
        ORTHONORMALITY_TOL,
    )
}

/// Orthogonal projection of `x` onto the span of the basis:
/// the sum of `<x, u_j> u_j` over the basis vectors.
pub fn project_onto_basis(x: &RealVector, basis: &OrthonormalBasis) -> Result<RealVector> {
    if x.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: x.dim(),
        });
    }
    let mut out = vec![0.0; x.dim()];
    for u in basis.vectors() {
        let c = dot(x.coords(), u.coords());
        axpy(&mut out, c, u.coords());
    }
    Ok(RealVector::from_raw(out))
}

/// A dense `dim x dim` matrix in row-major order. `dim = 0` is allowed
/// and behaves as the unique empty matrix (determinant 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[RealVector]) -> Result<Self> {
        let dim = columns.len();
        for c in columns {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
        }
        let mut m = Self::zeros(dim);
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.coords().iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }

    /// Rotation by `theta` in the `(i, j)` coordinate plane, identity
    /// elsewhere. A convenient way to build explicit special-orthogonal
    /// blocks.
    pub fn planar_rotation(dim: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        if i >= dim || j >= dim || i == j {
            return Err(Error::InvalidParameter(
                "planar rotation needs two distinct in-range coordinates",
            ));
        }
        let mut m = Self::identity(dim);
        let (c, s) = (theta.cos(), theta.sin());
        m.set(i, i, c);
        m.set(j, j, c);
        m.set(i, j, -s);
        m.set(j, i, s);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.get(i, k);
                if a != 0.0 {
                    for j in 0..self.dim {
                        let v = out.get(i, j) + a * other.get(k, j);
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    /// `A^T A`, the Gram matrix of the columns.
    pub fn gram(&self) -> Self {
        self.transpose().mul(self)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Determinant by LU factorization with partial pivoting.
    /// Well-conditioned for the near-orthogonal inputs it is used on.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 1.0;
        }
        let mut lu = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[k * n + k].abs();
            for r in (k + 1)..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot * n + j);
                }
                det = -det;
            }
            let d = lu[k * n + k];
            det *= d;
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / d;
                lu[r * n + k] = factor;
                for j in (k + 1)..n {
                    lu[r * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        det
    }
}
