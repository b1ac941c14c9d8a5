//! The two linear isometries that fix a data vector: reflection across
//! the line through it and rotation about it, plus Haar sampling of the
//! rotation's special-orthogonal block.
//!
//! A rotation about the unit axis `v1` is represented as
//! `V * diag(1, Q) * V^T`, where `V` is an orthogonal frame whose first
//! column is `v1` and `Q` is a `(p-1) x (p-1)` special-orthogonal block
//! acting on the coordinates orthogonal to the axis. The product is
//! never materialized; applying the operator costs three `O(p^2)`
//! passes against the vector.

use crate::error::{Error, Result};
use crate::linalg::{
    axpy, dot, gram_schmidt, ColumnSet, RealVector, SquareMatrix, DEFAULT_RANK_TOL,
};
use crate::rng::RandomStream;

/// Orthogonality and determinant slack accepted from caller-supplied
/// rotation blocks.
pub const BLOCK_TOL: f64 = 1e-8;

/// A linear map of `R^p` that preserves inner products.
pub trait Isometry {
    fn apply(&self, y: &RealVector) -> Result<RealVector>;

    /// Applies the map to every column, preserving order.
    fn apply_columns(&self, cols: &ColumnSet) -> Result<ColumnSet> {
        cols.try_map(|c| self.apply(c))
    }
}

/// Reflection across the line spanned by a unit axis:
/// `y -> 2 <y, axis> axis - y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineReflection {
    axis: RealVector,
}

impl LineReflection {
    /// Normalizes `x` into the reflection axis; the zero vector has no
    /// direction and is rejected.
    pub fn about(x: &RealVector) -> Result<Self> {
        Ok(Self {
            axis: x.normalized()?,
        })
    }

    pub fn axis(&self) -> &RealVector {
        &self.axis
    }

    pub fn reflect(&self, y: &RealVector) -> Result<RealVector> {
        let c = 2.0 * y.inner(&self.axis)?;
        let mut out = y.coords().iter().map(|v| -v).collect::<Vec<_>>();
        axpy(&mut out, c, self.axis.coords());
        Ok(RealVector::new(out).expect("reflection of a finite vector is finite"))
    }
}

impl Isometry for LineReflection {
    fn apply(&self, y: &RealVector) -> Result<RealVector> {
        self.reflect(y)
    }
}

/// An orthogonal `p x p` coordinate frame stored as columns; the first
/// column is the axis the frame was built around.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalFrame {
    columns: Vec<RealVector>,
}

impl OrthogonalFrame {
    /// Completes `x / ||x||` to an orthonormal frame with that vector
    /// as its first column.
    ///
    /// Columns `2..p` come from one elementary reflector exchanging the
    /// first coordinate axis with the normalized input; the reflector
    /// direction `e1 + sign(x1) * x` keeps the construction away from
    /// cancellation for every input. When the normalized input already
    /// equals the first coordinate axis to machine precision, the
    /// identity frame is returned.
    pub fn about_axis(x: &RealVector) -> Result<Self> {
        let axis = x.normalized()?;
        let p = axis.dim();
        if p == 1 {
            return Ok(Self {
                columns: vec![axis],
            });
        }

        let e1_distance: f64 = {
            let mut d = (axis.coords()[0] - 1.0).powi(2);
            for c in &axis.coords()[1..] {
                d += c * c;
            }
            d.sqrt()
        };
        if e1_distance <= 1e-14 {
            let columns = (0..p)
                .map(|k| RealVector::basis_vector(p, k).expect("k < p"))
                .collect();
            return Ok(Self { columns });
        }

        let sign = if axis.coords()[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut w = axis.scaled(sign).into_coords();
        w[0] += 1.0;
        let wn = dot(&w, &w).sqrt();
        for wi in &mut w {
            *wi /= wn;
        }

        // Column j >= 2 is the reflection of e_j across the line through w.
        let mut columns = Vec::with_capacity(p);
        columns.push(axis);
        for j in 1..p {
            let mut col = vec![0.0; p];
            col[j] = -1.0;
            axpy(&mut col, 2.0 * w[j], &w);
            columns.push(RealVector::from_raw(col));
        }
        Ok(Self { columns })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[RealVector] {
        &self.columns
    }

    /// The axis the frame was built around.
    pub fn first_column(&self) -> &RealVector {
        &self.columns[0]
    }

    /// Coordinates of `y` in the frame: `V^T y`.
    pub fn to_coords(&self, y: &RealVector) -> Result<Vec<f64>> {
        if y.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: y.dim(),
            });
        }
        Ok(self
            .columns
            .iter()
            .map(|c| dot(c.coords(), y.coords()))
            .collect())
    }

    /// The vector with frame coordinates `coords`: `V coords`.
    pub fn from_coords(&self, coords: &[f64]) -> Result<RealVector> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        for (c, col) in coords.iter().zip(&self.columns) {
            axpy(&mut out, *c, col.coords());
        }
        Ok(RealVector::from_raw(out))
    }

    pub fn to_matrix(&self) -> SquareMatrix {
        SquareMatrix::from_columns(&self.columns).expect("frame columns are square")
    }
}

/// Draws a Haar-distributed `k x k` special-orthogonal matrix.
///
/// A `k x k` array of i.i.d. standard normals is orthonormalized column
/// by column; the positive residual norms make this the QR factor with
/// positive diagonal, which is Haar on the full orthogonal group. If
/// the determinant is -1 the last column is negated, mapping that coset
/// onto the special orthogonal group measure-preservingly.
///
/// Deterministic given the stream state.
pub fn haar_special_orthogonal(k: usize, stream: &mut RandomStream) -> SquareMatrix {
    if k == 0 {
        return SquareMatrix::identity(0);
    }
    for _ in 0..8 {
        let cols = ColumnSet::new((0..k).map(|_| stream.normal_vector(k)).collect())
            .expect("k columns of dimension k");
        let basis = match gram_schmidt(&cols, DEFAULT_RANK_TOL) {
            Ok(b) => b,
            // A numerically singular Gaussian draw: try the next draw
            // from the same stream.
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => unreachable!("gram_schmidt on a valid square draw: {e}"),
        };
        let mut q = SquareMatrix::from_columns(basis.vectors()).expect("square basis");
        if q.determinant() < 0.0 {
            for i in 0..k {
                let v = -q.get(i, k - 1);
                q.set(i, k - 1, v);
            }
        }
        return q;
    }
    unreachable!("eight consecutive singular Gaussian draws")
}

/// Rotation of `R^p` about an axis: `V * diag(1, Q) * V^T` with the
/// axis as the first frame column and `Q` special-orthogonal on the
/// orthogonal complement. Fixes the axis; preserves inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRotation {
    frame: OrthogonalFrame,
    block: SquareMatrix,
}

impl AxisRotation {
    /// Validates the block (orthogonality and determinant `+1`, both at
    /// [`BLOCK_TOL`]) and attaches it to the frame built around `x`.
    pub fn about(x: &RealVector, block: SquareMatrix) -> Result<Self> {
        let frame = OrthogonalFrame::about_axis(x)?;
        let k = frame.dim() - 1;
        if block.dim() != k {
            return Err(Error::BadBlock(format!(
                "block must be {k} x {k} for a {p}-dimensional axis, got {got} x {got}",
                p = frame.dim(),
                got = block.dim()
            )));
        }
        let gram_deviation = block.gram().max_abs_diff(&SquareMatrix::identity(k));
        if gram_deviation > BLOCK_TOL {
            return Err(Error::BadBlock(format!(
                "columns are not orthonormal: max Gram deviation {gram_deviation:e}"
            )));
        }
        let det = block.determinant();
        if (det - 1.0).abs() > BLOCK_TOL {
            return Err(Error::BadBlock(format!(
                "determinant {det} is not +1: not a proper rotation"
            )));
        }
        Ok(Self { frame, block })
    }

    /// A rotation about `x` with a fresh Haar-distributed block.
    pub fn haar_about(x: &RealVector, stream: &mut RandomStream) -> Result<Self> {
        let frame = OrthogonalFrame::about_axis(x)?;
        let block = haar_special_orthogonal(frame.dim() - 1, stream);
        Ok(Self { frame, block })
    }

    /// The unit axis the rotation fixes (first frame column).
    pub fn axis(&self) -> &RealVector {
        self.frame.first_column()
    }

    pub fn frame(&self) -> &OrthogonalFrame {
        &self.frame
    }

    pub fn block(&self) -> &SquareMatrix {
        &self.block
    }

    /// Applies `V * diag(1, Q) * V^T` as three passes against `y`.
    pub fn rotate(&self, y: &RealVector) -> Result<RealVector> {
        let mut coords = self.frame.to_coords(y)?;
        let rotated_tail = self.block.matvec(&coords[1..]);
        coords[1..].copy_from_slice(&rotated_tail);
        self.frame.from_coords(&coords)
    }

    /// The inverse rotation about the same axis: the block transposes.
    pub fn inverse(&self) -> Self {
        Self {
            frame: self.frame.clone(),
            block: self.block.transpose(),
        }
    }

    /// Materializes the operator as the explicit matrix product
    /// `V * diag(1, Q) * V^T`. Intended for oracle comparisons against
    /// [`AxisRotation::rotate`]; the product is otherwise never formed.
    pub fn to_matrix(&self) -> SquareMatrix {
        let p = self.frame.dim();
        let v = self.frame.to_matrix();
        let mut middle = SquareMatrix::identity(p);
        for i in 0..p - 1 {
            for j in 0..p - 1 {
                middle.set(i + 1, j + 1, self.block.get(i, j));
            }
        }
        v.mul(&middle).mul(&v.transpose())
    }
}

impl Isometry for AxisRotation {
    fn apply(&self, y: &RealVector) -> Result<RealVector> {
        self.rotate(y)
    }
}
