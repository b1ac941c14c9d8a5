//! Gaussian column ensembles and the random projection of a fixed
//! vector onto their span, together with the parallel/perpendicular
//! split of each projection against the original vector.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, project_onto_basis, ColumnSet, RealVector, DEFAULT_RANK_TOL};
use crate::rng::StreamKey;

/// Stream index bit reserved for the single rank-deficiency retry a
/// batch trial is allowed; ordinary trial indices stay below it.
const RETRY_BIT: u64 = 1 << 63;

/// Shape and stream address of one Gaussian column ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    p: usize,
    m: usize,
    seed: u64,
    stream_index: u64,
}

impl EnsembleSpec {
    pub fn new(p: usize, m: usize, seed: u64, stream_index: u64) -> Result<Self> {
        if m == 0 || m > p {
            return Err(Error::InvalidSubspaceDim { m, p });
        }
        Ok(Self {
            p,
            m,
            seed,
            stream_index,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn key(&self) -> StreamKey {
        StreamKey::with_stream(self.seed, self.stream_index)
    }
}

/// Draws `m` columns of `p` i.i.d. standard normal entries, column by
/// column. Deterministic given `(seed, stream_index)`.
pub fn sample_ensemble(spec: &EnsembleSpec) -> ColumnSet {
    let mut stream = spec.key().open();
    ColumnSet::new((0..spec.m).map(|_| stream.normal_vector(spec.p)).collect())
        .expect("spec enforces 1 <= m <= p")
}

/// Orthogonal projection of `x` onto the span of the columns.
///
/// Computed through an orthonormal basis of the columns rather than the
/// explicit normal-equations formula; the two agree on full-rank input
/// and the basis route conditions better.
pub fn project_onto_span(x: &RealVector, columns: &ColumnSet) -> Result<RealVector> {
    if x.dim() != columns.p() {
        return Err(Error::DimensionMismatch {
            expected: columns.p(),
            found: x.dim(),
        });
    }
    let basis = gram_schmidt(columns, DEFAULT_RANK_TOL)?;
    project_onto_basis(x, &basis)
}

/// Splits `v` against the direction of `x`: returns
/// `(alpha, perp) = (<v, x/||x||>, v - alpha * x/||x||)`.
pub fn decompose(x: &RealVector, v: &RealVector) -> Result<(f64, RealVector)> {
    let xhat = x.normalized()?;
    let alpha = v.inner(&xhat)?;
    let perp = v.sub(&xhat.scaled(alpha))?;
    Ok((alpha, perp))
}

/// One trial's record: the projected vector, its component along the
/// original direction, and the remainder orthogonal to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSample {
    pub px: RealVector,
    pub alpha: f64,
    pub perp: RealVector,
    pub stream_index: u64,
}

impl ProjectionSample {
    pub fn perp_norm(&self) -> f64 {
        self.perp.norm()
    }
}

/// `n` independent projection samples of `x` onto fresh `m`-column
/// Gaussian ensembles, using stream indices `0..n`.
///
/// Sample `i` depends only on `(seed, i)`, so the batch content is
/// independent of evaluation order and parallelism. A trial whose
/// ensemble is numerically rank deficient is retried once on a reserved
/// substream; a second failure aborts the batch.
pub fn sample_projection_batch(
    x: &RealVector,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<ProjectionSample>> {
    sample_projection_batch_from(x, m, n, seed, 0)
}

/// [`sample_projection_batch`] with trial `i` drawn from stream
/// `first_stream + i`, so disjoint batches can share one seed.
pub fn sample_projection_batch_from(
    x: &RealVector,
    m: usize,
    n: usize,
    seed: u64,
    first_stream: u64,
) -> Result<Vec<ProjectionSample>> {
    if x.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    if m == 0 || m > x.dim() {
        return Err(Error::InvalidSubspaceDim { m, p: x.dim() });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1"));
    }
    if first_stream.saturating_add(n as u64) >= RETRY_BIT {
        return Err(Error::InvalidParameter("stream range exhausted"));
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let stream_index = first_stream + i;
            let sample = one_projection(x, m, seed, stream_index, stream_index)?;
            Ok(sample)
        })
        .collect()
}

fn one_projection(
    x: &RealVector,
    m: usize,
    seed: u64,
    stream_index: u64,
    label: u64,
) -> Result<ProjectionSample> {
    let spec = EnsembleSpec::new(x.dim(), m, seed, stream_index)?;
    let ensemble = sample_ensemble(&spec);
    match project_onto_span(x, &ensemble) {
        Ok(px) => {
            let (alpha, perp) = decompose(x, &px)?;
            Ok(ProjectionSample {
                px,
                alpha,
                perp,
                stream_index: label,
            })
        }
        Err(Error::RankDeficient { .. }) if stream_index & RETRY_BIT == 0 => {
            one_projection(x, m, seed, stream_index | RETRY_BIT, label)
        }
        Err(e) => Err(e),
    }
}
