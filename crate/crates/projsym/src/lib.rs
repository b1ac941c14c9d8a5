//! Random Gaussian subspace projections of a fixed vector, the
//! isometries that fix that vector, and a verification engine for the
//! symmetries of the projection's distribution.
//!
//! A fixed vector `x` in `R^p` is projected onto the span of `m`
//! independent standard Gaussian columns. The distribution of the
//! projected vector is symmetric under two families of isometries:
//! reflection across the line through `x` and every rotation about the
//! axis of `x`. This crate provides
//!
//! * the projection machinery ([`projection`], backed by [`linalg`]),
//! * the two operator families with Haar sampling of the rotation
//!   block ([`isometry`]),
//! * exact equivariance checks whose residuals vanish up to roundoff
//!   ([`checks`]),
//! * Monte Carlo equality-in-distribution batteries with negative
//!   controls ([`stats`], [`suite`]),
//! * and a command-line front end emitting CSV dumps and JSON reports
//!   ([`cli`]).
//!
//! Every random draw flows through seeded, indexed substreams
//! ([`rng`]), so runs reproduce bit for bit regardless of parallelism.
//!
//! ```
//! use projsym::{decompose, sample_projection_batch, RealVector};
//!
//! let x = RealVector::new(vec![1.0, 0.0, 0.0, 0.0])?;
//! let samples = sample_projection_batch(&x, 2, 100, 7)?;
//! assert_eq!(samples.len(), 100);
//! // Each projection splits into a component along x and a remainder
//! // orthogonal to it.
//! for s in &samples {
//!     let (alpha, perp) = decompose(&x, &s.px)?;
//!     assert_eq!(alpha, s.alpha);
//!     assert!(perp.inner(&x)?.abs() <= 1e-10 * s.px.norm());
//! }
//! # Ok::<(), projsym::Error>(())
//! ```

pub mod checks;
pub mod cli;
pub mod error;
pub mod isometry;
pub mod linalg;
pub mod projection;
pub mod report;
pub mod rng;
pub mod stats;
pub mod suite;

pub use checks::{
    check_gs_equivariance, check_reflection_equivariance, check_rotation_equivariance,
};
pub use error::{Error, Result};
pub use isometry::{
    haar_special_orthogonal, AxisRotation, Isometry, LineReflection, OrthogonalFrame,
};
pub use linalg::{
    gram_schmidt, project_onto_basis, ColumnSet, OrthonormalBasis, RealVector, SquareMatrix,
    DEFAULT_RANK_TOL,
};
pub use projection::{
    decompose, project_onto_span, sample_ensemble, sample_projection_batch,
    sample_projection_batch_from, EnsembleSpec, ProjectionSample,
};
pub use report::{ExactCheckResult, ReportConfig, TestReport};
pub use rng::{RandomStream, StreamKey};
pub use stats::{direction_uniformity, energy_two_sample, ks_two_sample, StatTestResult};
pub use suite::{
    run_exact_tier, run_statistical_suite, SuiteParams, TransformKind, DEFAULT_ALPHA,
    DEFAULT_PERMUTATIONS, ENERGY_SIDE_CAP, EXACT_TOL,
};
