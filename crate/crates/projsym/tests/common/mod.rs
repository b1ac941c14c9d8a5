//! Test-side oracles, kept independent of the library's computation
//! paths.
//!
//! Each integration test binary compiles its own copy, so not every
//! helper is used everywhere.
#![allow(dead_code)]

use projsym::{ColumnSet, RealVector};

/// Projection of `x` onto the span of the columns through the explicit
/// normal-equations formula `E (E^T E)^{-1} E^T x`, solved by Gaussian
/// elimination with partial pivoting. Use at small `p`, `m` only.
pub fn explicit_projection(x: &RealVector, e: &ColumnSet) -> RealVector {
    let m = e.m();
    // Gram matrix E^T E and right-hand side E^T x.
    let mut a = vec![0.0f64; m * m];
    let mut rhs = vec![0.0f64; m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = e.column(i).inner(e.column(j)).unwrap();
        }
        rhs[i] = e.column(i).inner(x).unwrap();
    }
    // Solve (E^T E) c = E^T x.
    for k in 0..m {
        let pivot = (k..m)
            .max_by(|&r, &s| {
                a[r * m + k]
                    .abs()
                    .partial_cmp(&a[s * m + k].abs())
                    .unwrap()
            })
            .unwrap();
        if pivot != k {
            for j in 0..m {
                a.swap(k * m + j, pivot * m + j);
            }
            rhs.swap(k, pivot);
        }
        assert!(a[k * m + k] != 0.0, "singular Gram matrix in oracle");
        for r in (k + 1)..m {
            let f = a[r * m + k] / a[k * m + k];
            for j in k..m {
                a[r * m + j] -= f * a[k * m + j];
            }
            rhs[r] -= f * rhs[k];
        }
    }
    let mut c = vec![0.0f64; m];
    for k in (0..m).rev() {
        let mut s = rhs[k];
        for j in (k + 1)..m {
            s -= a[k * m + j] * c[j];
        }
        c[k] = s / a[k * m + k];
    }
    // E c.
    let mut out = vec![0.0f64; x.dim()];
    for (cj, col) in c.iter().zip(e.columns()) {
        for (o, v) in out.iter_mut().zip(col.coords()) {
            *o += cj * v;
        }
    }
    RealVector::new(out).unwrap()
}

/// Relative distance of `v` from the span of the columns, measured by
/// the explicit-formula projection.
pub fn distance_from_span(v: &RealVector, e: &ColumnSet) -> f64 {
    let projected = explicit_projection(v, e);
    v.sub(&projected).unwrap().norm() / v.norm().max(f64::MIN_POSITIVE)
}
