//! Two-sample and directional tests used to compare empirical
//! distributions: the energy permutation test on vector samples, the
//! Kolmogorov-Smirnov test on scalar channels, and a Rayleigh-style
//! uniformity test for directions on a sphere.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::isometry::OrthogonalFrame;
use crate::linalg::RealVector;
use crate::rng::StreamKey;

/// Outcome of one statistical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test_name: String,
    pub statistic: f64,
    /// For permutation tests this follows the add-one rule and lies in
    /// `[1/(n_permutations+1), 1]`.
    pub p_value: f64,
    /// Total number of samples consumed (both sides pooled for
    /// two-sample tests; usable directions for the uniformity test).
    pub n_samples: usize,
    /// Zero for tests with an asymptotic rather than permutation null.
    pub n_permutations: usize,
    pub alpha: f64,
    pub reject: bool,
}

impl StatTestResult {
    fn new(
        test_name: &str,
        statistic: f64,
        p_value: f64,
        n_samples: usize,
        n_permutations: usize,
        alpha: f64,
    ) -> Self {
        Self {
            test_name: test_name.to_owned(),
            statistic,
            p_value,
            n_samples,
            n_permutations,
            alpha,
            reject: p_value < alpha,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1)"));
    }
    Ok(())
}

/// Energy two-sample permutation test.
///
/// The statistic is `2 E||a - b|| - E||a - a'|| - E||b - b'||` with all
/// means taken over every ordered pair (V-statistic form), which is
/// zero exactly when the two empirical distributions coincide. The
/// p-value permutes the pooled sample `n_permutations` times and
/// applies the add-one rule; permutation `j` draws from
/// `key.offset(1 + j)`, so the result is deterministic given `key` and
/// independent of evaluation order.
pub fn energy_two_sample(
    a: &[RealVector],
    b: &[RealVector],
    n_permutations: usize,
    alpha: f64,
    key: StreamKey,
) -> Result<StatTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: a.len().min(b.len()),
        });
    }
    if n_permutations < 99 {
        return Err(Error::InvalidParameter(
            "energy test needs at least 99 permutations",
        ));
    }
    check_alpha(alpha)?;
    let dim = a[0].dim();
    for v in a.iter().chain(b) {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }

    let (na, nb) = (a.len(), b.len());
    let n = na + nb;

    // Flatten the pooled sample, then precompute every pairwise
    // distance once; permutations only relabel indices.
    let mut pooled = Vec::with_capacity(n * dim);
    for v in a.iter().chain(b) {
        pooled.extend_from_slice(v.coords());
    }
    let mut distances = vec![0.0f64; n * n];
    distances
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            let vi = &pooled[i * dim..(i + 1) * dim];
            for (j, slot) in row.iter_mut().enumerate() {
                if i != j {
                    let vj = &pooled[j * dim..(j + 1) * dim];
                    *slot = vi
                        .iter()
                        .zip(vj)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                }
            }
        });
    let row_sums: Vec<f64> = (0..n)
        .map(|i| distances[i * n..(i + 1) * n].iter().sum())
        .collect();
    let total: f64 = row_sums.iter().sum();

    let stat_for = |first_group: &[u32]| -> f64 {
        // within-group sum for the first group; everything else follows
        // from the precomputed row sums.
        let mut sum_aa = 0.0;
        let mut rows_a = 0.0;
        for &i in first_group {
            let row = &distances[i as usize * n..(i as usize + 1) * n];
            for &j in first_group {
                sum_aa += row[j as usize];
            }
            rows_a += row_sums[i as usize];
        }
        let sum_ab = rows_a - sum_aa;
        let sum_bb = total - 2.0 * rows_a + sum_aa;
        let (fa, fb) = (na as f64, nb as f64);
        2.0 * sum_ab / (fa * fb) - sum_aa / (fa * fa) - sum_bb / (fb * fb)
    };

    let identity: Vec<u32> = (0..na as u32).collect();
    let observed = stat_for(&identity);

    let exceed: usize = (0..n_permutations as u64)
        .into_par_iter()
        .map(|j| {
            let mut stream = key.offset(1 + j).open();
            let mut labels: Vec<u32> = (0..n as u32).collect();
            stream.shuffle(&mut labels);
            let mut first = labels[..na].to_vec();
            first.sort_unstable();
            usize::from(stat_for(&first) >= observed)
        })
        .sum();

    let p_value = (1 + exceed) as f64 / (n_permutations + 1) as f64;
    Ok(StatTestResult::new(
        "energy",
        observed,
        p_value,
        n,
        n_permutations,
        alpha,
    ))
}

/// Two-sample Kolmogorov-Smirnov test on scalar samples, with the
/// asymptotic p-value at effective sample size `n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<StatTestResult> {
    if a.len() < 8 || b.len() < 8 {
        return Err(Error::TooFewSamples {
            needed: 8,
            got: a.len().min(b.len()),
        });
    }
    check_alpha(alpha)?;
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(0));
    }

    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);

    let (n, m) = (xs.len(), ys.len());
    let (fn_, fm) = (n as f64, m as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = xs[i].min(ys[j]);
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / fn_ - j as f64 / fm).abs());
    }

    let en = (fn_ * fm / (fn_ + fm)).sqrt();
    let p_value = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    Ok(StatTestResult::new("ks", d, p_value, n + m, 0, alpha))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`,
/// evaluated through its theta-transformed series for small arguments
/// where the alternating form converges slowly.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    use std::f64::consts::PI;
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let f = (-(PI * PI) / (8.0 * lambda * lambda)).exp();
        let cdf = (2.0 * PI).sqrt() / lambda * (f + f.powi(9) + f.powi(25) + f.powi(49));
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let u = (-2.0 * lambda * lambda).exp();
        (2.0 * (u - u.powi(4) + u.powi(9) - u.powi(16) + u.powi(25))).clamp(0.0, 1.0)
    }
}

/// Rayleigh-style uniformity test for the directions of the
/// perpendicular components, expressed in frame coordinates `2..p`.
///
/// Samples with norm at or below `min_norm` are dropped (their
/// direction is undefined); at least `10 p` usable samples are
/// required. For `r` usable unit directions in the `(p-1)`-dimensional
/// complement, the statistic `(p-1) r ||mean direction||^2` is compared
/// against its asymptotic chi-squared law with `p - 1` degrees of
/// freedom.
pub fn direction_uniformity(
    perps: &[RealVector],
    frame: &OrthogonalFrame,
    min_norm: f64,
    alpha: f64,
) -> Result<StatTestResult> {
    check_alpha(alpha)?;
    let p = frame.dim();
    if p < 2 {
        return Err(Error::InvalidParameter(
            "direction test needs an ambient dimension of at least 2",
        ));
    }
    let dof = p - 1;
    let mut mean = vec![0.0f64; dof];
    let mut usable = 0usize;
    for perp in perps {
        let norm = perp.norm();
        if norm <= min_norm {
            continue;
        }
        let along_axis = perp.inner(frame.first_column())?.abs();
        if along_axis > 1e-6 * norm {
            return Err(Error::AxisMismatch);
        }
        let coords = frame.to_coords(perp)?;
        let tail = &coords[1..];
        let tail_norm = tail.iter().map(|c| c * c).sum::<f64>().sqrt();
        for (m, c) in mean.iter_mut().zip(tail) {
            *m += c / tail_norm;
        }
        usable += 1;
    }
    if usable < 10 * p {
        return Err(Error::TooFewSamples {
            needed: 10 * p,
            got: usable,
        });
    }
    for m in &mut mean {
        *m /= usable as f64;
    }
    let resultant_sq: f64 = mean.iter().map(|c| c * c).sum();
    let statistic = dof as f64 * usable as f64 * resultant_sq;
    let p_value = ChiSquared::new(dof as f64)
        .expect("dof >= 1")
        .sf(statistic);
    Ok(StatTestResult::new(
        "direction_uniformity",
        statistic,
        p_value,
        usable,
        0,
        alpha,
    ))
}
