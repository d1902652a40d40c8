//! Histogram density vectors over `[0, 1]` and the MADD distance between them.
//!
//! Bins are the `m` equal sub-intervals `[(k-1)/m, k/m)`, the last one closed
//! on the right so that a probability of exactly 1 is counted.

use serde::{Deserialize, Serialize};

use crate::error::{MaddError, Result};
use crate::record::check_probability;

pub const DEFAULT_BINS: usize = 100;
pub const DEFAULT_KDE_BANDWIDTH: f64 = 0.05;

/// Tolerance on the sum of proportions.
const SUM_TOLERANCE: f64 = 1e-9;

/// Left edge of bin `k` (0-based); `bin_edge(m, m) == 1.0`.
#[inline]
pub fn bin_edge(k: usize, m: usize) -> f64 {
    k as f64 / m as f64
}

/// 0-based bin of `x` under the half-open convention, with edges taken as the
/// floating-point values `k / m`.
#[inline]
pub fn bin_index(x: f64, m: usize) -> usize {
    let mut k = ((x * m as f64).floor().max(0.0) as usize).min(m - 1);
    if k > 0 && x < bin_edge(k, m) {
        k -= 1;
    } else if k + 1 < m && x >= bin_edge(k + 1, m) {
        k += 1;
    }
    k
}

fn check_bins(m: usize) -> Result<()> {
    if m < 2 {
        Err(MaddError::InvalidBinCount(m))
    } else {
        Ok(())
    }
}

/// Histogram of predicted probabilities for one population, as proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    bins: Vec<f64>,
    n: usize,
}

impl DensityVector {
    /// Counts `probas` into `m` bins. Proportions are stored as `count / n`.
    pub fn build(probas: &[f64], m: usize) -> Result<Self> {
        check_bins(m)?;
        if probas.is_empty() {
            return Err(MaddError::EmptyPopulation);
        }
        let mut counts = vec![0usize; m];
        for &p in probas {
            check_probability(p)?;
            counts[bin_index(p, m)] += 1;
        }
        let n = probas.len();
        let bins = counts.into_iter().map(|c| c as f64 / n as f64).collect();
        Ok(Self { bins, n })
    }

    /// Wraps precomputed proportions. `n` is the sample count they came from;
    /// with `n == 0` the sum-to-one check is skipped.
    pub fn from_proportions(bins: Vec<f64>, n: usize) -> Result<Self> {
        check_bins(bins.len())?;
        if let Some(bad) = bins.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(MaddError::InvalidDensity(format!("negative or non-finite proportion {bad}")));
        }
        if n > 0 {
            let total: f64 = bins.iter().sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(MaddError::InvalidDensity(format!("proportions sum to {total}")));
            }
        }
        Ok(Self { bins, n })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn m(&self) -> usize {
        self.bins.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Pointwise `(1 - lambda) * self + lambda * other`. The sample count of the
    /// result is that of `self`.
    pub fn mix(&self, other: &DensityVector, lambda: f64) -> Result<DensityVector> {
        same_bins(self, other)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MaddError::InvalidLambda(lambda));
        }
        let bins = self.bins.iter().zip(&other.bins).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        Ok(DensityVector { bins, n: self.n })
    }
}

fn same_bins(a: &DensityVector, b: &DensityVector) -> Result<()> {
    if a.m() != b.m() {
        Err(MaddError::BinCountMismatch(a.m(), b.m()))
    } else {
        Ok(())
    }
}

/// Density vector of the union of both populations: the per-bin mixture
/// weighted by `n0 / (n0 + n1)` and `n1 / (n0 + n1)`.
pub fn pool_density_vectors(d0: &DensityVector, d1: &DensityVector) -> Result<DensityVector> {
    same_bins(d0, d1)?;
    let total = d0.n + d1.n;
    if total == 0 {
        return Err(MaddError::EmptyPopulation);
    }
    let (n0, n1, nt) = (d0.n as f64, d1.n as f64, total as f64);
    let bins = d0.bins.iter().zip(&d1.bins).map(|(a, b)| (n0 * a + n1 * b) / nt).collect();
    Ok(DensityVector { bins, n: total })
}

/// Model Absolute Density Distance: `sum_k |d0_k - d1_k|`, in `[0, 2]`.
pub fn madd(d0: &DensityVector, d1: &DensityVector) -> Result<f64> {
    same_bins(d0, d1)?;
    Ok(d0.bins.iter().zip(&d1.bins).map(|(a, b)| (a - b).abs()).sum())
}

/// Gaussian-kernel smoothing of a histogram for plotting, evaluated at `grid`
/// evenly spaced points over `[0, 1]`. Kernels are reflected at both ends of
/// the unit interval so the curve stays a density on `[0, 1]`.
///
/// Never used for the metric or the mapping.
pub fn kde_plot_curve(d: &DensityVector, bandwidth: f64, grid: usize) -> Result<Vec<(f64, f64)>> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(MaddError::InvalidBandwidth(bandwidth));
    }
    if grid < 2 {
        return Err(MaddError::InvalidConfig(format!("kde grid needs at least 2 points, got {grid}")));
    }
    let m = d.m();
    let norm = 1.0 / (bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let kernel = |u: f64| norm * (-0.5 * (u / bandwidth).powi(2)).exp();
    let curve = (0..grid)
        .map(|i| {
            let x = i as f64 / (grid - 1) as f64;
            let y: f64 = d
                .bins
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(k, w)| {
                    let c = (k as f64 + 0.5) / m as f64;
                    w * (kernel(x - c) + kernel(x + c) + kernel(x - (2.0 - c)))
                })
                .sum();
            (x, y)
        })
        .collect();
    Ok(curve)
}
