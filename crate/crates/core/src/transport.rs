//! CDF-composition remapping of predicted probabilities.
//!
//! Each group's probabilities are pushed through its own histogram CDF and
//! pulled back through the generalized inverse of a mixture
//! `(1 - lambda) * CDF_group + lambda * CDF_pooled`. At `lambda = 0` the map is
//! the identity up to bin resolution; at `lambda = 1` both groups target the
//! pooled distribution.

use rayon::prelude::*;

use crate::densities::{bin_edge, bin_index, pool_density_vectors, DensityVector};
use crate::error::{MaddError, Result};
use crate::record::{check_probability, group_probas, Group, ScoredRecord};

/// Monotone CDF on `[0, 1]`, linear between the bin edges `k / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots_y: Vec<f64>,
}

impl PiecewiseLinearCdf {
    /// Cumulative bin masses of `d`. The final knot is pinned to exactly 1.
    pub fn from_density(d: &DensityVector) -> Self {
        let mut knots_y = Vec::with_capacity(d.m() + 1);
        let mut acc = 0.0;
        knots_y.push(0.0);
        for &mass in d.bins() {
            acc += mass;
            knots_y.push(acc.min(1.0));
        }
        *knots_y.last_mut().unwrap() = 1.0;
        Self { knots_y }
    }

    /// Knotwise `(1 - lambda) * self + lambda * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if self.m() != other.m() {
            return Err(MaddError::BinCountMismatch(self.m(), other.m()));
        }
        let mut knots_y: Vec<f64> =
            self.knots_y.iter().zip(&other.knots_y).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        // Rounding in the convex combination can break monotonicity by an ulp.
        for k in 1..knots_y.len() {
            knots_y[k] = knots_y[k].max(knots_y[k - 1]).min(1.0);
        }
        *knots_y.last_mut().unwrap() = 1.0;
        Ok(Self { knots_y })
    }

    pub fn m(&self) -> usize {
        self.knots_y.len() - 1
    }

    pub fn knots_y(&self) -> &[f64] {
        &self.knots_y
    }

    pub fn knots_x(&self) -> Vec<f64> {
        (0..=self.m()).map(|k| bin_edge(k, self.m())).collect()
    }

    /// CDF value at `x`; arguments outside `[0, 1]` are clamped.
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.m();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let k = bin_index(x, m);
        let (x0, x1) = (bin_edge(k, m), bin_edge(k + 1, m));
        let (y0, y1) = (self.knots_y[k], self.knots_y[k + 1]);
        let t = (x - x0) / (x1 - x0);
        (y0 + t * (y1 - y0)).clamp(y0, y1)
    }

    /// `inf { x : CDF(x) >= u }`, the leftmost preimage on flat stretches.
    pub fn generalized_inverse(&self, u: f64) -> Result<f64> {
        if !(u.is_finite() && (0.0..=1.0).contains(&u)) {
            return Err(MaddError::InvalidQuantile(u));
        }
        Ok(self.inverse_unchecked(u))
    }

    fn inverse_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let m = self.m();
        // First knot reaching u; knots_y[0] = 0 < u so k >= 1.
        let k = self.knots_y.partition_point(|&y| y < u);
        if k > m {
            return 1.0;
        }
        let (y0, y1) = (self.knots_y[k - 1], self.knots_y[k]);
        let (x0, x1) = (bin_edge(k - 1, m), bin_edge(k, m));
        let x = x0 + (u - y0) / (y1 - y0) * (x1 - x0);
        x.clamp(x0, x1)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(MaddError::InvalidLambda(lambda))
    }
}

/// Group and pooled CDFs for a batch of records, plus each record's quantile
/// under its own group CDF. Independent of `lambda`, so one instance serves a
/// whole sweep.
#[derive(Debug, Clone)]
pub struct FipBasis {
    cdf_g0: PiecewiseLinearCdf,
    cdf_g1: PiecewiseLinearCdf,
    cdf_all: PiecewiseLinearCdf,
    groups: Vec<Group>,
    quantiles: Vec<f64>,
}

impl FipBasis {
    pub fn new(records: &[ScoredRecord], m: usize) -> Result<Self> {
        let p0 = group_probas(records, Group::G0);
        let p1 = group_probas(records, Group::G1);
        if p0.is_empty() {
            return Err(MaddError::EmptyGroup(0));
        }
        if p1.is_empty() {
            return Err(MaddError::EmptyGroup(1));
        }
        let d0 = DensityVector::build(&p0, m)?;
        let d1 = DensityVector::build(&p1, m)?;
        let pooled = pool_density_vectors(&d0, &d1)?;
        let cdf_g0 = PiecewiseLinearCdf::from_density(&d0);
        let cdf_g1 = PiecewiseLinearCdf::from_density(&d1);
        let cdf_all = PiecewiseLinearCdf::from_density(&pooled);
        let quantiles = records
            .iter()
            .map(|r| match r.group {
                Group::G0 => cdf_g0.eval(r.proba()),
                Group::G1 => cdf_g1.eval(r.proba()),
            })
            .collect();
        Ok(Self { groups: records.iter().map(|r| r.group).collect(), cdf_g0, cdf_g1, cdf_all, quantiles })
    }

    pub fn cdf(&self, group: Group) -> &PiecewiseLinearCdf {
        match group {
            Group::G0 => &self.cdf_g0,
            Group::G1 => &self.cdf_g1,
        }
    }

    pub fn pooled_cdf(&self) -> &PiecewiseLinearCdf {
        &self.cdf_all
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn at(&self, lambda: f64) -> Result<FipMap<'_>> {
        Ok(FipMap {
            basis: self,
            lambda,
            mixed_g0: self.cdf_g0.mix(&self.cdf_all, lambda)?,
            mixed_g1: self.cdf_g1.mix(&self.cdf_all, lambda)?,
        })
    }
}

/// The remapping for one value of `lambda`.
#[derive(Debug, Clone)]
pub struct FipMap<'a> {
    basis: &'a FipBasis,
    lambda: f64,
    mixed_g0: PiecewiseLinearCdf,
    mixed_g1: PiecewiseLinearCdf,
}

impl FipMap<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mixed_cdf(&self, group: Group) -> &PiecewiseLinearCdf {
        match group {
            Group::G0 => &self.mixed_g0,
            Group::G1 => &self.mixed_g1,
        }
    }

    /// Maps an arbitrary probability as if it belonged to `group`.
    pub fn map_value(&self, proba: f64, group: Group) -> Result<f64> {
        check_probability(proba)?;
        let u = self.basis.cdf(group).eval(proba);
        Ok(self.mixed_cdf(group).inverse_unchecked(u))
    }

    /// New probabilities for the records the basis was built from, in order.
    pub fn apply(&self) -> Vec<f64> {
        self.basis
            .quantiles
            .par_iter()
            .zip(self.basis.groups.par_iter())
            .map(|(&u, &g)| self.mixed_cdf(g).inverse_unchecked(u))
            .collect()
    }
}

/// Remaps every record's probability towards the pooled distribution by
/// `lambda`. Output order matches input order.
pub fn fip(records: &[ScoredRecord], lambda: f64, m: usize) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let basis = FipBasis::new(records, m)?;
    Ok(basis.at(lambda)?.apply())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dv(bins: &[f64]) -> DensityVector {
        DensityVector::from_proportions(bins.to_vec(), 1).unwrap()
    }

    fn recs(p0: &[f64], p1: &[f64]) -> Vec<ScoredRecord> {
        p0.iter()
            .map(|&p| ScoredRecord::new(p, Group::G0, None).unwrap())
            .chain(p1.iter().map(|&p| ScoredRecord::new(p, Group::G1, None).unwrap()))
            .collect()
    }

    #[test]
    fn cdf_examples() {
        let c = PiecewiseLinearCdf::from_density(&dv(&[1.0, 0.0]));
        assert_eq!(c.eval(0.0), 0.0);
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.0), 1.0);

        let c = PiecewiseLinearCdf::from_density(&dv(&[0.5, 0.5]));
        assert_abs_diff_eq!(c.eval(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.eval(0.75), 0.75, epsilon = 1e-15);

        let m = 20;
        let c = PiecewiseLinearCdf::from_density(&dv(&vec![1.0 / m as f64; m]));
        for (x, y) in c.knots_x().iter().zip(c.knots_y()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_examples() {
        let uni = PiecewiseLinearCdf::from_density(&dv(&[0.25; 4]));
        assert_abs_diff_eq!(uni.generalized_inverse(0.3).unwrap(), 0.3, epsilon = 1e-15);
        let c = PiecewiseLinearCdf::from_density(&dv(&[1.0, 0.0]));
        assert_eq!(c.generalized_inverse(1.0).unwrap(), 0.5);
        assert_eq!(c.generalized_inverse(0.0).unwrap(), 0.0);
        assert_eq!(uni.generalized_inverse(0.0).unwrap(), 0.0);
        for u in [-0.1, 1.1, f64::NAN] {
            assert!(matches!(uni.generalized_inverse(u), Err(MaddError::InvalidQuantile(_))));
        }
    }

    #[test]
    fn inverse_skips_leading_empty_bins() {
        let c = PiecewiseLinearCdf::from_density(&dv(&[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(c.generalized_inverse(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(c.generalized_inverse(0.5).unwrap(), 0.625, epsilon = 1e-15);
        assert_eq!(c.generalized_inverse(1.0).unwrap(), 0.75);
    }

    #[test]
    fn fip_errors() {
        let only_g0 = recs(&[0.1, 0.2], &[]);
        assert!(matches!(fip(&only_g0, 0.5, 10), Err(MaddError::EmptyGroup(1))));
        let only_g1 = recs(&[], &[0.1]);
        assert!(matches!(fip(&only_g1, 0.5, 10), Err(MaddError::EmptyGroup(0))));
        let both = recs(&[0.1], &[0.2]);
        assert!(matches!(fip(&both, 1.5, 10), Err(MaddError::InvalidLambda(_))));
        assert!(matches!(fip(&both, -0.1, 10), Err(MaddError::InvalidLambda(_))));
    }

    #[test]
    fn fip_two_point_masses_full_convergence() {
        // Brute-force oracle: cumulative sums by explicit loops, inversion by
        // scanning a fine grid for the first point reaching the target mass.
        let m = 2;
        let r = recs(&[0.25; 1000], &[0.75; 1000]);
        let out = fip(&r, 1.0, m).unwrap();

        let cum = |bins: &[f64]| {
            let mut v = vec![0.0];
            for b in bins {
                v.push(v.last().unwrap() + b);
            }
            v
        };
        let eval = |knots: &[f64], x: f64| {
            let k = ((x * m as f64) as usize).min(m - 1);
            knots[k] + (x * m as f64 - k as f64) * (knots[k + 1] - knots[k])
        };
        let k0 = cum(&[1.0, 0.0]);
        let k1 = cum(&[0.0, 1.0]);
        let kp = cum(&[0.5, 0.5]);
        let scan_inverse = |knots: &[f64], u: f64| {
            (0..=200_000).map(|i| i as f64 / 200_000.0).find(|&x| eval(knots, x) >= u - 1e-12).unwrap()
        };
        let want0 = scan_inverse(&kp, eval(&k0, 0.25));
        let want1 = scan_inverse(&kp, eval(&k1, 0.75));
        assert_abs_diff_eq!(want0, 0.5, epsilon = 1e-5);
        assert_abs_diff_eq!(want1, 0.5, epsilon = 1e-5);
        for &p in &out[..1000] {
            assert_abs_diff_eq!(p, want0, epsilon = 1e-5);
        }
        for &p in &out[1000..] {
            assert_abs_diff_eq!(p, want1, epsilon = 1e-5);
        }
    }

    #[test]
    fn fip_identical_groups_is_near_identity() {
        let xs: Vec<f64> = (0..500).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 + 0.0003).collect();
        let r = recs(&xs, &xs);
        for lambda in [0.0, 0.3, 1.0] {
            let out = fip(&r, lambda, 50).unwrap();
            for (a, b) in r.iter().zip(&out) {
                assert!((a.proba() - b).abs() <= 1.0 / 50.0 + 1e-12);
            }
        }
    }

    #[test]
    fn fip_is_deterministic() {
        let r = recs(&[0.1, 0.33, 0.9, 0.42], &[0.05, 0.5, 0.77]);
        let a = fip(&r, 0.37, 10).unwrap();
        let b = fip(&r, 0.37, 10).unwrap();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    fn arb_batch() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, usize)> {
        (
            prop::collection::vec(0.0f64..=1.0, 1..120),
            prop::collection::vec(0.0f64..=1.0, 1..120),
            0.0f64..=1.0,
            2usize..60,
        )
    }

    proptest! {
        #[test]
        fn fip_preserves_within_group_rank((p0, p1, lambda, m) in arb_batch()) {
            let r = recs(&p0, &p1);
            let out = fip(&r, lambda, m).unwrap();
            for g in [Group::G0, Group::G1] {
                let mut pairs: Vec<(f64, f64)> = r.iter().zip(&out)
                    .filter(|(rec, _)| rec.group == g)
                    .map(|(rec, &o)| (rec.proba(), o))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in pairs.windows(2) {
                    prop_assert!(w[1].1 >= w[0].1);
                }
            }
            prop_assert!(out.iter().all(|p| (0.0..=1.0).contains(p)));
        }

        #[test]
        fn fip_lambda_zero_is_identity_within_resolution((p0, p1, _l, m) in arb_batch()) {
            let r = recs(&p0, &p1);
            let out = fip(&r, 0.0, m).unwrap();
            for (rec, o) in r.iter().zip(&out) {
                prop_assert!((rec.proba() - o).abs() <= 1.0 / m as f64 + 1e-12);
            }
        }

        #[test]
        fn mixed_cdf_is_valid(a in prop::collection::vec(0.0f64..1.0, 2..40), lambda in 0.0f64..=1.0) {
            let s: f64 = a.iter().sum();
            prop_assume!(s > 1e-6);
            let d0 = dv(&a.iter().map(|x| x / s).collect::<Vec<_>>());
            let rev: Vec<f64> = d0.bins().iter().rev().copied().collect();
            let c = PiecewiseLinearCdf::from_density(&d0)
                .mix(&PiecewiseLinearCdf::from_density(&dv(&rev)), lambda)
                .unwrap();
            prop_assert_eq!(c.knots_y()[0], 0.0);
            prop_assert_eq!(*c.knots_y().last().unwrap(), 1.0);
            prop_assert!(c.knots_y().windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
