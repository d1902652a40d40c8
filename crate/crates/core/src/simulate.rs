//! Synthetic predicted probabilities drawn from two truncated, rescaled
//! densities on `[0, 1]`, with Bernoulli labels.
//!
//! Group 0 follows `f_Gamma(shape, rate)(gamma_xscale * x)` and group 1
//! follows `f_Normal(normal_mean, normal_sd)(normal_xscale * x)`, each
//! renormalized over the unit interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MaddError, Result};
use crate::record::{Group, ScoredRecord};

/// Nodes of the tabulated CDFs used for inverse-transform sampling.
pub const TABLE_NODES: usize = 10_001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n_g0: usize,
    pub n_g1: usize,
    pub gamma_shape: u32,
    pub gamma_rate: f64,
    pub gamma_xscale: f64,
    /// Location of the normal in the rescaled coordinate `normal_xscale * x`.
    pub normal_mean: f64,
    pub normal_sd: f64,
    pub normal_xscale: f64,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            n_g0: 10_000,
            n_g1: 10_000,
            gamma_shape: 4,
            gamma_rate: 1.0,
            gamma_xscale: 11.0,
            normal_mean: 5.5,
            normal_sd: 1.0,
            normal_xscale: 10.0,
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_g0 == 0 || self.n_g1 == 0 {
            return Err(MaddError::EmptyPopulation);
        }
        let positive = [self.gamma_rate, self.gamma_xscale, self.normal_sd, self.normal_xscale];
        if self.gamma_shape == 0 || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(MaddError::InvalidConfig("distribution parameters must be positive".into()));
        }
        if !self.normal_mean.is_finite() {
            return Err(MaddError::InvalidConfig("normal mean must be finite".into()));
        }
        Ok(())
    }

    /// Unnormalized group-0 density: gamma pdf at `gamma_xscale * x`.
    pub fn raw_gamma(&self, x: f64) -> f64 {
        let z = self.gamma_xscale * x;
        if z <= 0.0 {
            return 0.0;
        }
        let k = self.gamma_shape;
        let factorial: f64 = (1..k).map(f64::from).product();
        self.gamma_rate.powi(k as i32) * z.powi(k as i32 - 1) * (-self.gamma_rate * z).exp() / factorial
    }

    /// Unnormalized group-1 density: normal pdf at `normal_xscale * x`.
    pub fn raw_normal(&self, x: f64) -> f64 {
        let z = (self.normal_xscale * x - self.normal_mean) / self.normal_sd;
        (-0.5 * z * z).exp() / (self.normal_sd * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Both group densities with their normalization constants and tabulated
/// CDFs.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: SimulationSpec,
    c0: f64,
    c1: f64,
    table_g0: Vec<f64>,
    table_g1: Vec<f64>,
}

fn nodes() -> impl Iterator<Item = f64> {
    (0..TABLE_NODES).map(|i| i as f64 / (TABLE_NODES - 1) as f64)
}

/// Composite Simpson's rule over the table nodes.
fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let intervals = TABLE_NODES - 1;
    let h = 1.0 / intervals as f64;
    let interior: f64 = (1..intervals)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        })
        .sum();
    h / 3.0 * (f(0.0) + interior + f(1.0))
}

/// Cumulative trapezoid over the table nodes, scaled to end at exactly 1.
fn cdf_table(f: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = 1.0 / (TABLE_NODES - 1) as f64;
    let ys: Vec<f64> = nodes().map(&f).collect();
    let mut table = Vec::with_capacity(TABLE_NODES);
    let mut acc = 0.0;
    table.push(0.0);
    for w in ys.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        table.push(acc);
    }
    let total = acc;
    for v in &mut table {
        *v /= total;
    }
    *table.last_mut().unwrap() = 1.0;
    table
}

fn invert_table(table: &[f64], u: f64) -> f64 {
    let n = table.len() - 1;
    let k = table.partition_point(|&y| y < u);
    if k == 0 {
        return 0.0;
    }
    if k > n {
        return 1.0;
    }
    let (y0, y1) = (table[k - 1], table[k]);
    let (x0, x1) = ((k - 1) as f64 / n as f64, k as f64 / n as f64);
    (x0 + (u - y0) / (y1 - y0) * (x1 - x0)).clamp(x0, x1)
}

impl Simulator {
    pub fn new(spec: SimulationSpec) -> Result<Self> {
        spec.validate()?;
        let c0 = simpson(|x| spec.raw_gamma(x));
        let c1 = simpson(|x| spec.raw_normal(x));
        if !(c0 > 0.0 && c1 > 0.0) {
            return Err(MaddError::InvalidConfig("a density has no mass on [0, 1]".into()));
        }
        Ok(Self {
            table_g0: cdf_table(|x| spec.raw_gamma(x)),
            table_g1: cdf_table(|x| spec.raw_normal(x)),
            spec,
            c0,
            c1,
        })
    }

    pub fn spec(&self) -> &SimulationSpec {
        &self.spec
    }

    /// Normalization constants `(C0, C1)`.
    pub fn constants(&self) -> (f64, f64) {
        (self.c0, self.c1)
    }

    pub fn pdf_g0(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.spec.raw_gamma(x) / self.c0
    }

    pub fn pdf_g1(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.spec.raw_normal(x) / self.c1
    }

    /// Tabulated CDF of one group, linearly interpolated.
    pub fn cdf(&self, group: Group, x: f64) -> f64 {
        let table = match group {
            Group::G0 => &self.table_g0,
            Group::G1 => &self.table_g1,
        };
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let pos = x * (TABLE_NODES - 1) as f64;
        let k = (pos.floor() as usize).min(TABLE_NODES - 2);
        let t = pos - k as f64;
        table[k] + t * (table[k + 1] - table[k])
    }

    /// `n_g0` group-0 records followed by `n_g1` group-1 records. One seeded
    /// stream supplies, per record, the uniform for the probability and then
    /// the uniform for its Bernoulli label.
    pub fn sample(&self) -> Vec<ScoredRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        let mut out = Vec::with_capacity(self.spec.n_g0 + self.spec.n_g1);
        let plan = [(Group::G0, self.spec.n_g0, &self.table_g0), (Group::G1, self.spec.n_g1, &self.table_g1)];
        for (group, n, table) in plan {
            for _ in 0..n {
                let proba = invert_table(table, rng.gen::<f64>());
                let label = rng.gen::<f64>() < proba;
                out.push(ScoredRecord::new(proba, group, Some(label)).expect("table inverse stays in [0, 1]"));
            }
        }
        out
    }
}

/// Convenience wrapper: build the simulator and draw the records.
pub fn sample(spec: &SimulationSpec) -> Result<Vec<ScoredRecord>> {
    Ok(Simulator::new(spec.clone())?.sample())
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and a
/// continuous reference CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
