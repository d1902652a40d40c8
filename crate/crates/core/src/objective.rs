//! Accuracy/fairness objective over a grid of convergence coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{madd, DensityVector, DEFAULT_BINS};
use crate::error::{MaddError, Result};
use crate::record::{check_probability, require_labels, Group, ScoredRecord};
use crate::transport::FipBasis;

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_GRID_SIZE: usize = 1000;

/// `output[i] = probas[i] >= t`.
pub fn apply_threshold(probas: &[f64], t: f64) -> Vec<bool> {
    probas.iter().map(|&p| p >= t).collect()
}

/// Fraction of predictions that disagree with the labels.
pub fn accuracy_loss(preds: &[bool], labels: &[bool]) -> Result<f64> {
    if preds.len() != labels.len() {
        return Err(MaddError::LengthMismatch(preds.len(), labels.len()));
    }
    if preds.is_empty() {
        return Err(MaddError::EmptyPopulation);
    }
    let wrong = preds.iter().zip(labels).filter(|(p, y)| p != y).count();
    Ok(wrong as f64 / preds.len() as f64)
}

/// Half the MADD between the two groups' density vectors, in `[0, 1]`.
pub fn fairness_loss(records: &[ScoredRecord], m: usize) -> Result<f64> {
    let probas: Vec<f64> = records.iter().map(ScoredRecord::proba).collect();
    let groups: Vec<Group> = records.iter().map(|r| r.group).collect();
    fairness_loss_split(&probas, &groups, m)
}

pub(crate) fn fairness_loss_split(probas: &[f64], groups: &[Group], m: usize) -> Result<f64> {
    let (mut p0, mut p1) = (Vec::new(), Vec::new());
    for (&p, &g) in probas.iter().zip(groups) {
        match g {
            Group::G0 => p0.push(p),
            Group::G1 => p1.push(p),
        }
    }
    if p0.is_empty() {
        return Err(MaddError::EmptyGroup(0));
    }
    if p1.is_empty() {
        return Err(MaddError::EmptyGroup(1));
    }
    Ok(0.5 * madd(&DensityVector::build(&p0, m)?, &DensityVector::build(&p1, m)?)?)
}

pub fn total_loss(acc: f64, fair: f64, theta: f64) -> f64 {
    (1.0 - theta) * acc + theta * fair
}

/// Records whose thresholded prediction changes between `before` and `after`.
pub fn flipped_records(before: &[f64], after: &[f64], t: f64) -> Vec<usize> {
    apply_threshold(before, t)
        .into_iter()
        .zip(apply_threshold(after, t))
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect()
}

/// Per-sample loss averaged into the accuracy term.
pub trait SampleLoss: Sync {
    fn loss(&self, proba: f64, label: bool) -> f64;
}

/// 0/1 loss on the prediction thresholded at `threshold`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroOneLoss {
    pub threshold: f64,
}

impl SampleLoss for ZeroOneLoss {
    fn loss(&self, proba: f64, label: bool) -> f64 {
        if (proba >= self.threshold) == label {
            0.0
        } else {
            1.0
        }
    }
}

/// Binary cross-entropy with probabilities clipped away from 0 and 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossEntropyLoss;

impl SampleLoss for CrossEntropyLoss {
    fn loss(&self, proba: f64, label: bool) -> f64 {
        let p = proba.clamp(1e-12, 1.0 - 1e-12);
        if label {
            -p.ln()
        } else {
            -(1.0 - p).ln()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub theta: f64,
    pub threshold: f64,
    pub m: usize,
    pub lambda_grid: Vec<f64>,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            threshold: DEFAULT_THRESHOLD,
            m: DEFAULT_BINS,
            lambda_grid: even_grid(DEFAULT_GRID_SIZE),
        }
    }
}

/// `size` evenly spaced values over `[0, 1]`, both ends included. A single
/// point grid is `[0]`.
pub fn even_grid(size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..size).map(|i| i as f64 / (size - 1) as f64).collect(),
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(MaddError::InvalidConfig(format!("theta {} outside [0, 1]", self.theta)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(MaddError::InvalidConfig(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        if self.m < 2 {
            return Err(MaddError::InvalidBinCount(self.m));
        }
        if self.lambda_grid.is_empty() {
            return Err(MaddError::InvalidConfig("empty lambda grid".into()));
        }
        if let Some(&bad) = self.lambda_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(MaddError::InvalidLambda(bad));
        }
        if self.lambda_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(MaddError::InvalidConfig("lambda grid is not sorted".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub accuracy_loss: f64,
    pub fairness_loss: f64,
    pub total_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub lambda_star: f64,
    pub min_total_loss: f64,
    pub config: ObjectiveConfig,
}

impl SweepResult {
    pub fn row_at_star(&self) -> &SweepRow {
        self.rows.iter().rev().find(|r| r.lambda == self.lambda_star).expect("lambda_star comes from the rows")
    }
}

/// Sweeps the lambda grid with the 0/1 loss at the configured threshold.
pub fn sweep(records: &[ScoredRecord], config: &ObjectiveConfig) -> Result<SweepResult> {
    sweep_with_loss(records, config, &ZeroOneLoss { threshold: config.threshold })
}

/// Sweeps the lambda grid with a caller-supplied per-sample accuracy loss.
pub fn sweep_with_loss(
    records: &[ScoredRecord],
    config: &ObjectiveConfig,
    loss: &dyn SampleLoss,
) -> Result<SweepResult> {
    config.validate()?;
    let labels = require_labels(records)?;
    for r in records {
        check_probability(r.proba())?;
    }
    let basis = FipBasis::new(records, config.m)?;
    let groups: Vec<Group> = records.iter().map(|r| r.group).collect();
    let n = records.len() as f64;

    let rows = config
        .lambda_grid
        .par_iter()
        .map(|&lambda| -> Result<SweepRow> {
            let mapped = basis.at(lambda)?.apply();
            let accuracy_loss = mapped.iter().zip(&labels).map(|(&p, &y)| loss.loss(p, y)).sum::<f64>() / n;
            let fairness_loss = fairness_loss_split(&mapped, &groups, config.m)?;
            Ok(SweepRow {
                lambda,
                accuracy_loss,
                fairness_loss,
                total_loss: total_loss(accuracy_loss, fairness_loss, config.theta),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Ties go to the largest lambda.
    let best = rows
        .iter()
        .fold(None::<&SweepRow>, |best, row| match best {
            Some(b) if b.total_loss < row.total_loss => Some(b),
            _ => Some(row),
        })
        .expect("grid is non-empty");
    Ok(SweepResult { lambda_star: best.lambda, min_total_loss: best.total_loss, rows, config: config.clone() })
}
