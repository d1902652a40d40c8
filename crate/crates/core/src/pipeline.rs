//! End-to-end run on flat course data: split, train, pick lambda* on the
//! validation set, then report test-set losses before and after remapping.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{split, Encoder, LogisticModel, SavedModel, TabularDataset, TrainParams, DEFAULT_RATIOS};
use crate::objective::{
    accuracy_loss, apply_threshold, fairness_loss, sweep, total_loss, ObjectiveConfig, SweepResult,
};
use crate::record::{Group, ScoredRecord};
use crate::transport::fip;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub objective: ObjectiveConfig,
    pub ratios: [f64; 3],
    pub seed: u64,
    pub train: TrainParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { objective: ObjectiveConfig::default(), ratios: DEFAULT_RATIOS, seed: 0, train: TrainParams::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub accuracy_loss: f64,
    pub fairness_loss: f64,
    pub total_loss: f64,
}

impl Losses {
    pub fn evaluate(records: &[ScoredRecord], labels: &[bool], config: &ObjectiveConfig) -> Result<Self> {
        let probas: Vec<f64> = records.iter().map(ScoredRecord::proba).collect();
        let acc = accuracy_loss(&apply_threshold(&probas, config.threshold), labels)?;
        let fair = fairness_loss(records, config.m)?;
        Ok(Self { accuracy_loss: acc, fairness_loss: fair, total_loss: total_loss(acc, fair, config.theta) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub lambda_star: f64,
    /// Sensitive-attribute values mapped to group 0 and group 1.
    pub group_levels: [String; 2],
    pub sizes: [usize; 3],
    pub dropped_rows: usize,
    pub before: Losses,
    pub after: Losses,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub model: SavedModel,
    pub validation: SweepResult,
    pub test: TestReport,
}

fn scored(ds: &TabularDataset, probas: &[f64], levels: &[String; 2]) -> Result<Vec<ScoredRecord>> {
    probas
        .iter()
        .zip(&ds.sensitive_values)
        .zip(&ds.labels)
        .map(|((&p, v), &y)| {
            let g = if *v == levels[0] { Group::G0 } else { Group::G1 };
            ScoredRecord::new(p, g, Some(y))
        })
        .collect()
}

pub fn run(ds: &TabularDataset, config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.objective.validate()?;
    // Group levels come from the full data so every split uses the same mapping.
    let (_, group_levels) = ds.groups()?;
    let (train, validation, test) = split(ds, config.ratios, config.seed)?;

    let encoder = Encoder::fit(ds, &train)?;
    let model = LogisticModel::train(&encoder.transform(&train)?, &train.labels, &config.train)?;
    let saved = SavedModel::new(encoder, &model, config.train);

    // A split may hold a single level, so groups use the full-data mapping.
    let relabel = |part: &TabularDataset| scored(part, &saved.predict_proba(part)?, &group_levels);

    let val_records = relabel(&validation)?;
    let val_sweep = sweep(&val_records, &config.objective)?;

    let test_records = relabel(&test)?;
    let before = Losses::evaluate(&test_records, &test.labels, &config.objective)?;
    let remapped = fip(&test_records, val_sweep.lambda_star, config.objective.m)?;
    let after_records =
        test_records.iter().zip(&remapped).map(|(r, &p)| r.with_proba(p)).collect::<Result<Vec<_>>>()?;
    let after = Losses::evaluate(&after_records, &test.labels, &config.objective)?;

    Ok(PipelineOutcome {
        model: saved,
        test: TestReport {
            lambda_star: val_sweep.lambda_star,
            group_levels,
            sizes: [train.len(), validation.len(), test.len()],
            dropped_rows: ds.dropped,
            before,
            after,
        },
        validation: val_sweep,
    })
}
