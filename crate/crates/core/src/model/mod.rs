//! Minimal classifier and data handling for running the post-processing on
//! flat course data.

pub mod dataset;
pub mod logistic;

pub use dataset::{
    default_schema, split, split_sizes, Column, ColumnKind, Encoder, FeatureEncoding, Matrix, TabularDataset,
    DEFAULT_RATIOS,
};
pub use logistic::{loss_and_gradient, sigmoid, LogisticModel, TrainParams};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Trained model together with the encoder needed to score new rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub feature_names: Vec<String>,
    pub encoder: Encoder,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: TrainParams,
}

impl SavedModel {
    pub fn new(encoder: Encoder, model: &LogisticModel, params: TrainParams) -> Self {
        Self {
            feature_names: encoder.feature_names(),
            encoder,
            weights: model.weights.clone(),
            bias: model.bias,
            params,
        }
    }

    pub fn model(&self) -> LogisticModel {
        LogisticModel { weights: self.weights.clone(), bias: self.bias, trained: true, loss_history: Vec::new() }
    }

    pub fn predict_proba(&self, ds: &TabularDataset) -> Result<Vec<f64>> {
        self.model().predict_proba(&self.encoder.transform(ds)?)
    }
}
