//! Binary logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::dataset::Matrix;
use crate::error::{MaddError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Strength of the `l2 / 2 * |w|^2` penalty; the bias is not penalized.
    pub l2: f64,
    pub learning_rate: f64,
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm drops below this.
    pub tolerance: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { l2: 1e-4, learning_rate: 0.1, max_iter: 2000, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub trained: bool,
    /// Objective value after each iteration.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean binary cross-entropy plus the L2 penalty, and its gradient with
/// respect to `(weights, bias)`.
pub fn loss_and_gradient(weights: &[f64], bias: f64, x: &Matrix, y: &[bool], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = x.n_rows as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    let mut loss = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let row = x.row(i);
        let z = bias + row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
        let t = if yi { 1.0 } else { 0.0 };
        // -[t log s(z) + (1 - t) log(1 - s(z))] = softplus(z) - t z
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, a) in grad_w.iter_mut().zip(row) {
            *g += r * a;
        }
        grad_b += r;
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * 0.5 * l2;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (loss / n + penalty, grad_w, grad_b / n)
}

impl LogisticModel {
    pub fn untrained(n_features: usize) -> Self {
        Self { weights: vec![0.0; n_features], bias: 0.0, trained: false, loss_history: Vec::new() }
    }

    pub fn train(x: &Matrix, y: &[bool], params: &TrainParams) -> Result<Self> {
        if x.n_rows != y.len() {
            return Err(MaddError::LengthMismatch(x.n_rows, y.len()));
        }
        if x.n_rows == 0 {
            return Err(MaddError::EmptyPopulation);
        }
        let mut model = Self::untrained(x.n_cols);
        for iter in 0..params.max_iter {
            let (loss, gw, gb) = loss_and_gradient(&model.weights, model.bias, x, y, params.l2);
            if !loss.is_finite() {
                return Err(MaddError::TrainingDiverged(iter));
            }
            model.loss_history.push(loss);
            let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
            if norm < params.tolerance {
                break;
            }
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= params.learning_rate * g;
            }
            model.bias -= params.learning_rate * gb;
            if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
                return Err(MaddError::TrainingDiverged(iter));
            }
        }
        model.trained = true;
        Ok(model)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        if !self.trained {
            return Err(MaddError::NotTrained);
        }
        if x.n_rows > 0 && x.n_cols != self.weights.len() {
            return Err(MaddError::LengthMismatch(x.n_cols, self.weights.len()));
        }
        Ok((0..x.n_rows)
            .map(|i| sigmoid(self.bias + x.row(i).iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn separable_pair_is_learned() {
        let x = mat(&[vec![-1.0], vec![1.0]]);
        let y = [false, true];
        let m = LogisticModel::train(&x, &y, &TrainParams::default()).unwrap();
        assert!(*m.loss_history.last().unwrap() < 0.1);
        let p = m.predict_proba(&x).unwrap();
        assert!(p[0] < 0.5 && p[1] > 0.5);
    }

    #[test]
    fn constant_positive_labels() {
        let x = mat(&[vec![0.3, -1.0], vec![-0.2, 0.5], vec![0.0, 0.1]]);
        let m = LogisticModel::train(&x, &[true, true, true], &TrainParams::default()).unwrap();
        assert!(m.bias > 0.0);
        assert!(m.predict_proba(&x).unwrap().iter().all(|&p| p > 0.9));
    }

    #[test]
    fn prediction_edge_cases() {
        let x = mat(&[vec![1.0, 2.0], vec![-1.0, -2.0]]);
        let untrained = LogisticModel::untrained(2);
        assert!(matches!(untrained.predict_proba(&x), Err(MaddError::NotTrained)));
        let zero = LogisticModel { trained: true, ..untrained };
        assert_eq!(zero.predict_proba(&x).unwrap(), vec![0.5, 0.5]);

        let m = LogisticModel { weights: vec![0.7, -0.3], bias: 0.0, trained: true, loss_history: vec![] };
        let p = m.predict_proba(&x).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);

        let m = LogisticModel { weights: vec![1.3], bias: -0.2, trained: true, loss_history: vec![] };
        let p = m.predict_proba(&mat(&[vec![-2.0], vec![0.0], vec![0.5], vec![4.0]])).unwrap();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn loss_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] - 0.5 * r[2] + rng.gen_range(-1.0..1.0) > 0.0).collect();
        let m = LogisticModel::train(&mat(&rows), &y, &TrainParams::default()).unwrap();
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn divergence_is_detected() {
        let x = mat(&[vec![1e200], vec![-1e200]]);
        let params = TrainParams { learning_rate: 1e200, ..Default::default() };
        assert!(matches!(LogisticModel::train(&x, &[true, false], &params), Err(MaddError::TrainingDiverged(_))));
    }
}
