use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::sparse::{Dataset, SparseVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearFamily {
    Logistic,
    Svm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub family: LinearFamily,
}

impl LinearModel {
    pub fn score(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2_lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub tolerance: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { l2_lambda: 1e-3, epochs: 1000, learning_rate: 1.0, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub l2_lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { l2_lambda: 1e-3, epochs: 20 }
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean log-loss plus `(l2_lambda / 2) * |w|^2`; the bias is not penalized.
pub fn logistic_objective(data: &Dataset, weights: &[f64], bias: f64, l2_lambda: f64) -> f64 {
    let loss: f64 = data
        .vectors()
        .iter()
        .zip(data.labels())
        .map(|(x, &y)| {
            let z = x.dot(weights) + bias;
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    let penalty: f64 = weights.iter().map(|w| w * w).sum();
    loss / data.len() as f64 + 0.5 * l2_lambda * penalty
}

/// Gradient of [`logistic_objective`] with respect to `(weights, bias)`.
pub fn logistic_gradient(data: &Dataset, weights: &[f64], bias: f64, l2_lambda: f64) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut grad: Vec<f64> = weights.iter().map(|w| l2_lambda * w).collect();
    let mut grad_bias = 0.0;
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        let residual = (sigmoid(x.dot(weights) + bias) - f64::from(u8::from(y))) / n;
        grad_bias += residual;
        for (j, v) in x.iter() {
            grad[j] += residual * v;
        }
    }
    (grad, grad_bias)
}

/// Full-batch gradient descent on the L2-regularized log-loss. Stops when
/// the gradient's max-norm drops below `tolerance` or after `epochs` steps.
pub fn train_logistic_regression(data: &Dataset, params: &LogisticParams) -> Result<LinearModel> {
    let non_negative = |x: f64| x >= 0.0;
    if !non_negative(params.l2_lambda) || params.epochs == 0 || !non_negative(params.learning_rate) {
        return Err(Error::Contract(format!("invalid logistic regression settings {params:?}")));
    }
    data.require_both_classes()?;
    let mut weights = vec![0.0; data.dimension()];
    let mut bias = 0.0;
    for epoch in 1..=params.epochs {
        let (grad, grad_bias) = logistic_gradient(data, &weights, bias, params.l2_lambda);
        let max_grad = grad.iter().fold(grad_bias.abs(), |m, g| m.max(g.abs()));
        if !max_grad.is_finite() {
            return Err(Error::Training(format!("logistic regression diverged at epoch {epoch}")));
        }
        if max_grad < params.tolerance {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * grad_bias;
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Training(format!("non-finite logistic regression weights at epoch {epoch}")));
        }
    }
    let loss = logistic_objective(data, &weights, bias, params.l2_lambda);
    if !loss.is_finite() {
        return Err(Error::Training("non-finite final logistic loss".into()));
    }
    Ok(LinearModel { weights, bias, family: LinearFamily::Logistic })
}

/// Pegasos: stochastic subgradient descent on hinge loss with
/// `(l2_lambda / 2) * |w|^2`, step `1 / (l2_lambda * t)`.
///
/// The bias is handled as an extra constant feature and shares the
/// regularizer. Each epoch visits every row once in an order shuffled from
/// `seed`.
pub fn train_linear_svm(data: &Dataset, params: &SvmParams, seed: u64) -> Result<LinearModel> {
    if params.l2_lambda.is_nan() || params.l2_lambda <= 0.0 || params.epochs == 0 {
        return Err(Error::Contract(format!("invalid linear SVM settings {params:?}")));
    }
    data.require_both_classes()?;
    let d = data.dimension();
    // w = scale * v; the last slot of v is the bias weight.
    let mut v = vec![0.0; d + 1];
    let mut scale = 1.0;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = rng::stream(seed);
    let mut t: u64 = 0;
    for epoch in 1..=params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let x = &data.vectors()[i];
            let y = if data.labels()[i] { 1.0 } else { -1.0 };
            let eta = 1.0 / (params.l2_lambda * t as f64);
            let margin = y * scale * (x.dot(&v) + v[d]);
            let shrink = 1.0 - eta * params.l2_lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|e| *e = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y / scale;
                for (j, xv) in x.iter() {
                    v[j] += step * xv;
                }
                v[d] += step;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|e| *e *= scale);
                scale = 1.0;
            }
        }
        if !scale.is_finite() || v.iter().any(|e| !e.is_finite()) {
            return Err(Error::Training(format!("linear SVM diverged at epoch {epoch}")));
        }
    }
    let bias = scale * v[d];
    v.truncate(d);
    Ok(LinearModel { weights: v.into_iter().map(|e| e * scale).collect(), bias, family: LinearFamily::Svm })
}
