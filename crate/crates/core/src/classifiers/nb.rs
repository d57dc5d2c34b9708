use serde::{Deserialize, Serialize};

use crate::sparse::{Dataset, SparseVector};
use crate::{Error, Result};

/// Multinomial naive Bayes over non-negative feature mass.
///
/// Index 0 is the negative class, 1 the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub log_prior: [f64; 2],
    pub log_likelihood: [Vec<f64>; 2],
    pub alpha: f64,
}

/// Laplace-smoothed multinomial NB with tf-idf values as fractional counts:
/// `ln((alpha + mass(c, j)) / (alpha * D + mass(c)))`.
pub fn train_naive_bayes(data: &Dataset, alpha: f64) -> Result<NbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Contract(format!("alpha must be positive, got {alpha}")));
    }
    data.require_both_classes()?;
    let d = data.dimension();
    let mut mass = [vec![0.0; d], vec![0.0; d]];
    let mut class_count = [0usize; 2];
    for (x, &label) in data.vectors().iter().zip(data.labels()) {
        let c = usize::from(label);
        class_count[c] += 1;
        for (j, v) in x.iter() {
            if v < 0.0 {
                return Err(Error::Contract("naive Bayes needs non-negative feature values".into()));
            }
            mass[c][j] += v;
        }
    }
    let n = data.len() as f64;
    let log_prior = [(class_count[0] as f64 / n).ln(), (class_count[1] as f64 / n).ln()];
    let log_likelihood = mass.map(|m| {
        let total: f64 = m.iter().sum();
        let denom = (alpha * d as f64 + total).ln();
        m.iter().map(|&v| (alpha + v).ln() - denom).collect()
    });
    Ok(NbModel { log_prior, log_likelihood, alpha })
}

impl NbModel {
    pub fn dimension(&self) -> usize {
        self.log_likelihood[0].len()
    }

    /// Joint log-probability `ln P(c) + sum_j x_j ln P(j | c)` for each class.
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> [f64; 2] {
        [0, 1].map(|c| self.log_prior[c] + x.dot(&self.log_likelihood[c]))
    }

    /// Log-posterior difference, positive minus negative.
    pub fn score(&self, x: &SparseVector) -> f64 {
        let [neg, pos] = self.joint_log_likelihood(x);
        pos - neg
    }
}
