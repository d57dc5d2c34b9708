use serde::{Deserialize, Serialize};

use super::linear::sigmoid;
use super::tree::{grow, Columns, GrowData, GrowParams, Tree};
use crate::sparse::{Dataset, SparseVector};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub n_stages: usize,
    pub shrinkage: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams { n_stages: 100, shrinkage: 0.1, max_depth: 3, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub initial_score: f64,
    pub shrinkage: f64,
    pub trees: Vec<Tree>,
}

impl GbdtModel {
    /// Accumulated log-odds.
    pub fn score(&self, x: &SparseVector) -> f64 {
        self.initial_score + self.shrinkage * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    /// Scores of every row after 0, 1, .., n_stages stages.
    pub fn staged_scores(&self, x: &SparseVector) -> Vec<f64> {
        let mut acc = self.initial_score;
        let mut out = vec![acc];
        for t in &self.trees {
            acc += self.shrinkage * t.predict(x);
            out.push(acc);
        }
        out
    }
}

/// Mean binomial deviance / 2, i.e. mean log-loss, of raw scores.
#[cfg(test)]
fn mean_log_loss(scores: &[f64], labels: &[bool]) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(&f, &y)| {
            let p = sigmoid(f).clamp(1e-300, 1.0 - 1e-16);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / scores.len() as f64
}

/// Gradient boosting on binomial deviance. Each stage fits a squared-error
/// tree to the residuals `y - sigmoid(F)` and sets each leaf to a single
/// Newton step `sum(r) / sum(p (1 - p))`.
///
/// Every row and feature is used at every stage, so `seed` only feeds the
/// (unused) sampling stream and is recorded for provenance.
pub fn train_gbdt(data: &Dataset, params: &GbdtParams, seed: u64) -> Result<GbdtModel> {
    if !(params.shrinkage > 0.0 && params.shrinkage <= 1.0) || params.max_depth == 0 {
        return Err(Error::Contract(format!("invalid GBDT settings {params:?}")));
    }
    data.require_both_classes()?;
    let n = data.len();
    let pos = data.positives() as f64;
    let initial_score = (pos / (n as f64 - pos)).ln();
    let labels: Vec<f64> = data.labels().iter().map(|&l| f64::from(u8::from(l))).collect();
    let mut scores = vec![initial_score; n];
    let mut trees = Vec::with_capacity(params.n_stages);
    let mut rng = rng::stream(seed);
    let grow_params =
        GrowParams { max_depth: params.max_depth, min_leaf: params.min_leaf.max(1) as f64, mtry: None };
    let rows: Vec<&SparseVector> = data.vectors().iter().collect();
    let columns = Columns::new(&rows, data.dimension());
    for stage in 1..=params.n_stages {
        let probs: Vec<f64> = scores.iter().map(|&f| sigmoid(f)).collect();
        let residuals: Vec<f64> = labels.iter().zip(&probs).map(|(y, p)| y - p).collect();
        let grow_data = GrowData {
            rows: rows.clone(),
            weights: vec![1.0; n],
            targets: residuals,
            n_features: data.dimension(),
            columns: &columns,
        };
        let tree = grow(&grow_data, grow_params, &mut rng, |rows| {
            let num: f64 = rows.iter().map(|&r| grow_data.targets[r]).sum();
            let den: f64 = rows.iter().map(|&r| probs[r] * (1.0 - probs[r])).sum();
            if den < 1e-150 {
                0.0
            } else {
                num / den
            }
        });
        for (s, x) in scores.iter_mut().zip(data.vectors()) {
            *s += params.shrinkage * tree.predict(x);
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Training(format!("GBDT scores became non-finite at stage {stage}")));
        }
        trees.push(tree);
    }
    Ok(GbdtModel { initial_score, shrinkage: params.shrinkage, trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fixture() -> Dataset {
        let mut rng = rng::stream(4);
        let rows: Vec<SparseVector> = (0..20)
            .map(|i| {
                let mut pairs = vec![(
                    0u32,
                    if i < 8 { 0.6 + rng.gen_range(0.0..0.4) } else { rng.gen_range(0.05..0.7) },
                )];
                if rng.gen_bool(0.5) {
                    pairs.push((1, rng.gen_range(0.1..1.0)));
                }
                SparseVector::from_pairs(pairs, 3).unwrap()
            })
            .collect();
        let labels = (0..20).map(|i| i < 8).collect();
        Dataset::new(rows, labels, 3).unwrap()
    }

    #[test]
    fn zero_stages_predicts_base_rate() {
        let data = fixture();
        let m = train_gbdt(&data, &GbdtParams { n_stages: 0, ..GbdtParams::default() }, 0).unwrap();
        for x in data.vectors() {
            assert!((sigmoid(m.score(x)) - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn training_loss_never_increases() {
        let data = fixture();
        let m = train_gbdt(&data, &GbdtParams { n_stages: 30, shrinkage: 0.1, max_depth: 2, min_leaf: 1 }, 0)
            .unwrap();
        let staged: Vec<Vec<f64>> = data.vectors().iter().map(|x| m.staged_scores(x)).collect();
        let losses: Vec<f64> = (0..=30)
            .map(|s| {
                let scores: Vec<f64> = staged.iter().map(|v| v[s]).collect();
                mean_log_loss(&scores, data.labels())
            })
            .collect();
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{losses:?}");
        }
        assert!(losses[30] < losses[0]);
    }

    #[test]
    fn fits_separable_fixture() {
        let data = fixture();
        let m = train_gbdt(&data, &GbdtParams { n_stages: 50, shrinkage: 1.0, max_depth: 3, min_leaf: 1 }, 0)
            .unwrap();
        for (x, &y) in data.vectors().iter().zip(data.labels()) {
            assert_eq!(m.score(x) > 0.0, y);
        }
        for t in &m.trees {
            t.validate(3).unwrap();
        }
    }
}
