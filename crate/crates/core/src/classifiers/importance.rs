use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Model, TrainedModel, Tree};
use crate::text::Vocabulary;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub term: String,
    pub importance: f64,
    /// Signed weight for linear models.
    pub weight: Option<f64>,
}

/// Top `k` features by importance, ties broken by term.
///
/// Linear models rank by |weight|. Forests rank by weighted Gini decrease
/// averaged over trees; boosting by squared-error reduction summed over
/// stages. Features with zero importance are never listed. Naive Bayes is
/// not supported.
pub fn feature_importance(
    model: &TrainedModel,
    vocab: &Vocabulary,
    k: usize,
) -> Result<Vec<FeatureImportance>> {
    if k == 0 {
        return Err(Error::Contract("k must be at least 1".into()));
    }
    if vocab.len() != model.dimension() {
        return Err(Error::Contract(format!(
            "vocabulary has {} terms but the model expects {}",
            vocab.len(),
            model.dimension()
        )));
    }
    let scored: Vec<(usize, f64, Option<f64>)> = match &model.model {
        Model::Linear(m) => m
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(j, &w)| (j, w.abs(), Some(w)))
            .collect(),
        Model::Forest(m) => {
            // Squared-error gain on 0/1 targets is half the Gini decrease.
            let totals = tree_gains(&m.trees, m.n_features);
            let scale = 2.0 / m.trees.len() as f64;
            dense_to_scored(totals, scale)
        }
        Model::Gbdt(m) => dense_to_scored(tree_gains(&m.trees, model.dimension()), 1.0),
        Model::NaiveBayes(_) => {
            return Err(Error::Unsupported("feature importance is not defined for naive Bayes models".into()))
        }
    };
    let mut ranked: Vec<FeatureImportance> = scored
        .into_iter()
        .map(|(j, importance, weight)| FeatureImportance {
            term: vocab.term(j).unwrap_or_default().to_string(),
            importance,
            weight,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.importance.partial_cmp(&a.importance).unwrap_or(Ordering::Equal).then_with(|| a.term.cmp(&b.term))
    });
    ranked.truncate(k);
    Ok(ranked)
}

fn tree_gains(trees: &[Tree], n_features: usize) -> Vec<f64> {
    let mut totals = vec![0.0; n_features];
    for t in trees {
        for (f, g) in t.feature.iter().zip(&t.gain) {
            if *f >= 0 {
                totals[*f as usize] += g;
            }
        }
    }
    totals
}

fn dense_to_scored(totals: Vec<f64>, scale: f64) -> Vec<(usize, f64, Option<f64>)> {
    totals.into_iter().enumerate().filter(|(_, g)| *g > 0.0).map(|(j, g)| (j, g * scale, None)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{
        Hyperparams, LinearFamily, LinearModel, LogisticParams, ModelMetadata, NbModel,
    };

    fn vocab(terms: &[&str]) -> Vocabulary {
        let docs: Vec<Vec<&str>> = (0..10).map(|_| terms.to_vec()).collect();
        let settings = crate::text::VocabularySettings { min_doc_count: 1, max_doc_fraction: 1.0 };
        Vocabulary::from_documents(&docs, settings).unwrap()
    }

    fn linear(weights: Vec<f64>) -> TrainedModel {
        TrainedModel {
            metadata: ModelMetadata {
                feature_set: "bow".into(),
                settings: Hyperparams::LogisticRegression(LogisticParams::default()),
                seed: 0,
                dimension: weights.len(),
            },
            model: Model::Linear(LinearModel { weights, bias: 0.0, family: LinearFamily::Logistic }),
        }
    }

    #[test]
    fn single_nonzero_weight() {
        let got = feature_importance(&linear(vec![0.0, -2.5, 0.0]), &vocab(&["aa", "bb", "cc"]), 20).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].term, "bb");
        assert_eq!(got[0].importance, 2.5);
        assert_eq!(got[0].weight, Some(-2.5));
    }

    #[test]
    fn ranks_by_magnitude_then_term() {
        let v = vocab(&["t0", "t1"]);
        let got = feature_importance(&linear(vec![3.0, -5.0]), &v, 20).unwrap();
        assert_eq!(got.iter().map(|f| f.term.as_str()).collect::<Vec<_>>(), ["t1", "t0"]);
        let v = vocab(&["alpha", "beta", "gamma"]);
        let got = feature_importance(&linear(vec![1.0, -1.0, 1.0]), &v, 2).unwrap();
        assert_eq!(got.iter().map(|f| f.term.as_str()).collect::<Vec<_>>(), ["alpha", "beta"]);
    }

    #[test]
    fn naive_bayes_unsupported() {
        let m = TrainedModel {
            metadata: ModelMetadata {
                feature_set: "bow".into(),
                settings: Hyperparams::NaiveBayes { alpha: 1.0 },
                seed: 0,
                dimension: 1,
            },
            model: Model::NaiveBayes(NbModel {
                log_prior: [0.5f64.ln(); 2],
                log_likelihood: [vec![0.0], vec![0.0]],
                alpha: 1.0,
            }),
        };
        assert!(matches!(feature_importance(&m, &vocab(&["aa"]), 5), Err(Error::Unsupported(_))));
    }
}
