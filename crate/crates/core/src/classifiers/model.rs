use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ClassifierKind, ForestModel, GbdtModel, Hyperparams, LinearFamily, LinearModel, NbModel};
use crate::sparse::SparseVector;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub feature_set: String,
    pub settings: Hyperparams,
    pub seed: u64,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    NaiveBayes(NbModel),
    Forest(ForestModel),
    Gbdt(GbdtModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub metadata: ModelMetadata,
    pub model: Model,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    family: ClassifierKind,
    metadata: ModelMetadata,
    parameters: Value,
}

#[derive(Serialize, Deserialize)]
struct LinearParameters {
    weights: Vec<f64>,
    bias: f64,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match &self.model {
            Model::Linear(m) => match m.family {
                LinearFamily::Logistic => ClassifierKind::LogisticRegression,
                LinearFamily::Svm => ClassifierKind::LinearSvm,
            },
            Model::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            Model::Forest(_) => ClassifierKind::RandomForest,
            Model::Gbdt(_) => ClassifierKind::Gbdt,
        }
    }

    pub fn dimension(&self) -> usize {
        self.metadata.dimension
    }

    fn model_dimension(&self) -> usize {
        match &self.model {
            Model::Linear(m) => m.weights.len(),
            Model::NaiveBayes(m) => m.dimension(),
            Model::Forest(m) => m.n_features,
            Model::Gbdt(_) => self.metadata.dimension,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let parameters = match &self.model {
            Model::Linear(m) => {
                serde_json::to_value(LinearParameters { weights: m.weights.clone(), bias: m.bias })?
            }
            Model::NaiveBayes(m) => serde_json::to_value(m)?,
            Model::Forest(m) => serde_json::to_value(m)?,
            Model::Gbdt(m) => serde_json::to_value(m)?,
        };
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            family: self.kind(),
            metadata: self.metadata.clone(),
            parameters,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.metadata.settings.kind() != file.family {
            return Err(Error::Data("model family does not match its settings".into()));
        }
        let linear = |family| -> Result<Model> {
            let p: LinearParameters = serde_json::from_value(file.parameters.clone())?;
            Ok(Model::Linear(LinearModel { weights: p.weights, bias: p.bias, family }))
        };
        let model = match file.family {
            ClassifierKind::LogisticRegression => linear(LinearFamily::Logistic)?,
            ClassifierKind::LinearSvm => linear(LinearFamily::Svm)?,
            ClassifierKind::NaiveBayes => Model::NaiveBayes(serde_json::from_value(file.parameters)?),
            ClassifierKind::RandomForest => Model::Forest(serde_json::from_value(file.parameters)?),
            ClassifierKind::Gbdt => Model::Gbdt(serde_json::from_value(file.parameters)?),
        };
        let trained = TrainedModel { metadata: file.metadata, model };
        if trained.model_dimension() != trained.metadata.dimension {
            return Err(Error::Data(format!(
                "model parameters have dimension {}, metadata says {}",
                trained.model_dimension(),
                trained.metadata.dimension
            )));
        }
        let trees = match &trained.model {
            Model::Forest(m) => m.trees.as_slice(),
            Model::Gbdt(m) => m.trees.as_slice(),
            _ => &[],
        };
        for t in trees {
            t.validate(trained.metadata.dimension).map_err(Error::Data)?;
        }
        Ok(trained)
    }
}

/// Ranking score for `x`: `w.x + b` for linear models, log-posterior
/// difference for naive Bayes, mean leaf fraction for forests and
/// accumulated log-odds for boosting.
pub fn predict_score(model: &TrainedModel, x: &SparseVector) -> Result<f64> {
    if x.dimension() != model.dimension() {
        return Err(Error::Contract(format!(
            "vector dimension {} does not match model dimension {}",
            x.dimension(),
            model.dimension()
        )));
    }
    Ok(match &model.model {
        Model::Linear(m) => m.score(x),
        Model::NaiveBayes(m) => m.score(x),
        Model::Forest(m) => m.score(x),
        Model::Gbdt(m) => m.score(x),
    })
}
