use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Columns, GrowData, GrowParams, Tree};
use crate::sparse::{Dataset, SparseVector};
use crate::{par, rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per split; `None` means ceil(sqrt(dimension)).
    pub mtry: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 8, mtry: None, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_features: usize,
    pub mtry: usize,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Mean leaf positive fraction over trees.
    pub fn score(&self, x: &SparseVector) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

pub(crate) fn default_mtry(dimension: usize) -> usize {
    ((dimension as f64).sqrt().ceil() as usize).clamp(1, dimension.max(1))
}

/// Bagged Gini trees. Tree `t` draws its bootstrap sample and feature
/// subsets from a stream seeded by `(seed, t)`, so the result does not
/// depend on how trees are scheduled across threads.
pub fn train_random_forest(data: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let mtry = params.mtry.unwrap_or_else(|| default_mtry(data.dimension()));
    if params.n_trees == 0 || mtry == 0 || mtry > data.dimension() || params.max_depth == 0 {
        return Err(Error::Contract(format!(
            "invalid random forest settings {params:?} for dimension {}",
            data.dimension()
        )));
    }
    if params.min_leaf >= data.len() {
        return Err(Error::Training(format!(
            "min_leaf {} leaves no room to split {} rows",
            params.min_leaf,
            data.len()
        )));
    }
    data.require_both_classes()?;

    let n = data.len();
    let rows: Vec<&SparseVector> = data.vectors().iter().collect();
    let columns = Columns::new(&rows, data.dimension());
    let targets: Vec<f64> = data.labels().iter().map(|&l| f64::from(u8::from(l))).collect();
    let trees = par::map_range(params.n_trees, |t| {
        let mut rng = rng::stream(rng::derive(seed, &[t as u64]));
        let mut counts = vec![0u32; n];
        for _ in 0..n {
            counts[rng.gen_range(0..n)] += 1;
        }
        let grow_data = GrowData {
            rows: rows.clone(),
            weights: counts.iter().map(|&c| f64::from(c)).collect(),
            targets: targets.clone(),
            n_features: data.dimension(),
            columns: &columns,
        };
        let grow_params =
            GrowParams { max_depth: params.max_depth, min_leaf: params.min_leaf as f64, mtry: Some(mtry) };
        grow(&grow_data, grow_params, &mut rng, |rows| {
            let w: f64 = rows.iter().map(|&r| grow_data.weights[r]).sum();
            let pos: f64 = rows.iter().map(|&r| grow_data.weights[r] * grow_data.targets[r]).sum();
            pos / w
        })
    });
    Ok(ForestModel { n_features: data.dimension(), mtry, trees })
}
