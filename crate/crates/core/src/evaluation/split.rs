use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    /// Validation positions (indices into the label slice the plan was built from).
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    /// Positions outside fold `k`, ascending.
    pub fn training_positions(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

fn class_members(labels: &[bool]) -> [Vec<usize>; 2] {
    let mut members = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        members[usize::from(l)].push(i);
    }
    members
}

fn class_name(c: usize) -> &'static str {
    if c == 1 {
        "positive"
    } else {
        "negative"
    }
}

/// Within each class, shuffles with the seeded stream and sends the first
/// `round(ratio * count)` members to training. Negatives are shuffled first.
pub fn stratified_split(labels: &[bool], ratio: f64, seed: u64) -> Result<SplitPlan> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Contract(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let mut rng = rng::stream(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, mut members) in class_members(labels).into_iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Evaluation(format!(
                "cannot split: the {} class has {} member(s)",
                class_name(c),
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let cut = (ratio * members.len() as f64).round() as usize;
        train.extend_from_slice(&members[..cut]);
        test.extend_from_slice(&members[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { train_indices: train, test_indices: test, seed, ratio })
}

/// Seeded shuffle per class, then round-robin fold assignment. The second
/// class continues the rotation where the first stopped so total fold sizes
/// also stay within one of each other.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Contract(format!("k must be at least 2, got {k}")));
    }
    let mut rng = rng::stream(seed);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for (c, mut members) in class_members(labels).into_iter().enumerate() {
        if members.len() < k {
            return Err(Error::Evaluation(format!(
                "cannot build {k} folds: the {} class has only {} member(s)",
                class_name(c),
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for m in members {
            folds[slot % k].push(m);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding_example() {
        let labels: Vec<bool> = (0..10).map(|i| i >= 7).collect();
        let plan = stratified_split(&labels, 0.7, 3).unwrap();
        let train_pos = plan.train_indices.iter().filter(|&&i| labels[i]).count();
        assert_eq!(plan.train_indices.len() - train_pos, 5);
        assert_eq!(train_pos, 2);
        assert_eq!(plan, stratified_split(&labels, 0.7, 3).unwrap());
    }

    #[test]
    fn balanced_halves() {
        let labels = [true, false, true, false];
        let plan = stratified_split(&labels, 0.5, 0).unwrap();
        for side in [&plan.train_indices, &plan.test_indices] {
            assert_eq!(side.len(), 2);
            assert_eq!(side.iter().filter(|&&i| labels[i]).count(), 1);
        }
    }

    #[test]
    fn split_needs_two_per_class() {
        assert!(matches!(stratified_split(&[true, false, false], 0.7, 0), Err(Error::Evaluation(_))));
    }

    #[test]
    fn ten_positives_five_folds() {
        let labels: Vec<bool> = (0..37).map(|i| i < 10).collect();
        let plan = stratified_kfold(&labels, 5, 1).unwrap();
        for f in &plan.folds {
            assert_eq!(f.iter().filter(|&&i| labels[i]).count(), 2);
        }
    }

    #[test]
    fn kfold_class_too_small() {
        let labels: Vec<bool> = (0..20).map(|i| i < 3).collect();
        match stratified_kfold(&labels, 5, 0) {
            Err(Error::Evaluation(msg)) => assert!(msg.contains("positive")),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn split_partition_and_balance(
            labels in prop::collection::vec(any::<bool>(), 10..500),
            seed in any::<u64>(),
            ratio in 0.1f64..0.9,
        ) {
            let pos = labels.iter().filter(|&&l| l).count();
            prop_assume!(pos >= 2 && labels.len() - pos >= 2);
            let plan = stratified_split(&labels, ratio, seed).unwrap();
            let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for class in [false, true] {
                let count = labels.iter().filter(|&&l| l == class).count() as f64;
                let in_train = plan.train_indices.iter().filter(|&&i| labels[i] == class).count() as f64;
                prop_assert!((in_train - (ratio * count).round()).abs() <= 1.0);
            }
        }

        #[test]
        fn folds_partition_and_balance(
            labels in prop::collection::vec(any::<bool>(), 10..500),
            seed in any::<u64>(),
            k in 2usize..8,
        ) {
            let pos = labels.iter().filter(|&&l| l).count();
            prop_assume!(pos >= k && labels.len() - pos >= k);
            let plan = stratified_kfold(&labels, k, seed).unwrap();
            let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for class in [false, true] {
                let sizes: Vec<usize> = plan.folds.iter()
                    .map(|f| f.iter().filter(|&&i| labels[i] == class).count())
                    .collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
        }
    }
}
