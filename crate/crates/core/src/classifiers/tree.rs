//! CART regression trees over sparse rows.
//!
//! Splits minimize weighted squared error. For 0/1 targets the weighted
//! squared error of a node is half its weighted Gini impurity, so the same
//! search serves the forest (Gini on labels) and boosting (squared error on
//! residuals).

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::sparse::SparseVector;

/// Flattened binary tree. Node 0 is the root; leaves have `feature == -1`
/// and `left == right == -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<i32>,
    pub right: Vec<i32>,
    pub value: Vec<f64>,
    /// Weighted squared-error reduction achieved by each split (0 at leaves).
    pub gain: Vec<f64>,
}

impl Tree {
    pub fn leaf(value: f64) -> Tree {
        Tree {
            feature: vec![-1],
            threshold: vec![0.0],
            left: vec![-1],
            right: vec![-1],
            value: vec![value],
            gain: vec![0.0],
        }
    }

    pub fn node_count(&self) -> usize {
        self.feature.len()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.feature[node] < 0
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_for(&self, x: &SparseVector) -> usize {
        let mut node = 0;
        while !self.is_leaf(node) {
            let f = self.feature[node] as usize;
            node = if x.get(f) <= self.threshold[node] {
                self.left[node] as usize
            } else {
                self.right[node] as usize
            };
        }
        node
    }

    pub fn predict(&self, x: &SparseVector) -> f64 {
        self.value[self.leaf_for(x)]
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((node, d)) = stack.pop() {
            best = best.max(d);
            if !self.is_leaf(node) {
                stack.push((self.left[node] as usize, d + 1));
                stack.push((self.right[node] as usize, d + 1));
            }
        }
        best
    }

    /// Checks structural consistency against a feature count.
    pub fn validate(&self, n_features: usize) -> Result<(), String> {
        let n = self.node_count();
        let same =
            [self.threshold.len(), self.left.len(), self.right.len(), self.value.len(), self.gain.len()];
        if n == 0 || same.iter().any(|&l| l != n) {
            return Err("tree arrays have inconsistent lengths".into());
        }
        for i in 0..n {
            if self.feature[i] >= 0 {
                if self.feature[i] as usize >= n_features {
                    return Err(format!("node {i} splits on feature {} >= {n_features}", self.feature[i]));
                }
                for child in [self.left[i], self.right[i]] {
                    if child <= i as i32 || child as usize >= n {
                        return Err(format!("node {i} has invalid child {child}"));
                    }
                }
            } else if self.left[i] != -1 || self.right[i] != -1 {
                return Err(format!("leaf {i} has children"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    /// Minimum total sample weight on each side of a split.
    pub min_leaf: f64,
    /// Features sampled per node; `None` considers all.
    pub mtry: Option<usize>,
}

/// Feature columns of a row set, each sorted by `(value, row)`. Built
/// once per fit and shared by every tree grown on the same rows.
pub(crate) struct Columns {
    offsets: Vec<usize>,
    entries: Vec<(f64, u32)>,
}

impl Columns {
    pub fn new(rows: &[&SparseVector], n_features: usize) -> Columns {
        let mut offsets = vec![0usize; n_features + 1];
        for r in rows {
            for &f in r.indices() {
                offsets[f as usize + 1] += 1;
            }
        }
        for f in 0..n_features {
            offsets[f + 1] += offsets[f];
        }
        let mut fill = offsets.clone();
        let mut entries = vec![(0.0, 0u32); offsets[n_features]];
        for (i, r) in rows.iter().enumerate() {
            for (f, v) in r.iter() {
                entries[fill[f]] = (v, i as u32);
                fill[f] += 1;
            }
        }
        for f in 0..n_features {
            entries[offsets[f]..offsets[f + 1]]
                .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        Columns { offsets, entries }
    }

    fn column(&self, f: usize) -> &[(f64, u32)] {
        &self.entries[self.offsets[f]..self.offsets[f + 1]]
    }
}

/// Training rows for one tree: row references, sample weights, targets and
/// the column index over the same rows. Rows with zero weight are ignored.
pub(crate) struct GrowData<'a> {
    pub rows: Vec<&'a SparseVector>,
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    pub n_features: usize,
    pub columns: &'a Columns,
}

/// How a node gathers its candidate entries. Both give the same sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Gather {
    Auto,
    #[cfg_attr(not(test), allow(dead_code))]
    Rows,
    #[cfg_attr(not(test), allow(dead_code))]
    Columns,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    w: f64,
    wy: f64,
    wyy: f64,
}

impl Moments {
    fn add(&mut self, w: f64, y: f64) {
        self.w += w;
        self.wy += w * y;
        self.wyy += w * y * y;
    }

    fn plus(self, o: Moments) -> Moments {
        Moments { w: self.w + o.w, wy: self.wy + o.wy, wyy: self.wyy + o.wyy }
    }

    fn minus(self, o: Moments) -> Moments {
        Moments { w: self.w - o.w, wy: self.wy - o.wy, wyy: self.wyy - o.wyy }
    }

    fn sse(&self) -> f64 {
        if self.w <= 0.0 {
            0.0
        } else {
            (self.wyy - self.wy * self.wy / self.w).max(0.0)
        }
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

const MIN_GAIN: f64 = 1e-12;

/// Grows one tree. `leaf_value` maps the row positions (into `data`) that
/// reach a leaf to that leaf's output.
pub(crate) fn grow<F>(data: &GrowData<'_>, params: GrowParams, rng: &mut Rng, leaf_value: F) -> Tree
where
    F: Fn(&[usize]) -> f64,
{
    grow_with(data, params, rng, leaf_value, Gather::Auto)
}

fn grow_with<F>(data: &GrowData<'_>, params: GrowParams, rng: &mut Rng, leaf_value: F, gather: Gather) -> Tree
where
    F: Fn(&[usize]) -> f64,
{
    let mut tree = Tree {
        feature: Vec::new(),
        threshold: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
        value: Vec::new(),
        gain: Vec::new(),
    };
    let mut scratch =
        Scratch { selected: vec![false; data.n_features], in_node: vec![false; data.rows.len()] };
    let all: Vec<usize> = (0..data.rows.len()).filter(|&r| data.weights[r] > 0.0).collect();
    // (node id, rows, depth); node ids are assigned in creation order.
    let mut stack = vec![(push_node(&mut tree), all, 0usize)];
    while let Some((node, rows, depth)) = stack.pop() {
        let split = if depth < params.max_depth {
            best_split(data, &rows, params, rng, &mut scratch, gather)
        } else {
            None
        };
        let Some(split) = split else {
            tree.value[node] = leaf_value(&rows);
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| data.rows[r].get(split.feature) <= split.threshold);
        let left = push_node(&mut tree);
        let right = push_node(&mut tree);
        tree.feature[node] = split.feature as i32;
        tree.threshold[node] = split.threshold;
        tree.left[node] = left as i32;
        tree.right[node] = right as i32;
        tree.gain[node] = split.gain;
        // Right pushed first so the left subtree is expanded next.
        stack.push((right, right_rows, depth + 1));
        stack.push((left, left_rows, depth + 1));
    }
    tree
}

fn push_node(tree: &mut Tree) -> usize {
    tree.feature.push(-1);
    tree.threshold.push(0.0);
    tree.left.push(-1);
    tree.right.push(-1);
    tree.value.push(0.0);
    tree.gain.push(0.0);
    tree.feature.len() - 1
}

struct Scratch {
    selected: Vec<bool>,
    in_node: Vec<bool>,
}

fn best_split(
    data: &GrowData<'_>,
    rows: &[usize],
    params: GrowParams,
    rng: &mut Rng,
    scratch: &mut Scratch,
    gather: Gather,
) -> Option<Split> {
    let mut total = Moments::default();
    let mut node_nnz = 0usize;
    for &r in rows {
        total.add(data.weights[r], data.targets[r]);
        node_nnz += data.rows[r].nnz();
    }
    let parent_sse = total.sse();
    if parent_sse <= MIN_GAIN || total.w < 2.0 * params.min_leaf {
        return None;
    }

    let features: Vec<usize> = match params.mtry.filter(|&m| m < data.n_features) {
        Some(m) => {
            let mut f = index::sample(rng, data.n_features, m).into_vec();
            f.sort_unstable();
            f
        }
        None => (0..data.n_features).collect(),
    };
    let sampled = features.len() < data.n_features;
    let column_cost: usize = features.iter().map(|&f| data.columns.column(f).len()).sum();
    let kept = node_nnz as f64 * features.len() as f64 / data.n_features.max(1) as f64;
    let row_cost = node_nnz as f64 + kept * (kept + 2.0).log2();
    let by_column = match gather {
        Gather::Auto => (column_cost as f64) < row_cost,
        Gather::Rows => false,
        Gather::Columns => true,
    };

    // (feature, value, row) for every stored entry of a candidate feature,
    // ordered by feature, then value, then row.
    let mut entries: Vec<(u32, f64, u32)> = Vec::new();
    if by_column {
        for &r in rows {
            scratch.in_node[r] = true;
        }
        for &f in &features {
            for &(v, r) in data.columns.column(f) {
                if scratch.in_node[r as usize] {
                    entries.push((f as u32, v, r));
                }
            }
        }
        for &r in rows {
            scratch.in_node[r] = false;
        }
    } else {
        if sampled {
            for &f in &features {
                scratch.selected[f] = true;
            }
        }
        for &r in rows {
            for (f, v) in data.rows[r].iter() {
                if !sampled || scratch.selected[f] {
                    entries.push((f as u32, v, r as u32));
                }
            }
        }
        if sampled {
            for &f in &features {
                scratch.selected[f] = false;
            }
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    }

    let mut best: Option<Split> = None;
    let mut start = 0;
    while start < entries.len() {
        let feature = entries[start].0;
        let end = start + entries[start..].iter().take_while(|e| e.0 == feature).count();
        let group = &entries[start..end];
        start = end;

        let mut stored = Moments::default();
        for &(_, _, r) in group {
            stored.add(data.weights[r as usize], data.targets[r as usize]);
        }
        let zeros = total.minus(stored);

        // Distinct values in ascending order, the implicit zeros as one block.
        let mut blocks: Vec<(f64, Moments)> = Vec::new();
        let mut zero_placed = zeros.w <= 1e-12;
        for &(_, v, r) in group {
            if !zero_placed && v > 0.0 {
                blocks.push((0.0, zeros));
                zero_placed = true;
            }
            match blocks.last_mut() {
                Some((last, m)) if *last == v => m.add(data.weights[r as usize], data.targets[r as usize]),
                _ => {
                    let mut m = Moments::default();
                    m.add(data.weights[r as usize], data.targets[r as usize]);
                    blocks.push((v, m));
                }
            }
        }
        if !zero_placed {
            blocks.push((0.0, zeros));
        }

        let mut left = Moments::default();
        for pair in blocks.windows(2) {
            left = left.plus(pair[0].1);
            let right = total.minus(left);
            if left.w < params.min_leaf || right.w < params.min_leaf {
                continue;
            }
            let gain = parent_sse - left.sse() - right.sse();
            if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                let (lo, hi) = (pair[0].0, pair[1].0);
                best = Some(Split { feature: feature as usize, threshold: lo + (hi - lo) / 2.0, gain });
            }
        }
    }
    best
}
