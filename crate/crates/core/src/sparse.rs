//! Sparse feature vectors and labelled datasets.

use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Sorted-index sparse vector. Indices are strictly increasing and below
/// `dimension`; stored values are finite and non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
    dimension: usize,
}

impl SparseVector {
    pub fn new(indices: Vec<u32>, values: Vec<f64>, dimension: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Contract(format!("{} indices but {} values", indices.len(), values.len())));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&i| i as usize >= dimension) {
            return Err(Error::Contract(format!("index out of range for dimension {dimension}")));
        }
        if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::Contract("values must be finite and non-zero".into()));
        }
        Ok(SparseVector { indices, values, dimension })
    }

    pub fn zero(dimension: usize) -> Self {
        SparseVector { indices: Vec::new(), values: Vec::new(), dimension }
    }

    /// Builds from unsorted `(index, value)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>, dimension: usize) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let mut indices: Vec<u32> = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let (indices, values) = indices.into_iter().zip(values).filter(|(_, v)| *v != 0.0).unzip();
        Self::new(indices, values, dimension)
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| dense[i] * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            dimension: self.dimension,
        }
    }

    /// Returns the vector scaled to unit Euclidean norm; the zero vector is
    /// returned unchanged.
    pub fn l2_normalized(self) -> SparseVector {
        let norm = self.norm();
        if norm == 0.0 {
            return self;
        }
        SparseVector { values: self.values.iter().map(|v| v / norm).collect(), ..self }
    }
}

/// Feature vectors with binary labels and row identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    vectors: Vec<SparseVector>,
    labels: Vec<bool>,
    ids: Vec<i64>,
    dimension: usize,
}

impl Dataset {
    pub fn new(vectors: Vec<SparseVector>, labels: Vec<bool>, dimension: usize) -> Result<Self> {
        let ids = (0..vectors.len() as i64).collect();
        Self::with_ids(vectors, labels, ids, dimension)
    }

    pub fn with_ids(
        vectors: Vec<SparseVector>,
        labels: Vec<bool>,
        ids: Vec<i64>,
        dimension: usize,
    ) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Contract("dataset must have at least one row".into()));
        }
        if vectors.len() != labels.len() || vectors.len() != ids.len() {
            return Err(Error::Contract(format!(
                "dataset has {} vectors, {} labels and {} ids",
                vectors.len(),
                labels.len(),
                ids.len()
            )));
        }
        if let Some(bad) = vectors.iter().position(|v| v.dimension() != dimension) {
            return Err(Error::Contract(format!(
                "row {bad} has dimension {}, dataset dimension is {dimension}",
                vectors[bad].dimension()
            )));
        }
        Ok(Dataset { vectors, labels, ids, dimension })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn ids(&self) -> &[i64] {
        &self.ids
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Rows at `rows`, in that order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            vectors: rows.iter().map(|&r| self.vectors[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            ids: rows.iter().map(|&r| self.ids[r]).collect(),
            dimension: self.dimension,
        }
    }

    /// Errors unless both classes are present.
    pub fn require_both_classes(&self) -> Result<()> {
        let pos = self.positives();
        if pos == 0 || pos == self.len() {
            return Err(Error::Training(format!(
                "training data has a single class ({} rows, {pos} positive)",
                self.len()
            )));
        }
        Ok(())
    }

    /// Writes the text sparse-matrix format:
    ///
    /// ```text
    /// # readmit-sparse v1 dimension=<D> rows=<N>
    /// <id> <0|1> <index>:<value> ...
    /// ```
    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# readmit-sparse v1 dimension={} rows={}", self.dimension, self.len())?;
        for ((v, &label), id) in self.vectors.iter().zip(&self.labels).zip(&self.ids) {
            write!(out, "{id} {}", u8::from(label))?;
            for (i, x) in v.iter() {
                write!(out, " {i}:{x:?}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R, source_name: &str) -> Result<Dataset> {
        let err = |line: usize, message: String| Error::Line {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|e| Error::io(source_name, e))?,
            None => return Err(err(1, "empty dataset file".into())),
        };
        let mut dimension = None;
        let mut rows = None;
        if header.starts_with("# readmit-sparse v1") {
            for kv in header.split_whitespace() {
                if let Some(d) = kv.strip_prefix("dimension=") {
                    dimension = d.parse::<usize>().ok();
                } else if let Some(n) = kv.strip_prefix("rows=") {
                    rows = n.parse::<usize>().ok();
                }
            }
        }
        let (Some(dimension), Some(rows)) = (dimension, rows) else {
            return Err(err(1, "missing or malformed readmit-sparse header".into()));
        };

        let mut vectors = Vec::with_capacity(rows);
        let mut labels = Vec::with_capacity(rows);
        let mut ids = Vec::with_capacity(rows);
        for (n, line) in lines {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let id = parts
                .next()
                .and_then(|s| s.parse::<i64>().ok())
                .ok_or_else(|| err(n + 1, "bad row id".into()))?;
            let label = match parts.next() {
                Some("1") => true,
                Some("0") => false,
                _ => return Err(err(n + 1, "label must be 0 or 1".into())),
            };
            let mut indices = Vec::new();
            let mut values = Vec::new();
            for entry in parts {
                let parsed = entry
                    .split_once(':')
                    .and_then(|(i, v)| Some((i.parse::<u32>().ok()?, v.parse::<f64>().ok()?)));
                let (i, v) = parsed.ok_or_else(|| err(n + 1, format!("bad entry {entry:?}")))?;
                indices.push(i);
                values.push(v);
            }
            let vector =
                SparseVector::new(indices, values, dimension).map_err(|e| err(n + 1, e.to_string()))?;
            vectors.push(vector);
            labels.push(label);
            ids.push(id);
        }
        if vectors.len() != rows {
            return Err(err(1, format!("header declares {rows} rows, found {}", vectors.len())));
        }
        Dataset::with_ids(vectors, labels, ids, dimension)
    }
}
