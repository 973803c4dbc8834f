//! Belief oracles `O(x_i, y)` addressed by sample row.
//!
//! Every adapter materializes a [`TableOracle`]: a row-stochastic matrix with
//! entries quantized to [`QUANTUM`], so the threshold set is finite and
//! identical on every platform.

use alloc::vec::Vec;

use crate::data::{ClassId, Dataset};
use crate::error::{Error, Result};
use crate::model::{Classifier, ForestModel};

/// Resolution of stored oracle values.
pub const QUANTUM: f64 = 1e-9;

/// Allowed deviation of a row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Nearest multiple of [`QUANTUM`], computed as `round(p * 1e9) / 1e9` so
/// that decimal grid values such as 0.6 come back exactly.
pub fn quantize(p: f64) -> f64 {
    const SCALE: f64 = 1e9;
    libm::round(p * SCALE) / SCALE
}

/// Read-only belief over the rows of one dataset.
pub trait OracleSource: Sync {
    fn num_rows(&self) -> usize;

    fn num_classes(&self) -> usize;

    /// The class distribution at `row`.
    fn row(&self, row: usize) -> &[f64];

    fn prob(&self, row: usize, class: ClassId) -> f64 {
        self.row(row)[class.0]
    }
}

/// Dense row-major probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOracle {
    values: Vec<f64>,
    num_rows: usize,
    num_classes: usize,
}

impl TableOracle {
    /// Validates and quantizes a row-major `num_rows x num_classes` matrix.
    ///
    /// With `normalize`, each row is divided by its sum; otherwise rows must
    /// already sum to 1 within [`ROW_SUM_TOLERANCE`].
    pub fn from_matrix(mut values: Vec<f64>, num_rows: usize, num_classes: usize, normalize: bool) -> Result<Self> {
        if num_classes == 0 || values.len() != num_rows * num_classes {
            return Err(Error::ShapeMismatch {
                rows: num_rows,
                classes: num_classes,
                found_rows: values.len().checked_div(num_classes).unwrap_or(0),
                found_cols: num_classes,
            });
        }
        for (row, chunk) in values.chunks_mut(num_classes).enumerate() {
            if let Some(class) = chunk.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::NegativeEntry { row, class });
            }
            let sum: f64 = chunk.iter().sum();
            if normalize {
                if sum <= 0.0 {
                    return Err(Error::RowNotStochastic { row, sum });
                }
                chunk.iter_mut().for_each(|v| *v /= sum);
            } else if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowNotStochastic { row, sum });
            }
            chunk.iter_mut().for_each(|v| *v = quantize(*v));
        }
        Ok(TableOracle { values, num_rows, num_classes })
    }

    /// Copies the given rows, in order, into a new oracle.
    pub fn restrict(oracle: &dyn OracleSource, rows: &[usize]) -> TableOracle {
        let mut values = Vec::with_capacity(rows.len() * oracle.num_classes());
        for &r in rows {
            values.extend_from_slice(oracle.row(r));
        }
        TableOracle { values, num_rows: rows.len(), num_classes: oracle.num_classes() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl OracleSource for TableOracle {
    fn num_rows(&self) -> usize {
        self.num_rows
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.num_classes..(row + 1) * self.num_classes]
    }
}

/// Matrix oracle for `d`: shape must be `d.num_rows() x d.num_classes()`.
pub fn matrix_oracle(values: Vec<f64>, rows: usize, cols: usize, d: &Dataset, normalize: bool) -> Result<TableOracle> {
    if rows != d.num_rows() || cols != d.num_classes() || values.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            rows: d.num_rows(),
            classes: d.num_classes(),
            found_rows: rows,
            found_cols: cols,
        });
    }
    TableOracle::from_matrix(values, rows, cols, normalize)
}

/// Fraction of `voters` predicting each class at each row of `d`.
///
/// With the members of a hypothesis sample as voters this is the counting
/// oracle under which oracle depth and sample depth coincide.
pub fn vote_oracle<C: Classifier>(voters: &[C], d: &Dataset) -> Result<TableOracle> {
    if voters.is_empty() {
        return Err(Error::EmptyHypothesisSample);
    }
    let k = d.num_classes();
    let n = voters.len() as f64;
    let mut counts = alloc::vec![0usize; d.num_rows() * k];
    for voter in voters {
        for (i, class) in voter.predict(d)?.into_iter().enumerate() {
            counts[i * k + class.0] += 1;
        }
    }
    let values = counts.into_iter().map(|c| quantize(c as f64 / n)).collect();
    Ok(TableOracle { values, num_rows: d.num_rows(), num_classes: k })
}

/// Hard-vote oracle of a forest: `O(x_i, y)` = share of trees predicting `y`.
pub fn ensemble_vote_oracle(forest: &ForestModel, d: &Dataset) -> Result<TableOracle> {
    vote_oracle(&forest.trees, d)
}

/// Temperature softmax. Rejects non-positive temperatures and non-finite scores.
pub fn softmax(scores: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| libm::exp((s - max) / temperature)).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Sorted distinct oracle values over a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet(Vec<f64>);

impl ThresholdSet {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of an exact member.
    pub fn position(&self, value: f64) -> Option<usize> {
        self.0.binary_search_by(|v| v.total_cmp(&value)).ok()
    }
}

pub fn threshold_set(oracle: &dyn OracleSource, rows: &[usize]) -> Result<ThresholdSet> {
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut values: Vec<f64> = rows.iter().flat_map(|&r| oracle.row(r).iter().copied()).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(ThresholdSet(values))
}
