//! Predicate depth over a finite sample.
//!
//! The depth of `f` at row `i` is the belief mass `O(x_i, f(x_i))` behind its
//! prediction; the depth over a sample is the minimum of those values, and the
//! trimmed depth ignores the `floor(eps * m)` shallowest rows first.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::Classifier;
use crate::oracle::{quantize, OracleSource};

/// A depth in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DepthValue(pub f64);

impl DepthValue {
    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDepth {
    pub row: usize,
    pub depth: DepthValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DepthProfile {
    pub per_point: Vec<PointDepth>,
    pub overall: DepthValue,
    pub trimmed_rows: Vec<usize>,
}

/// Number of rows dropped at trimming level `epsilon` over `m` rows.
///
/// The product is nudged by 1e-9 before flooring so that levels like 0.29 on
/// 100 rows trim 29 rows despite binary rounding.
pub fn trim_count(epsilon: f64, m: usize) -> usize {
    libm::floor(epsilon * m as f64 + 1e-9) as usize
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

fn check_dims<C: Classifier + ?Sized>(f: &C, d: &Dataset) -> Result<()> {
    if f.num_features() != d.num_attrs() {
        return Err(Error::FeatureDimensionMismatch { expected: f.num_features(), found: d.num_attrs() });
    }
    Ok(())
}

fn check_row(row: usize, d: &Dataset, o: &dyn OracleSource) -> Result<()> {
    let rows = d.num_rows().min(o.num_rows());
    if row >= rows {
        return Err(Error::RowOutOfRange { row, rows });
    }
    Ok(())
}

pub fn depth_at_point<C: Classifier + ?Sized>(f: &C, o: &dyn OracleSource, d: &Dataset, row: usize) -> Result<DepthValue> {
    check_dims(f, d)?;
    check_row(row, d, o)?;
    Ok(DepthValue(o.prob(row, f.predict_row(d.row(row)))))
}

fn per_point<C: Classifier + ?Sized>(f: &C, o: &dyn OracleSource, d: &Dataset, rows: &[usize]) -> Result<Vec<PointDepth>> {
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    check_dims(f, d)?;
    rows.iter()
        .map(|&row| {
            check_row(row, d, o)?;
            Ok(PointDepth { row, depth: DepthValue(o.prob(row, f.predict_row(d.row(row)))) })
        })
        .collect()
}

fn min_depth(points: &[PointDepth]) -> DepthValue {
    DepthValue(points.iter().map(|p| p.depth.0).fold(f64::INFINITY, f64::min))
}

/// Minimum per-point depth over `rows`.
pub fn empirical_depth<C: Classifier + ?Sized>(f: &C, o: &dyn OracleSource, d: &Dataset, rows: &[usize]) -> Result<DepthProfile> {
    let per_point = per_point(f, o, d, rows)?;
    let overall = min_depth(&per_point);
    Ok(DepthProfile { per_point, overall, trimmed_rows: Vec::new() })
}

/// Depth with respect to a finite hypothesis sample: the share of
/// `hypotheses` agreeing with `f` at each row, minimized over rows.
///
/// Shares are quantized like every oracle value, so the result equals
/// [`empirical_depth`] under the sample's vote oracle bit for bit.
pub fn sample_depth<C: Classifier, H: Classifier>(f: &C, hypotheses: &[H], d: &Dataset, rows: &[usize]) -> Result<DepthProfile> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyHypothesisSample);
    }
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    check_dims(f, d)?;
    for h in hypotheses {
        check_dims(h, d)?;
    }
    let n = hypotheses.len() as f64;
    let per_point: Vec<PointDepth> = rows
        .iter()
        .map(|&row| {
            if row >= d.num_rows() {
                return Err(Error::RowOutOfRange { row, rows: d.num_rows() });
            }
            let x = d.row(row);
            let mine = f.predict_row(x);
            let agree = hypotheses.iter().filter(|h| h.predict_row(x) == mine).count();
            Ok(PointDepth { row, depth: DepthValue(quantize(agree as f64 / n)) })
        })
        .collect::<Result<_>>()?;
    let overall = min_depth(&per_point);
    Ok(DepthProfile { per_point, overall, trimmed_rows: Vec::new() })
}

/// The `(t + 1)`-th smallest per-point depth, `t = floor(epsilon * m)`.
///
/// The `t` shallowest rows are reported in `trimmed_rows` (ascending); depth
/// ties are trimmed lower row index first.
pub fn trimmed_depth<C: Classifier + ?Sized>(
    f: &C,
    o: &dyn OracleSource,
    d: &Dataset,
    rows: &[usize],
    epsilon: f64,
) -> Result<DepthProfile> {
    check_epsilon(epsilon)?;
    let trim = trim_count(epsilon, rows.len());
    if trim >= rows.len() {
        return Err(Error::TrimExceedsSample { trim, rows: rows.len() });
    }
    let per_point = per_point(f, o, d, rows)?;
    if trim == 0 {
        let overall = min_depth(&per_point);
        return Ok(DepthProfile { per_point, overall, trimmed_rows: Vec::new() });
    }
    let mut order: Vec<&PointDepth> = per_point.iter().collect();
    order.sort_by(|a, b| a.depth.0.total_cmp(&b.depth.0).then(a.row.cmp(&b.row)));
    let overall = order[trim].depth;
    let mut trimmed_rows: Vec<usize> = order[..trim].iter().map(|p| p.row).collect();
    trimmed_rows.sort_unstable();
    Ok(DepthProfile { per_point, overall, trimmed_rows })
}
