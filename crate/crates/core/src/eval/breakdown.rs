use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{ClassId, Dataset};
use crate::error::{Error, Result};
use crate::learners::ConsistentLearner;
use crate::memo::memo;
use crate::model::Classifier;
use crate::oracle::{OracleSource, TableOracle};
use crate::util::par_map;

/// Largest instance the probe enumerates labelings for.
pub const MAX_ROWS: usize = 6;
pub const MAX_CLASSES: usize = 3;

/// Perturbation steps `0.01, 0.02, ..., 1.00`.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=100).map(|i| f64::from(i) / 100.0).collect()
}

/// A perturbation under which the search output predicts the target class
/// at the target row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PerturbationHit {
    pub delta: f64,
    /// Sup-norm distance between the original and perturbed oracle.
    pub norm: f64,
    pub labeling: Vec<ClassId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BreakdownReport {
    pub depth: f64,
    pub min_prob: f64,
    pub target_row: usize,
    pub target_class: ClassId,
    /// `(depth - min_prob) / 2`.
    pub bound: f64,
    pub perturbations_checked: usize,
    /// Smallest perturbation that produced the target prediction.
    pub empirical_breakdown: Option<PerturbationHit>,
    /// Hits strictly inside the bound.
    pub violations: Vec<PerturbationHit>,
    pub passed: bool,
}

/// Pushes each row toward `labeling` by `delta`, then clips and renormalizes.
fn perturb(o: &TableOracle, labeling: &[ClassId], delta: f64) -> Result<TableOracle> {
    let k = o.num_classes();
    let share = delta / (k - 1) as f64;
    let mut values = Vec::with_capacity(o.values().len());
    for (row, target) in labeling.iter().enumerate() {
        for (c, &p) in o.row(row).iter().enumerate() {
            let moved = if c == target.0 { p + delta } else { p - share };
            values.push(moved.clamp(0.0, 1.0));
        }
    }
    TableOracle::from_matrix(values, o.num_rows(), k, true)
}

fn sup_distance(a: &TableOracle, b: &TableOracle) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Tries to force the search to predict the least believed class at its row.
///
/// With `p*` the smallest oracle entry (first in row-major order) at row
/// `x*`, class `y*`, and `d` the depth found on the unperturbed oracle, no
/// perturbation closer than `(d - p*) / 2` in sup-norm should make the output
/// predict `y*` at `x*`. The probe enumerates every labeling `g` of the rows
/// with `g(x*) = y*` and every step in `delta_grid`, moves `delta` of mass
/// toward `g` on each row, reruns the search and records the hits.
pub fn breakdown_probe(
    d: &Dataset,
    o: &TableOracle,
    learner: &dyn ConsistentLearner,
    delta_grid: &[f64],
) -> Result<BreakdownReport> {
    let (m, k) = (o.num_rows(), o.num_classes());
    if m > MAX_ROWS || k > MAX_CLASSES {
        return Err(Error::InstanceTooLarge { rows: m, classes: k });
    }
    if !learner.is_exact() {
        return Err(Error::InvalidConfig("the breakdown probe needs an exact learner".into()));
    }
    let base = memo(d, o, learner)?;
    let (mut target_row, mut target_class, mut min_prob) = (0, ClassId(0), f64::INFINITY);
    for row in 0..m {
        for (c, &p) in o.row(row).iter().enumerate() {
            if p < min_prob {
                (target_row, target_class, min_prob) = (row, ClassId(c), p);
            }
        }
    }
    let depth = base.depth.0;
    let bound = (depth - min_prob) / 2.0;

    let free = m - 1;
    let labelings: Vec<Vec<ClassId>> = (0..k.pow(free as u32))
        .map(|mut code| {
            let mut g = vec![target_class; m];
            for (row, slot) in g.iter_mut().enumerate() {
                if row != target_row {
                    *slot = ClassId(code % k);
                    code /= k;
                }
            }
            g
        })
        .collect();
    let target_x = d.row(target_row);
    let per_labeling = par_map(&labelings, |g| -> Result<Vec<PerturbationHit>> {
        let mut hits = Vec::new();
        for &delta in delta_grid {
            let perturbed = perturb(o, g, delta)?;
            let result = memo(d, &perturbed, learner)?;
            if result.model.predict_row(target_x) == target_class {
                hits.push(PerturbationHit { delta, norm: sup_distance(o, &perturbed), labeling: g.clone() });
            }
        }
        Ok(hits)
    });
    let mut hits = Vec::new();
    for h in per_labeling {
        hits.extend(h?);
    }
    let empirical_breakdown = hits.iter().min_by(|a, b| a.norm.total_cmp(&b.norm)).cloned();
    let violations: Vec<PerturbationHit> = hits.into_iter().filter(|h| h.norm < bound).collect();
    Ok(BreakdownReport {
        depth,
        min_prob,
        target_row,
        target_class,
        bound,
        perturbations_checked: labelings.len() * delta_grid.len(),
        empirical_breakdown,
        passed: violations.is_empty(),
        violations,
    })
}
