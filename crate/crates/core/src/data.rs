//! Datasets, label sets and deterministic splitting.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Largest class count a [`LabelSet`] can represent.
pub const MAX_CLASSES: usize = 64;

/// Dense class index in `0..num_classes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

impl ClassId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for ClassId {
    fn from(value: usize) -> Self {
        ClassId(value)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A sample: row-major feature matrix with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    num_rows: usize,
    num_attrs: usize,
    labels: Option<Vec<ClassId>>,
    num_classes: usize,
    column_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row vectors, validating every invariant.
    ///
    /// Column and class names default to `x0, x1, ..` and `0, 1, ..`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<usize>>, num_classes: usize) -> Result<Self> {
        let num_attrs = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * num_attrs);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != num_attrs {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} values, expected {num_attrs}",
                    row.len()
                )));
            }
            features.extend_from_slice(row);
        }
        let column_names = (0..num_attrs).map(|j| format!("x{j}")).collect();
        let class_names = (0..num_classes).map(|c| format!("{c}")).collect();
        Self::new(
            features,
            num_attrs,
            labels.map(|l| l.into_iter().map(ClassId).collect()),
            num_classes,
            column_names,
            class_names,
        )
    }

    pub fn new(
        features: Vec<f64>,
        num_attrs: usize,
        labels: Option<Vec<ClassId>>,
        num_classes: usize,
        column_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if num_attrs == 0 || features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !features.len().is_multiple_of(num_attrs) {
            return Err(Error::InvalidDataset(format!(
                "{} values do not form rows of width {num_attrs}",
                features.len()
            )));
        }
        let num_rows = features.len() / num_attrs;
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            let column = column_names
                .get(pos % num_attrs)
                .cloned()
                .unwrap_or_else(|| format!("x{}", pos % num_attrs));
            return Err(Error::NonNumericFeature { row: pos / num_attrs, column });
        }
        if num_classes < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 classes, got {num_classes}")));
        }
        if num_classes > MAX_CLASSES {
            return Err(Error::TooManyClasses(num_classes));
        }
        if column_names.len() != num_attrs || class_names.len() != num_classes {
            return Err(Error::InvalidDataset("name lists do not match the shape".into()));
        }
        if let Some(labels) = &labels {
            if labels.len() != num_rows {
                return Err(Error::LengthMismatch(labels.len(), num_rows));
            }
            if let Some(bad) = labels.iter().find(|c| c.0 >= num_classes) {
                return Err(Error::InvalidDataset(format!(
                    "label {bad} outside 0..{num_classes}"
                )));
            }
        }
        Ok(Self {
            features,
            num_rows,
            num_attrs,
            labels,
            num_classes,
            column_names,
            class_names,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_attrs(&self) -> usize {
        self.num_attrs
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_attrs..(i + 1) * self.num_attrs]
    }

    pub fn value(&self, row: usize, attr: usize) -> f64 {
        self.features[row * self.num_attrs + attr]
    }

    pub fn labels(&self) -> Option<&[ClassId]> {
        self.labels.as_deref()
    }

    /// Labels, or [`Error::UnlabeledDataset`].
    pub fn require_labels(&self) -> Result<&[ClassId]> {
        self.labels().ok_or(Error::UnlabeledDataset)
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Raw label value for each dense class id.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Rows in the given order, as a new dataset with the same schema.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.num_attrs);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Dataset {
            features,
            num_rows: rows.len(),
            num_attrs: self.num_attrs,
            labels: self.labels.as_ref().map(|l| rows.iter().map(|&r| l[r]).collect()),
            num_classes: self.num_classes,
            column_names: self.column_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Same features with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<ClassId>) -> Result<Dataset> {
        Dataset::new(
            self.features.clone(),
            self.num_attrs,
            Some(labels),
            self.num_classes,
            self.column_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Row counts per class; zeros when unlabeled.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for c in self.labels().unwrap_or(&[]) {
            counts[c.0] += 1;
        }
        counts
    }
}

/// Subset of classes allowed at one point. Empty means infeasible there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn full(num_classes: usize) -> Self {
        debug_assert!(num_classes <= MAX_CLASSES);
        if num_classes >= 64 {
            LabelSet(u64::MAX)
        } else {
            LabelSet((1u64 << num_classes) - 1)
        }
    }

    pub fn singleton(class: ClassId) -> Self {
        LabelSet(1u64 << class.0)
    }

    pub fn from_classes<I: IntoIterator<Item = ClassId>>(classes: I) -> Self {
        classes.into_iter().fold(LabelSet::EMPTY, |s, c| s.with(c))
    }

    #[must_use]
    pub fn with(self, class: ClassId) -> Self {
        LabelSet(self.0 | (1u64 << class.0))
    }

    pub fn contains(self, class: ClassId) -> bool {
        class.0 < MAX_CLASSES && self.0 & (1u64 << class.0) != 0
    }

    #[must_use]
    pub fn intersect(self, other: LabelSet) -> Self {
        LabelSet(self.0 & other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Smallest class in the set.
    pub fn first(self) -> Option<ClassId> {
        (self.0 != 0).then(|| ClassId(self.0.trailing_zeros() as usize))
    }

    pub fn iter(self) -> impl Iterator<Item = ClassId> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let c = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(ClassId(c))
        })
    }
}

/// Per-row allowed label sets, plus the rows excluded by trimming.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSample {
    pub pairs: Vec<(usize, LabelSet)>,
    pub trimmed_rows: Vec<usize>,
}

impl ConstraintSample {
    /// Checks that pair rows and trimmed rows are disjoint, in range and unique.
    pub fn validate(&self, num_rows: usize) -> Result<()> {
        let mut seen = vec![false; num_rows];
        for &row in self.pairs.iter().map(|(r, _)| r).chain(&self.trimmed_rows) {
            if row >= num_rows {
                return Err(Error::RowOutOfRange { row, rows: num_rows });
            }
            if core::mem::replace(&mut seen[row], true) {
                return Err(Error::InvalidDataset(format!("row {row} appears twice in constraints")));
            }
        }
        Ok(())
    }
}

/// Parameters of a two-way random split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    /// Fraction of rows placed in the second (held-out) part.
    pub fraction: f64,
    pub stratified: bool,
}

/// Row indices `(kept, held_out)`, each ascending.
pub fn split_indices(d: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.fraction > 0.0 && spec.fraction < 1.0) {
        return Err(Error::InvalidFraction(spec.fraction));
    }
    let n = d.num_rows();
    if n < 2 {
        return Err(Error::InvalidDataset("a split needs at least 2 rows".into()));
    }
    let mut rng = seed::rng(spec.seed);
    let mut held = Vec::new();
    match (spec.stratified, d.labels()) {
        (true, Some(_)) => {
            for (class, mut rows) in rows_by_class(d).into_iter().enumerate() {
                if rows.is_empty() {
                    continue;
                }
                if rows.len() < 2 {
                    return Err(Error::ClassTooSmall { class, count: rows.len() });
                }
                rows.shuffle(&mut rng);
                held.extend_from_slice(&rows[..part_size(rows.len(), spec.fraction)]);
            }
        }
        _ => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut rng);
            held.extend_from_slice(&rows[..part_size(n, spec.fraction)]);
        }
    }
    held.sort_unstable();
    let mut is_held = vec![false; n];
    for &r in &held {
        is_held[r] = true;
    }
    let kept = (0..n).filter(|&r| !is_held[r]).collect();
    Ok((kept, held))
}

fn part_size(n: usize, fraction: f64) -> usize {
    let k = libm::round(fraction * n as f64) as usize;
    k.clamp(1, n - 1)
}

fn rows_by_class(d: &Dataset) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); d.num_classes()];
    for (r, c) in d.labels().unwrap_or(&[]).iter().enumerate() {
        by_class[c.0].push(r);
    }
    by_class
}

/// Splits `d` into `(kept, held_out)` datasets.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (kept, held) = split_indices(d, spec)?;
    Ok((d.subset(&kept), d.subset(&held)))
}

/// `k` folds as `(train, test)` index lists; test sets partition the rows.
///
/// Rows are shuffled (within each class when stratified, classes taken in
/// id order) and dealt round-robin, so fold sizes differ by at most one.
pub fn kfold(d: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = d.num_rows();
    if k < 2 || k > n {
        return Err(Error::FoldCountExceedsRows { folds: k, rows: n });
    }
    let mut rng = seed::rng(seed);
    let order: Vec<usize> = match (stratified, d.labels()) {
        (true, Some(_)) => rows_by_class(d)
            .into_iter()
            .flat_map(|mut rows| {
                rows.shuffle(&mut rng);
                rows
            })
            .collect(),
        _ => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut rng);
            rows
        }
    };
    let mut fold_of = vec![0; n];
    for (pos, &r) in order.iter().enumerate() {
        fold_of[r] = pos % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&r| fold_of[r] == f);
            (train, test)
        })
        .collect())
}
