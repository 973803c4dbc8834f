use alloc::string::String;

/// Errors produced by the compression pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dataset has no rows or no feature columns")]
    EmptyDataset,
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("non-numeric or non-finite feature value at row {row}, column `{column}`")]
    NonNumericFeature { row: usize, column: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset has no labels")]
    UnlabeledDataset,
    #[error("{0} classes exceed the supported maximum of {max}", max = crate::data::MAX_CLASSES)]
    TooManyClasses(usize),
    #[error("invalid split fraction {0}; must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("class {class} has {count} rows; a stratified split needs at least one in each part")]
    ClassTooSmall { class: usize, count: usize },
    #[error("fold count {folds} is invalid for {rows} rows")]
    FoldCountExceedsRows { folds: usize, rows: usize },
    #[error("feature dimension mismatch: model expects {expected}, data has {found}")]
    FeatureDimensionMismatch { expected: usize, found: usize },
    #[error("matrix shape {found_rows}x{found_cols} does not match dataset {rows}x{classes}")]
    ShapeMismatch {
        rows: usize,
        classes: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("oracle row {row} sums to {sum}, not 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("oracle entry at row {row}, class {class} is negative or not finite")]
    NegativeEntry { row: usize, class: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("scores must be finite")]
    NonFiniteScore,
    #[error("depth requested over an empty sample")]
    EmptySample,
    #[error("hypothesis sample is empty")]
    EmptyHypothesisSample,
    #[error("trimming {trim} of {rows} rows leaves nothing")]
    TrimExceedsSample { trim: usize, rows: usize },
    #[error("invalid trimming level {0}; must lie in [0, 1)")]
    InvalidEpsilon(f64),
    #[error("row index {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("learner failed at the minimum threshold, where every hypothesis is consistent")]
    LearnerAlwaysFails,
    #[error("learner returned a model violating the constraint at row {row}")]
    ConstraintViolation { row: usize },
    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    EnumerationBudgetExceeded { needed: usize, budget: usize },
    #[error("every trimming level was infeasible")]
    AllEpsilonInfeasible,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("breakdown probe instance too large: {rows} rows, {classes} classes")]
    InstanceTooLarge { rows: usize, classes: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
