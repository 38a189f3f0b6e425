use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty dataset")]
    EmptyDataset,
    #[error("label column `{0}` not found in header")]
    MissingLabel(String),
    #[error("row {row} has {got} cells, header has {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("missing value in column `{column}` at row {row}")]
    MissingValue { column: String, row: usize },
    #[error("column `{0}` is continuous; discretize before binarizing")]
    ContinuousColumn(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset is not separable: {} conflicting group(s)", .0.len())]
    Inseparable(Vec<Vec<usize>>),

    #[error("exactly-one over an empty literal set")]
    EmptyExactlyOne,
    #[error("totalizer bound must decrease (current {current}, requested {requested})")]
    BoundNotDecreasing { current: usize, requested: usize },
    #[error("no model available: {0}")]
    NoModel(&'static str),

    #[error("upper bound {0} must be odd")]
    EvenUpperBound(usize),
    #[error("lower bound {0} must be odd and at least 3")]
    BadLowerBound(usize),
    #[error("upper bound {ub} is below lower bound {lb}")]
    UpperBelowLower { ub: usize, lb: usize },
    #[error("model violates hard clause {0} of the encoding")]
    Integrity(usize),
    #[error("malformed decision tree: {0}")]
    MalformedTree(String),
    #[error("feature count mismatch: model expects {expected}, data has {got}")]
    FeatureMismatch { expected: usize, got: usize },

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("time budget exhausted before any model was found")]
    Timeout,
}

pub type Result<T> = std::result::Result<T, Error>;
