use thiserror::Error;

#[derive(Debug, Error)]
pub enum MopError {
    #[error("column `{0}` is not present in the header")]
    NamedColumnAbsent(String),
    #[error("malformed cell at data row {row}, column {col}: `{value}`")]
    MalformedCell {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("table has no samples")]
    EmptyTable,
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("variable index {index} out of range for {len} inputs")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("underdetermined fit: {p} coefficients but only {n} samples")]
    Underdetermined { p: usize, n: usize },
    #[error("design matrix is numerically rank deficient")]
    SingularDesign,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no candidate influence radius produced a usable MLS model")]
    DegenerateSupports,
    #[error("response has zero variance")]
    ConstantResponse,
    #[error("cross-validation fold {0} leaves the trainer underdetermined")]
    FoldUnderdetermined(usize),
    #[error("column `{0}` is constant")]
    ConstantColumn(String),
    #[error("no feasible model; {} configuration(s) failed", .0.len())]
    NoFeasibleModel(Vec<String>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MopError> = std::result::Result<T, E>;
