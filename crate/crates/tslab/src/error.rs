//! Crate-wide error type.
//!
//! Variants are grouped so the CLI can map them onto exit codes:
//! configuration problems (exit 1), data/validation problems (exit 2),
//! and I/O or internal faults (exit 3).

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad field, inconsistent cross-field values).
    #[error("config error: {0}")]
    Config(String),

    /// A CSV row failed parsing or violated a bar invariant.
    /// `row` is the 1-based data-row number (header excluded).
    #[error("csv row {row}: {reason}")]
    CsvRow { row: usize, reason: String },

    /// Input series shorter than an operation requires.
    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    /// Indicator or slice period/horizon outside the valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Channels fed to the same tensor have different lengths or names
    /// that do not line up with the configuration.
    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),

    /// A slice would contain warm-up (undefined) values.
    #[error("undefined values in slice range: {0}")]
    UndefinedValues(String),

    /// Least-squares design matrix is rank deficient.
    #[error("rank-deficient design matrix (column {column})")]
    RankDeficient { column: usize },

    /// Matrix/vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Series has zero variance where variation is required.
    #[error("constant series: {0}")]
    ConstantSeries(String),

    /// Tensor lacks the scaling metadata needed for inversion.
    #[error("missing scaling metadata")]
    MissingScalingMeta,

    /// A label class has no members where at least one is required.
    #[error("label class {class} has no members")]
    EmptyClass { class: usize },

    /// Labeling preconditions violated (horizon past end of data, warm-up).
    #[error("labeling error: {0}")]
    Label(String),

    /// Split fractions or set sizes unusable.
    #[error("split error: {0}")]
    Split(String),

    /// Probe training diverged.
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// Probe input/label/shape inconsistencies.
    #[error("probe error: {0}")]
    Probe(String),

    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("pipeline stage '{stage}': {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage { stage, source: Box::new(source) }
    }

    /// Process exit code for the CLI: 1 config, 2 data, 3 internal/IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. } | Error::Json(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
