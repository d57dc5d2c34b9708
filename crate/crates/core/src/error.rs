use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A record could not be parsed. `row` is 1-based over data rows.
    #[error("{source_name}: row {row}, column {column}: {message}")]
    Parse { source_name: String, row: usize, column: String, message: String },

    #[error("{source_name}: line {line}: {message}")]
    Line { source_name: String, line: usize, message: String },

    #[error("malformed CSV at byte offset {offset}: {message}")]
    Csv { offset: u64, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this error: 2 input/data, 3 evaluation, 4 unsupported.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Training(_) | Error::Evaluation(_) => 3,
            Error::Unsupported(_) => 4,
            _ => 2,
        }
    }
}
