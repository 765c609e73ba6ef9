use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("code {code} out of range at row {row}, column {column} (cardinality {cardinality})")]
    CodeOutOfRange {
        row: usize,
        column: usize,
        code: u32,
        cardinality: u32,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "binding information routes disagree: internal={internal}, external={external}, divergence={divergence}"
    )]
    RouteDisagreement {
        internal: f64,
        external: f64,
        divergence: f64,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("{context}: {source}")]
    Transform {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with a short context string, e.g. the sweep step that failed.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Transform {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 2 for configuration and argument problems, 3 for bad data, 4 for
    /// internal-consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) | Error::Json(_) => 2,
            Error::EmptyInput(_)
            | Error::CodeOutOfRange { .. }
            | Error::DegenerateDomain(_)
            | Error::Data(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Csv(_) => 3,
            Error::RouteDisagreement { .. } | Error::Internal(_) => 4,
            Error::Transform { source, .. } => source.exit_code(),
        }
    }
}
