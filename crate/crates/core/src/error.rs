use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("barcode dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: u8, found: u8 },

    #[error("parse error at byte {offset}: {message}")]
    ParseAtOffset { offset: usize, message: String },

    #[error("parse error in row {row}: {message}")]
    ParseAtRow { row: usize, message: String },

    #[error("pixel ({x}, {y}) out of bounds for {width}x{height} image")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("AUC undefined: truth contains a single class")]
    SingleClass,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the content of the input data rather than
    /// by the environment (I/O) or by caller arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::ParseAtOffset { .. }
                | Error::ParseAtRow { .. }
                | Error::Shape(_)
                | Error::Stratification(_)
                | Error::SingleClass
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
