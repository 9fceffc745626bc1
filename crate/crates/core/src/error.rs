use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::Task;

/// Errors raised while decoding or encoding a weight file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("bad magic: expected \"NCAW\", found {found:?}")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown task tag {0}")]
    UnknownTask(u8),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("truncated file: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("trailing bytes: expected {expected} bytes, got {actual}")]
    TrailingBytes { expected: usize, actual: usize },
    #[error("crc mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("non-finite weight in {section} at index {index}")]
    NonFiniteWeight { section: &'static str, index: usize },
    #[error("size budget exceeded: {actual} bytes, allowed {allowed}")]
    SizeBudget { actual: usize, allowed: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("numeric fault at step {step}: non-finite value at cell ({x}, {y}) channel {channel}")]
    NumericFault {
        step: usize,
        x: usize,
        y: usize,
        channel: usize,
    },
    #[error("format error: {0}")]
    Format(#[from] FormatError),
    #[error("task mismatch: expected a {expected} model, got {found}")]
    TaskMismatch { expected: Task, found: Task },
    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("image error on {}: {message}", path.display())]
    Image { path: PathBuf, message: String },
    #[error("empty input: {0}")]
    EmptyInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short, stable class name used in machine-parsable error lines.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Contract(_) => "contract",
            Error::NumericFault { .. } => "numeric-fault",
            Error::Format(FormatError::SizeBudget { .. }) => "size-budget",
            Error::Format(_) => "format",
            Error::TaskMismatch { .. } => "task-mismatch",
            Error::Io { .. } | Error::Image { .. } => "io",
            Error::EmptyInput(_) => "empty-input",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
