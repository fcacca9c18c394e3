use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid video spec: {0}")]
    InvalidSpec(String),

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("region ({x1},{y1})-({x2},{y2}) out of bounds for {width}x{height} plane")]
    RegionOutOfBounds {
        x1: usize,
        y1: usize,
        x2: usize,
        y2: usize,
        width: usize,
        height: usize,
    },

    #[error("line {line}: {msg}")]
    RoiParse { line: usize, msg: String },

    #[error("line {line}: degenerate region ({x1},{y1},{x2},{y2})")]
    DegenerateRegion {
        line: usize,
        x1: u32,
        y1: u32,
        x2: u32,
        y2: u32,
    },

    #[error("value {value} out of range: {what}")]
    Range { value: i64, what: &'static str },

    #[error("corrupt bitstream: {0}")]
    Corrupt(String),

    #[error("invalid codec config: {0}")]
    Config(String),

    #[error("invalid key: {0}")]
    Key(String),

    #[error("invalid container: {0}")]
    Container(String),

    #[error("contract violation: {0}")]
    Contract(&'static str),

    #[error("metric undefined: {0}")]
    Metric(&'static str),

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("report output: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
