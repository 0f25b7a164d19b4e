use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested value lies outside the range covered by the data.
    #[error("range error: {0}")]
    Range(String),

    /// Two stretched levels quantized onto the same grid point.
    #[error(
        "quantization collision: levels {first} and {second} both map to integer {value} \
         (grid of {grid_points} points is too coarse; increase extra bits)"
    )]
    Collision {
        first: usize,
        second: usize,
        value: u64,
        grid_points: u64,
    },

    /// Numerical integration did not reach the requested tolerance.
    #[error("numerical error: {what} did not converge (last estimate {estimate}, change {change:e}, {nodes} nodes)")]
    Numerical {
        what: &'static str,
        estimate: f64,
        change: f64,
        nodes: usize,
    },

    /// Malformed alist input.
    #[error("alist parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Inconsistent simulation or code configuration.
    #[error("config error at `{field}`: {msg}")]
    Config { field: String, msg: String },

    /// Input lengths do not agree.
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
