use std::fmt;

use thiserror::Error;

/// A single out-of-range field found by [`crate::params::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Every violated parameter bound, in field order. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn contains(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }

    pub(crate) fn push(&mut self, field: &'static str, message: impl Into<String>) {
        self.violations.push(Violation {
            field,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(ValidationReport),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("sweep row {row} ({axis} = {value}): {source}")]
    SweepRow {
        row: usize,
        axis: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("worker pool: {0}")]
    Workers(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by out-of-range or malformed user input,
    /// as opposed to I/O failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation(_)
            | Error::Parse { .. }
            | Error::UnknownKey { .. }
            | Error::Domain(_)
            | Error::Degenerate(_)
            | Error::UnknownAxis(_)
            | Error::UnknownMetric(_)
            | Error::UnknownPreset(_)
            | Error::InvalidSweep(_) => true,
            Error::SweepRow { source, .. } => source.is_validation(),
            Error::Workers(_) | Error::Io(_) | Error::Json(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
