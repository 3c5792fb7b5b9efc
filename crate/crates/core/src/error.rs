use thiserror::Error;

/// Errors raised anywhere in the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid floorplan: {0}")]
    Validation(String),

    #[error("floorplan interior is disconnected: {0}")]
    DisconnectedInterior(String),

    #[error("point ({x}, {y}) is outside the floorplan interior")]
    OutsideInterior { x: f64, y: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible: {reason} (segments: {segments:?})")]
    Infeasible {
        reason: String,
        segments: Vec<usize>,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }

    /// Input errors are problems with the floorplan or the parameters a user supplied.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::DisconnectedInterior(_)
                | Error::Parameter(_)
                | Error::Degenerate(_)
        )
    }
}
