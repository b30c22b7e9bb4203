use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solvers, builders and file loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("log-sum-exp over an empty action set")]
    EmptyActionSet,

    #[error("degenerate channel: every action has a -inf exponent")]
    DegenerateChannel,

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid tradeoff configuration: {0}")]
    InvalidTradeoff(String),

    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),

    #[error("invalid prior: row {state} has no probability mass")]
    InvalidPrior { state: usize },

    #[error("policy puts mass on action {action} at state {state} but q(a|s'={next}) is zero")]
    InconsistentPair {
        state: usize,
        action: usize,
        next: usize,
    },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("epsilon {epsilon} outside (0, eta/(1-gamma)) = (0, {limit})")]
    Domain { epsilon: f64, limit: f64 },

    #[error("inner loop did not converge at state {state} after {iterations} iterations (residual {residual:e})")]
    InnerNotConverged {
        state: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("layout parse error at line {line}, column {column}: {kind}")]
    Layout {
        line: usize,
        column: usize,
        kind: LayoutErrorKind,
    },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutErrorKind {
    Empty,
    Ragged { expected: usize, found: usize },
    UnknownChar(char),
    NoGoal,
    MultipleGoals,
    NoFreeCell,
}

impl std::fmt::Display for LayoutErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LayoutErrorKind::Empty => write!(f, "empty layout"),
            LayoutErrorKind::Ragged { expected, found } => {
                write!(f, "row has {found} cells, expected {expected}")
            }
            LayoutErrorKind::UnknownChar(c) => write!(f, "unknown cell character {c:?}"),
            LayoutErrorKind::NoGoal => write!(f, "layout has no goal 'G'"),
            LayoutErrorKind::MultipleGoals => write!(f, "layout has more than one goal 'G'"),
            LayoutErrorKind::NoFreeCell => write!(f, "layout has no free cell"),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
