use std::fmt;

use thiserror::Error;

/// A single broken invariant found while validating an input.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { expected: usize, rows: usize, cols: usize },
    NotHermitian { row: usize, col: usize, deviation: f64 },
    Trace { value: f64 },
    NotPsd { min_eigenvalue: f64 },
    Norm { value: f64 },
    ZeroVector,
    Weights { sum: f64 },
    NegativeWeight { index: usize, value: f64 },
    Other(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { expected, rows, cols } => {
                write!(f, "shape: expected {expected}x{expected}, got {rows}x{cols}")
            }
            Violation::NotHermitian { row, col, deviation } => write!(
                f,
                "hermiticity: entries ({row},{col}) and ({col},{row}) differ from conjugates by {deviation:.3e}"
            ),
            Violation::Trace { value } => write!(f, "trace: expected 1, got {value}"),
            Violation::NotPsd { min_eigenvalue } => {
                write!(f, "positivity (PSD): smallest eigenvalue {min_eigenvalue:.6e}")
            }
            Violation::Norm { value } => write!(f, "normalization: squared norm {value}"),
            Violation::ZeroVector => write!(f, "normalization: zero vector"),
            Violation::Weights { sum } => write!(f, "weights: sum is {sum}, expected 1"),
            Violation::NegativeWeight { index, value } => {
                write!(f, "weights: entry {index} is negative ({value})")
            }
            Violation::Other(msg) => f.write_str(msg),
        }
    }
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bipartition: {0}")]
    Bipartition(String),

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid input: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error(
        "convex program did not converge after {iterations} iterations \
         (duality gap {gap:.3e}, dual residual {residual:.3e})"
    )]
    Solver { iterations: usize, gap: f64, residual: f64 },

    #[error("malformed input file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(v: Violation) -> Self {
        Error::Invalid(vec![v])
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver { .. } => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
