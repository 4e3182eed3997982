use alloc::string::String;
use core::fmt;

/// Errors shared across the crate.
///
/// Graph-construction problems name the offending node so a failed build of a
/// large model points at the exact op rather than at the whole trace.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Incompatible tensor shapes in a construction or tape op.
    Shape {
        op: &'static str,
        node: Option<usize>,
        detail: String,
    },
    /// A value, gradient, or loss stopped being finite.
    NonFinite { place: String },
    /// `backward` was called on a tape that has already been consumed.
    TapeConsumed,
    /// A scalar (single-element) node was required.
    NotScalar { node: usize, len: usize },
    /// A hyperparameter or configuration value is out of its valid range.
    InvalidParam { name: &'static str, detail: String },
    /// The dataset or corpus cannot support the requested operation.
    Data { detail: String },
    /// Flat-vector arguments disagree on length.
    Length {
        op: &'static str,
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { op, node, detail } => match node {
                Some(id) => write!(f, "shape error in `{op}` at node {id}: {detail}"),
                None => write!(f, "shape error in `{op}`: {detail}"),
            },
            Error::NonFinite { place } => write!(f, "non-finite value in {place}"),
            Error::TapeConsumed => write!(f, "tape already consumed by a previous backward pass"),
            Error::NotScalar { node, len } => {
                write!(f, "node {node} has {len} elements where a scalar was required")
            }
            Error::InvalidParam { name, detail } => write!(f, "invalid `{name}`: {detail}"),
            Error::Data { detail } => write!(f, "{detail}"),
            Error::Length { op, expected, got } => {
                write!(f, "`{op}` expected length {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {}
