//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model has no cells")]
    EmptyModel,

    #[error("invalid model dimensions: {0}")]
    BadDimensions(String),

    #[error("cell {id}: {reason}")]
    BadCell { id: usize, reason: String },

    #[error("atom {id}: {reason}")]
    BadAtom { id: usize, reason: String },

    #[error("cell-adjacency graph is not connected (cell {0} unreachable)")]
    Disconnected(usize),

    #[error("metric graph: {0}")]
    BadGraph(String),

    #[error("carpet sequence: {0}")]
    BadCarpetSequence(String),

    #[error("cell id {0} out of range (model has {1} cells)")]
    CellOutOfRange(usize, usize),

    #[error("operands belong to different models")]
    ModelMismatch,

    #[error("{op}: set must have finite measure")]
    InfiniteMeasure { op: &'static str },

    #[error("{op}: requires a model with at least one unbounded cell")]
    NoUnboundedCell { op: &'static str },

    #[error("{op}: {what} = {size} exceeds cap {cap}")]
    CapExceeded {
        op: &'static str,
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("{op}: unsupported on this model: {reason}")]
    Unsupported { op: &'static str, reason: String },

    #[error("{op}: model carries no geometry hints")]
    MissingGeometry { op: &'static str },

    #[error("total variation is not a norm on this support: {0}")]
    NotANorm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("model file: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
