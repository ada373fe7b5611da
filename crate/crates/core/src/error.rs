use thiserror::Error;

use crate::lattice::{CellCoord, VoxelCoord};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("capacity exceeded: need {needed} data positions, plane has {available}")]
    Capacity { needed: usize, available: usize },
    #[error("cell {0} is outside the plane")]
    OutOfBounds(CellCoord),
    #[error("voxel {0} is already occupied")]
    Collision(VoxelCoord),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction {0} was already executed")]
    AlreadyExecuted(usize),
    #[error("instruction {0} is not executable yet")]
    NotReady(usize),
    #[error("routing failed for instruction {index}: {reason}")]
    Routing { index: usize, reason: String },
    #[error("kink modification not applicable: {0}")]
    NotApplicable(String),
    #[error("semantic inconsistency: {0}")]
    Semantic(String),
    #[error("routing tree violates condition {condition}: {detail}")]
    Condition { condition: u8, detail: String },
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
