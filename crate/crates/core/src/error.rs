use thiserror::Error;

use crate::graph::Vertex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge ({u}, {v}) joins two vertices of part {part}")]
    IntraPartEdge { u: Vertex, v: Vertex, part: usize },
    #[error("vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { vertex: Vertex, count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("graph has no K_r-factor")]
    NoFactor,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
