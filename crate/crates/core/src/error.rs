use thiserror::Error;

use crate::graph::VertexId;

/// Errors raised by the graph substrate, the analysis routines and the
/// experiment drivers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge {0}-{1} already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge {0}-{1} is not present")]
    AbsentEdge(VertexId, VertexId),
    #[error("a tree needs at least {needed} vertices, got {got}")]
    TreeTooSmall { needed: usize, got: usize },
    #[error("edge list does not describe a tree on {0} vertices")]
    NotATree(usize),
    #[error("vertex {vertex} is not in a tree of {size} vertices")]
    NotInTree { vertex: usize, size: usize },
    #[error("duplicate bridge {0}-{1}")]
    DuplicateBridge(usize, usize),
    #[error("{requested} bridges requested but only {available} cross pairs exist")]
    TooManyBridges { requested: usize, available: usize },
    #[error("the same tree was given twice")]
    SameTree,
    #[error("product state space of {0} pairs exceeds the oracle limit")]
    StateSpaceTooLarge(usize),
    #[error("the walks can avoid meeting forever from the requested start")]
    Unreachable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown experiment id {0:?}")]
    UnknownExperiment(String),
    #[error("schedule event at round {round} references {what}")]
    BadSchedule { round: u64, what: String },
    #[error("no meeting within {0} moves")]
    NoMeeting(u64),
    #[error("invariant violated at round {round}: {message}")]
    Invariant { round: u64, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
