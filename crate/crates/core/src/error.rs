use std::fmt;

use serde::{Deserialize, Serialize};

/// Which graph of a two-graph comparison an error belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphRole {
    /// The graph hypothesised to be more clustered.
    G,
    /// The reference graph.
    H,
}

impl fmt::Display for GraphRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphRole::G => f.write_str("G"),
            GraphRole::H => f.write_str("H"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("density is undefined for a graph with {0} vertices")]
    UndefinedDensity(usize),

    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("sample too small: {0} usable observations, at least 2 required")]
    SampleTooSmall(usize),

    #[error("sample has zero variance; the t statistic is undefined")]
    ZeroVariance,

    #[error("global density is zero; the test is undefined on an edgeless graph")]
    ZeroDensity,

    #[error("graph {role}: {source}")]
    InGraph {
        role: GraphRole,
        #[source]
        source: Box<Error>,
    },

    #[error("repetition {index}: {source}")]
    Repetition {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn in_graph(self, role: GraphRole) -> Self {
        Error::InGraph {
            role,
            source: Box::new(self),
        }
    }

    /// True when the error only reflects a degenerate (constant) sample,
    /// as opposed to a configuration or input problem.
    pub fn is_zero_variance(&self) -> bool {
        match self {
            Error::ZeroVariance => true,
            Error::InGraph { source, .. } | Error::Repetition { source, .. } => {
                source.is_zero_variance()
            }
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
