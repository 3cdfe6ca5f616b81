//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {edge}: {endpoint} id {id} \u{2265} {n_vertices}")]
    EdgeOutOfRange {
        edge: usize,
        endpoint: &'static str,
        id: u32,
        n_vertices: u32,
    },

    #[error("vertex id {id} out of range for graph with {n_vertices} vertices")]
    VertexOutOfRange { id: u32, n_vertices: u32 },

    #[error("sub-graph orientation mismatch: {0:?} vs {1:?}")]
    OrientationMismatch(crate::graph::Orientation, crate::graph::Orientation),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("time regression: t = {now} precedes last update at {last}")]
    TimeRegression { now: f64, last: f64 },

    #[error("not enough ranks: {n_procs} ranks for {n_areas} areas (merge areas or add ranks)")]
    NotEnoughRanks { n_procs: usize, n_areas: usize },

    #[error("inconsistent partition inputs: {0}")]
    InconsistentPlan(String),

    #[error("edge {edge} references unknown {what} neuron {id} on rank {rank}")]
    UnknownNeuron {
        edge: usize,
        what: &'static str,
        id: u32,
        rank: usize,
    },

    #[error("duplicate spike from pre-neuron {pre} at step {step}")]
    DuplicateSpike { pre: u32, step: u64 },

    #[error("race audit failed: {0}")]
    RaceDetected(String),

    #[error("overlap violation at step {step}: buffer complete through {complete:?}, delivery needs emission {needed}")]
    OverlapViolation {
        step: u64,
        complete: Option<u64>,
        needed: u64,
    },

    #[error("rank {rank}: broadcast step {step} does not follow step {last}")]
    StepRegression { rank: usize, step: u64, last: u64 },

    #[error("rank {rank}: gather for step {step} timed out; missing senders {missing:?}")]
    GatherTimeout {
        rank: usize,
        step: u64,
        missing: Vec<usize>,
    },

    #[error("rank {rank}: neuron {id} reported by senders {first} and {second} at step {step}")]
    DuplicateOwner {
        rank: usize,
        step: u64,
        id: u32,
        first: usize,
        second: usize,
    },

    #[error("exchange fabric disconnected: {0}")]
    Disconnected(String),

    #[error("config error at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigSyntax(String),

    #[error("{path}: {reason}")]
    Connectome { path: PathBuf, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
