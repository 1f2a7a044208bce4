use thiserror::Error;

use crate::constraints::Defect;
use crate::model::{BeamId, DesignDefect, JointId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("design is invalid ({} defect(s)): {}", .0.len(), summarize(.0))]
    InvalidDesign(Vec<DesignDefect>),

    #[error("unknown joint {0}")]
    UnknownJoint(JointId),

    #[error("unknown beam {0}")]
    UnknownBeam(BeamId),

    #[error("beam {0} is not placed in this state")]
    BeamNotPlaced(BeamId),

    #[error("joint {joint} is not an endpoint of beam {beam}")]
    NotAnEndpoint { beam: BeamId, joint: JointId },

    #[error("design is unconstructable ({} defect(s)): {}", .0.len(), summarize(.0))]
    Unconstructable(Vec<Defect>),

    #[error("zero-length beam segment on beam {0}")]
    ZeroLengthSegment(BeamId),

    #[error("structure has no grounded joint")]
    NoGround,

    #[error("floating component containing joints {0:?} has no path to ground")]
    Floating(Vec<JointId>),

    #[error("stiffness matrix is singular (mechanism) at {0}")]
    Singular(String),

    #[error("load applied at node {0}, which is not part of the system")]
    LoadNotInSystem(String),

    #[error("invalid cantilever path: {0}")]
    InvalidPath(String),

    #[error("instance has {size} beams, above the oracle limit of {limit}")]
    OracleLimit { size: usize, limit: usize },

    #[error("no consistent subassembly exists from the current state; {0}")]
    NoConsistentSubassembly(String),

    #[error("circuit error: {0}")]
    Circuit(String),

    #[error("layout failure in column {column}: {reason}")]
    Layout { column: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn summarize<T: std::fmt::Display>(items: &[T]) -> String {
    let mut parts: Vec<String> = items.iter().take(4).map(|d| d.to_string()).collect();
    if items.len() > 4 {
        parts.push(format!("... and {} more", items.len() - 4));
    }
    parts.join("; ")
}
