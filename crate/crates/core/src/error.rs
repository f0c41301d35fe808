use std::io;
use std::path::PathBuf;

use crate::geometry::Cell;
use crate::world::ObjectId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pose ({x:.3}, {y:.3}) lies outside the scene bounds")]
    PoseOutOfBounds { x: f64, y: f64 },

    #[error("cell ({}, {}) lies outside the scene bounds", .0.x, .0.y)]
    CellOutOfBounds(Cell),

    #[error("unknown object id {0}")]
    UnknownObject(ObjectId),

    #[error("episode is already finished")]
    EpisodeFinished,

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("scene id mismatch: trace refers to `{trace}` but scene is `{scene}`")]
    SceneMismatch { scene: String, trace: String },

    #[error("agent `{agent}` violated the action contract: {message}")]
    Contract { agent: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
