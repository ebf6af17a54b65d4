use std::io;

use crate::io::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("posterior stream has no frames")]
    EmptyStream,
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("failed to write output: {0}")]
    Sink(#[source] io::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Wav(#[from] hound::Error),
}
