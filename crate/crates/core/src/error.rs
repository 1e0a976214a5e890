use std::path::PathBuf;

use thiserror::Error;

use crate::model::{ClientId, ServerId, Slot};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("slot {slot} is outside the download window ({arrival}, {departure}] of client {client}")]
    OutOfSession {
        client: ClientId,
        slot: Slot,
        arrival: Slot,
        departure: Slot,
    },

    #[error("chunk index {index} out of range 1..={max}")]
    ChunkOutOfRange { index: u32, max: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("incomplete trace: missing entry client={client} server={server} slot={slot}")]
    IncompleteTrace {
        client: ClientId,
        server: ServerId,
        slot: Slot,
    },

    #[error("malformed {kind} file {path}: {message}")]
    Malformed {
        kind: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
