//! Practice-session service for human studies.
//!
//! A session runs pretest, demo playback, practice, evaluation and survey
//! phases over a WebSocket, with the server stepping the environment and
//! appending every event to a JSONL log under the storage root.

pub mod assets;
pub mod engine;
pub mod error;
pub mod http;
pub mod plan;
pub mod protocol;

pub use assets::{AssetConfig, Assets};
pub use engine::{Created, Engine, SessionRequest, Status};
pub use error::{Result, ServeError};
pub use http::{router, serve, ServeConfig};
pub use protocol::{ClientMsg, ServerMsg};
