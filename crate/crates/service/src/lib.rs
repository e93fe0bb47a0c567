//! Local engine service for the browser client.
//!
//! Line-delimited JSON over TCP: each request is one JSON object on one
//! line, answered by exactly one response line. See `docs/protocol.md`.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{BotPolicy, ErrorCode, GameState, GameStatus, Phase, Request, Response, PROTOCOL_VERSION};
pub use server::serve;
pub use session::{Service, ServiceConfig, ServiceError};
