//! Real-time simulation server for the vibrafin swimming model.
//!
//! Physics runs in lockstep at a fixed 1 ms step. Clients connect over
//! WebSocket, send fin commands as JSON text frames and receive state
//! snapshots. Every accepted command is logged with its tick so a session
//! can be replayed offline bit for bit.

pub mod engine;
pub mod net;
pub mod protocol;
pub mod replay;

pub use engine::{Engine, DT};
pub use net::{serve, ServerConfig, ServerHandle};
pub use protocol::{ClientMessage, ServerMessage, PROTOCOL_VERSION};
pub use replay::{read_log, replay, LogEntry, ReplayError};
