//! Gaze-controlled Go: synthetic SSVEP acquisition, five-class frequency
//! decoding, a complete Go rules engine, a seedable UCT player, fuzzy
//! game-situation assessment and the per-session protocol state machine
//! that ties them together.
//!
//! Everything in this crate is transport-free. The `gazego-server` crate
//! frames [`protocol::Frame`] values over WebSocket; the CLI drives the
//! same [`session::Session`] in-process.

pub mod api;
pub mod assessor;
pub mod command;
pub mod decoder;
pub mod engine;
pub mod goban;
pub mod navigator;
pub mod pipeline;
pub mod protocol;
pub mod rng;
pub mod session;
pub mod spectral;
pub mod synth;

pub use assessor::{AssessorConfig, EvalSample, GameSituationLabel};
pub use command::{Command, StimulusTable};
pub use decoder::{Classification, DecoderConfig, Method};
pub use engine::{EngineConfig, SearchResult};
pub use goban::{BoardState, Color, GameRecord, Move};
pub use navigator::{CursorState, NavOutcome};
pub use protocol::Frame;
pub use session::{Session, SessionConfig};
pub use synth::{GazeState, SignalWindow, SynthConfig};
