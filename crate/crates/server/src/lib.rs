//! HTTP/JSON and WebSocket front end for gaze-controlled Go sessions.
//!
//! Every session is a [`gazego_core::Session`] behind its own async mutex,
//! so frames for one session are handled strictly in arrival order while
//! different sessions run independently. Engine searches run on the
//! blocking pool.
//!
//! Session time is stream time: each `gaze` or `classification` frame
//! advances the clock by one window, each `window` frame by its duration.
//! The frame log therefore replays through [`gazego_core::session::replay_log`]
//! to the same output regardless of network timing.

mod routes;
mod ws;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use gazego_core::protocol::{parse_frame, Direction, Frame, LogEntry};
use gazego_core::{Session, SessionConfig};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub use routes::router;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Template for new sessions; requests may override mode, colour, size,
    /// seed, playouts and SNR.
    pub defaults: SessionConfig,
    /// Upper bound on the per-move playout budget a request may ask for.
    pub max_playouts: u32,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { defaults: SessionConfig::default(), max_playouts: 50_000 }
    }
}

pub(crate) struct Entry {
    pub session: Session,
    pub clock_s: f64,
    pub log: Vec<LogEntry>,
}

impl Entry {
    fn new(session: Session) -> Self {
        Self { session, clock_s: 0.0, log: Vec::new() }
    }

    /// Parses and handles one text message, logging both directions.
    pub fn handle_text(&mut self, text: &str) -> Vec<Frame> {
        let frame = match parse_frame(text) {
            Ok(frame) => frame,
            Err(e) => return vec![e.into()],
        };
        self.handle_frame(frame)
    }

    pub fn handle_frame(&mut self, frame: Frame) -> Vec<Frame> {
        self.clock_s += match &frame {
            Frame::Gaze { .. } | Frame::Classification { .. } => self.session.config().synth.window_s,
            Frame::Window { sample_rate_hz, channels, .. } if *sample_rate_hz > 0.0 && sample_rate_hz.is_finite() => {
                channels.first().map_or(0.0, |c| c.samples.len() as f64 / sample_rate_hz)
            }
            _ => 0.0,
        };
        let t = self.clock_s;
        let out = self.session.handle_frame(&frame, t);
        self.log.push(LogEntry { t, dir: Direction::In, frame });
        self.log.extend(out.iter().cloned().map(|frame| LogEntry { t, dir: Direction::Out, frame }));
        out
    }
}

pub(crate) type SharedEntry = Arc<tokio::sync::Mutex<Entry>>;

pub struct AppState {
    pub config: ServerConfig,
    sessions: Mutex<HashMap<String, SharedEntry>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Arc<Self> {
        Arc::new(Self { config, sessions: Mutex::new(HashMap::new()) })
    }

    pub(crate) fn insert(&self, session: Session) -> SharedEntry {
        let id = session.id().to_string();
        let entry = Arc::new(tokio::sync::Mutex::new(Entry::new(session)));
        self.sessions.lock().expect("registry lock").insert(id, entry.clone());
        entry
    }

    pub(crate) fn get(&self, id: &str) -> Option<SharedEntry> {
        self.sessions.lock().expect("registry lock").get(id).cloned()
    }

    pub(crate) fn remove(&self, id: &str) -> Option<SharedEntry> {
        self.sessions.lock().expect("registry lock").remove(id)
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("registry lock").len()
    }
}

/// Binds `addr` and serves in a background task. Returns the bound address,
/// which differs from `addr` when the port is 0.
pub async fn spawn(addr: SocketAddr, config: ServerConfig) -> std::io::Result<(SocketAddr, JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let app = router(AppState::new(config));
    let handle = tokio::spawn(async move { axum::serve(listener, app).await });
    Ok((local, handle))
}

pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(AppState::new(config))).await
}
