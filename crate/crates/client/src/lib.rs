//! Async client for the gazego service: REST calls via `reqwest` and a
//! WebSocket session wrapper that speaks protocol frames.

use futures::{SinkExt, StreamExt};
use gazego_core::api::{AssessResponse, ClosedSession, CreateSessionRequest, ErrorBody, FramesResponse, SessionInfo};
use gazego_core::pipeline::log_from_jsonl;
use gazego_core::protocol::{LogEntry, Mode};
use gazego_core::{Color, EvalSample, Frame};
use serde::de::DeserializeOwned;
use thiserror::Error;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("http: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server returned {status}: {message}")]
    Api { status: u16, message: String },
    #[error("websocket: {0}")]
    WebSocket(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("undecodable response: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

/// Query parameters of `/ws`. With `session_id` set the others are ignored.
#[derive(Debug, Clone, Default)]
pub struct WsParams {
    pub session_id: Option<String>,
    pub mode: Option<Mode>,
    pub human_color: Option<Color>,
    pub board_size: Option<usize>,
    pub seed: Option<u64>,
}

impl WsParams {
    fn query(&self) -> String {
        let mut parts = Vec::new();
        if let Some(id) = &self.session_id {
            parts.push(format!("session_id={id}"));
        }
        if let Some(m) = self.mode {
            parts.push(format!("mode={}", m.as_str()));
        }
        if let Some(c) = self.human_color {
            parts.push(format!("human_color={}", c.as_str()));
        }
        if let Some(n) = self.board_size {
            parts.push(format!("board_size={n}"));
        }
        if let Some(s) = self.seed {
            parts.push(format!("seed={s}"));
        }
        if parts.is_empty() {
            String::new()
        } else {
            format!("?{}", parts.join("&"))
        }
    }
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        let body = resp.text().await?;
        if !status.is_success() {
            let message = serde_json::from_str::<ErrorBody>(&body).map(|e| e.error).unwrap_or(body);
            return Err(ClientError::Api { status: status.as_u16(), message });
        }
        serde_json::from_str(&body).map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub async fn health(&self) -> Result<bool> {
        let resp = self.http.get(format!("{}/healthz", self.base)).send().await?;
        Ok(resp.status().is_success())
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<SessionInfo> {
        Self::decode(self.http.post(format!("{}/api/sessions", self.base)).json(req).send().await?).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionInfo> {
        Self::decode(self.http.get(format!("{}/api/sessions/{id}", self.base)).send().await?).await
    }

    pub async fn send_frame(&self, id: &str, frame: &Frame) -> Result<Vec<Frame>> {
        self.send_text(id, &frame.to_text()).await
    }

    /// Posts raw text, which need not be a valid frame.
    pub async fn send_text(&self, id: &str, text: &str) -> Result<Vec<Frame>> {
        let resp = self.http.post(format!("{}/api/sessions/{id}/frames", self.base)).body(text.to_string()).send().await?;
        Ok(Self::decode::<FramesResponse>(resp).await?.frames)
    }

    pub async fn log(&self, id: &str) -> Result<Vec<LogEntry>> {
        let resp = self.http.get(format!("{}/api/sessions/{id}/log", self.base)).send().await?;
        let status = resp.status();
        let body = resp.text().await?;
        if !status.is_success() {
            return Err(ClientError::Api { status: status.as_u16(), message: body });
        }
        log_from_jsonl(&body).map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub async fn close_session(&self, id: &str) -> Result<ClosedSession> {
        Self::decode(self.http.delete(format!("{}/api/sessions/{id}", self.base)).send().await?).await
    }

    pub async fn assess(&self, sample: &EvalSample) -> Result<AssessResponse> {
        Self::decode(self.http.post(format!("{}/api/assess", self.base)).json(sample).send().await?).await
    }

    pub async fn connect(&self, params: &WsParams) -> Result<WsSession> {
        let ws_base = self.base.replacen("http", "ws", 1);
        let (stream, _) = tokio_tungstenite::connect_async(format!("{ws_base}/ws{}", params.query())).await?;
        Ok(WsSession { stream })
    }
}

pub struct WsSession {
    stream: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl WsSession {
    pub async fn send(&mut self, frame: &Frame) -> Result<()> {
        self.send_text(&frame.to_text()).await
    }

    pub async fn send_text(&mut self, text: &str) -> Result<()> {
        self.stream.send(Message::text(text)).await?;
        Ok(())
    }

    /// Next frame, or `None` once the server closes the socket.
    pub async fn recv(&mut self) -> Result<Option<Frame>> {
        while let Some(msg) = self.stream.next().await {
            match msg? {
                Message::Text(t) => {
                    return serde_json::from_str(t.as_str()).map(Some).map_err(|e| ClientError::Decode(e.to_string()))
                }
                Message::Close(_) => return Ok(None),
                _ => continue,
            }
        }
        Ok(None)
    }

    /// Receives until `stop` matches, returning every frame up to and
    /// including the matching one.
    pub async fn recv_until(&mut self, mut stop: impl FnMut(&Frame) -> bool) -> Result<Vec<Frame>> {
        let mut frames = Vec::new();
        while let Some(f) = self.recv().await? {
            let done = stop(&f);
            frames.push(f);
            if done {
                break;
            }
        }
        Ok(frames)
    }

    /// Sends a close frame but keeps the session readable: frames the server
    /// queued earlier still arrive, then `recv` yields `None`.
    pub async fn start_close(&mut self) -> Result<()> {
        self.stream.close(None).await?;
        Ok(())
    }

    pub async fn close(mut self) -> Result<()> {
        self.stream.close(None).await?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ws_query_string() {
        assert_eq!(WsParams::default().query(), "");
        let p = WsParams { mode: Some(Mode::Predictive), board_size: Some(9), ..WsParams::default() };
        assert_eq!(p.query(), "?mode=predictive&board_size=9");
    }
}
