use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::response::{IntoResponse, Response};
use futures::{SinkExt, StreamExt};
use gazego_core::api::CreateSessionRequest;
use gazego_core::protocol::{ErrorCode, Frame, Mode};
use gazego_core::Color;
use serde::Deserialize;

use crate::routes::{handle_blocking, new_session, snapshot};
use crate::{AppState, SharedEntry};

#[derive(Debug, Deserialize)]
pub(crate) struct WsParams {
    session_id: Option<String>,
    mode: Option<Mode>,
    human_color: Option<Color>,
    board_size: Option<usize>,
    seed: Option<u64>,
}

/// `/ws?session_id=...` resumes a session; otherwise a new one is created
/// from the remaining parameters. The server speaks first with `hello` and
/// a `board_state` snapshot.
pub(crate) async fn upgrade(
    State(state): State<Arc<AppState>>,
    Query(params): Query<WsParams>,
    ws: WebSocketUpgrade,
) -> Result<Response, crate::routes::ApiError> {
    let entry = match &params.session_id {
        Some(id) => state.get(id).ok_or_else(|| crate::routes::ApiError::NotFound(id.clone()))?,
        None => new_session(
            &state,
            &CreateSessionRequest {
                mode: params.mode,
                human_color: params.human_color,
                board_size: params.board_size,
                seed: params.seed,
                ..CreateSessionRequest::default()
            },
        )?,
    };
    Ok(ws.on_upgrade(move |socket| run(socket, entry)).into_response())
}

async fn send(socket: &mut futures::stream::SplitSink<WebSocket, Message>, frames: &[Frame]) -> bool {
    for f in frames {
        if socket.send(Message::Text(f.to_text().into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn run(socket: WebSocket, entry: SharedEntry) {
    let (mut tx, mut rx) = socket.split();
    let greeting = snapshot(&*entry.lock().await).frames;
    if !send(&mut tx, &greeting).await {
        return;
    }
    while let Some(Ok(msg)) = rx.next().await {
        let frames = match msg {
            Message::Text(text) => handle_blocking(entry.clone(), text.to_string()).await,
            Message::Binary(_) => vec![Frame::error(ErrorCode::MalformedPayload, "binary messages are not supported")],
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        if !send(&mut tx, &frames).await {
            break;
        }
    }
    // Flushes the close reply queued when the client's close frame arrived.
    let _ = tx.close().await;
    tracing::debug!("websocket closed");
}
