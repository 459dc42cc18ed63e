//! Wire schema: one JSON object per WebSocket text message, tagged by `type`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assessor::GameSituationLabel;
use crate::command::Command;
use crate::goban::{Color, Move};
use crate::navigator::CursorState;
use crate::synth::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Human against the engine, no advice.
    Competitive,
    /// Human against the engine with a suggestion before each turn.
    Predictive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Competitive => "competitive",
            Mode::Predictive => "predictive",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "competitive" => Ok(Mode::Competitive),
            "predictive" => Ok(Mode::Predictive),
            other => Err(format!("unknown mode `{other}` (expected competitive|predictive)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    BadPhase,
    IllegalMove,
    UnknownType,
    MalformedPayload,
    /// An impedance report failed the threshold; the session stays gated.
    GateClosed,
    /// The client sent a frame only the server emits.
    UnexpectedFrame,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCode::BadPhase => "BadPhase",
            ErrorCode::IllegalMove => "IllegalMove",
            ErrorCode::UnknownType => "UnknownType",
            ErrorCode::MalformedPayload => "MalformedPayload",
            ErrorCode::GateClosed => "GateClosed",
            ErrorCode::UnexpectedFrame => "UnexpectedFrame",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestedMove {
    pub x: usize,
    pub y: usize,
    pub winrate: f64,
    pub visits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Frame {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        human_color: Option<Color>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        board_size: Option<usize>,
    },
    ImpedanceReport {
        kohm: BTreeMap<String, f64>,
    },
    Gaze {
        #[serde(with = "gaze_target")]
        target: Option<Command>,
    },
    Window {
        window_id: u64,
        sample_rate_hz: f64,
        channels: Vec<Channel>,
    },
    Classification {
        window_id: u64,
        scores: BTreeMap<Command, f64>,
        predicted: Command,
        confidence: f64,
    },
    Command {
        command: Command,
    },
    MovePlayed {
        color: Color,
        #[serde(rename = "move", with = "move_serde")]
        mv: Move,
        move_no: u32,
        captures: u32,
    },
    BoardState {
        size: usize,
        grid: String,
        to_move: Color,
        cursor: CursorState,
    },
    Suggestion {
        moves: Vec<SuggestedMove>,
        text: String,
    },
    Assessment {
        move_no: u32,
        black_winrate: f64,
        simulations: u64,
        label: GameSituationLabel,
    },
    GameOver {
        result: String,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

pub const FRAME_TYPES: [&str; 12] = [
    "hello",
    "impedance_report",
    "gaze",
    "window",
    "classification",
    "command",
    "move_played",
    "board_state",
    "suggestion",
    "assessment",
    "game_over",
    "error",
];

impl Frame {
    pub fn type_name(&self) -> &'static str {
        match self {
            Frame::Hello { .. } => "hello",
            Frame::ImpedanceReport { .. } => "impedance_report",
            Frame::Gaze { .. } => "gaze",
            Frame::Window { .. } => "window",
            Frame::Classification { .. } => "classification",
            Frame::Command { .. } => "command",
            Frame::MovePlayed { .. } => "move_played",
            Frame::BoardState { .. } => "board_state",
            Frame::Suggestion { .. } => "suggestion",
            Frame::Assessment { .. } => "assessment",
            Frame::GameOver { .. } => "game_over",
            Frame::Error { .. } => "error",
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Frame::Error { code, message: message.into() }
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("frames always serialize")
    }
}

/// A text message that did not decode to a [`Frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameError {
    pub code: ErrorCode,
    pub message: String,
}

impl From<FrameError> for Frame {
    fn from(e: FrameError) -> Self {
        Frame::Error { code: e.code, message: e.message }
    }
}

/// Decodes one text message. Unknown `type` tags give `UnknownType`; any
/// other failure gives `MalformedPayload`.
pub fn parse_frame(text: &str) -> Result<Frame, FrameError> {
    let malformed = |m: String| FrameError { code: ErrorCode::MalformedPayload, message: m };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| malformed(format!("invalid JSON: {e}")))?;
    let tag = match value.get("type") {
        Some(serde_json::Value::String(t)) => t.clone(),
        Some(_) => return Err(malformed("`type` must be a string".into())),
        None => return Err(malformed("missing `type` field".into())),
    };
    if !FRAME_TYPES.contains(&tag.as_str()) {
        return Err(FrameError { code: ErrorCode::UnknownType, message: format!("unknown frame type `{tag}`") });
    }
    serde_json::from_value(value).map_err(|e| malformed(format!("bad `{tag}` payload: {e}")))
}

/// One line of a session frame log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub t: f64,
    pub dir: Direction,
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// `{"kind":"play","x":3,"y":3}`, `{"kind":"pass"}` or `{"kind":"resign"}`.
pub mod move_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::goban::Move;

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "lowercase")]
    enum Kind {
        Play,
        Pass,
        Resign,
    }

    #[derive(Serialize, Deserialize)]
    struct Wire {
        kind: Kind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y: Option<usize>,
    }

    pub fn serialize<S: Serializer>(mv: &Move, s: S) -> Result<S::Ok, S::Error> {
        let wire = match *mv {
            Move::Play { x, y } => Wire { kind: Kind::Play, x: Some(x), y: Some(y) },
            Move::Pass => Wire { kind: Kind::Pass, x: None, y: None },
            Move::Resign => Wire { kind: Kind::Resign, x: None, y: None },
        };
        wire.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Move, D::Error> {
        let wire = Wire::deserialize(d)?;
        match wire.kind {
            Kind::Play => match (wire.x, wire.y) {
                (Some(x), Some(y)) => Ok(Move::Play { x, y }),
                _ => Err(D::Error::custom("play needs both x and y")),
            },
            Kind::Pass => Ok(Move::Pass),
            Kind::Resign => Ok(Move::Resign),
        }
    }
}

mod gaze_target {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::command::Command;

    pub fn serialize<S: Serializer>(target: &Option<Command>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(target.map_or("none", Command::as_str))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Command>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "none" {
            return Ok(None);
        }
        s.parse().map(Some).map_err(|_| D::Error::custom(format!("unknown gaze target `{s}`")))
    }
}
