//! Per-session protocol state machine. Transport-free: feed it frames, get
//! back the ordered frames to emit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessor::{assess, AssessorConfig, EvalSample};
use crate::command::{Command, StimulusTable};
use crate::decoder::{classify, Classification, Debouncer, DecoderConfig};
use crate::engine::gtp::format_vertex;
use crate::engine::{genmove, top_suggestions, EngineConfig, SearchResult};
use crate::goban::{tromp_taylor_score, BoardState, Color, GameRecord, Move};
use crate::navigator::{apply_command, initial_cursor, CursorState, NavOutcome};
use crate::protocol::{parse_frame, Direction, ErrorCode, Frame, LogEntry, Mode, SuggestedMove};
use crate::rng::derive_seed;
use crate::synth::{check_impedance, generate_window, Channel, GazeState, ImpedanceReport, SignalWindow, SynthConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub mode: Mode,
    pub human_color: Color,
    pub board_size: usize,
    pub stimulus: StimulusTable,
    /// `synth.seed` is replaced by a value derived from `seed`.
    pub synth: SynthConfig,
    pub decoder: DecoderConfig,
    /// `engine.seed` is replaced per move by a value derived from `seed`.
    pub engine: EngineConfig,
    pub assessor: AssessorConfig,
    pub impedance_threshold_kohm: f64,
    /// Playouts for the predictive-mode advisor; `None` uses the engine budget.
    pub advisor_playouts: Option<u32>,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Competitive,
            human_color: Color::Black,
            board_size: 19,
            stimulus: StimulusTable::default(),
            synth: SynthConfig::default(),
            decoder: DecoderConfig::default(),
            engine: EngineConfig::default(),
            assessor: AssessorConfig::default(),
            impedance_threshold_kohm: crate::synth::DEFAULT_IMPEDANCE_THRESHOLD_KOHM,
            advisor_playouts: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ImpedanceGate,
    Playing,
    Finished,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    cfg: SessionConfig,
    phase: Phase,
    board: BoardState,
    cursor: CursorState,
    debouncer: Debouncer,
    next_window_id: u64,
    last_window_id: Option<u64>,
    record: GameRecord,
    eval_history: Vec<EvalSample>,
    human_moves: u32,
}

/// Black-perspective sample from a root search for `side_to_move`.
pub fn assessment_from_search(result: &SearchResult, side_to_move: Color, move_no: u32) -> EvalSample {
    let w = result.winrate();
    let black_winrate = match side_to_move {
        Color::Black => w,
        Color::White => 1.0 - w,
    };
    EvalSample { move_no, black_winrate, simulations: u64::from(result.total_simulations) }
}

impl Session {
    pub fn new(id: impl Into<String>, mut cfg: SessionConfig) -> Result<Self, SessionError> {
        let invalid = |m: String| SessionError::InvalidConfig(m);
        let board = BoardState::new(cfg.board_size).map_err(|e| invalid(e.to_string()))?;
        cfg.synth.seed = derive_seed(cfg.seed, "synth", 0);
        cfg.synth.validate(&cfg.stimulus).map_err(|e| invalid(e.to_string()))?;
        cfg.decoder.validate().map_err(|e| invalid(e.to_string()))?;
        cfg.assessor.validate().map_err(|e| invalid(e.to_string()))?;
        cfg.stimulus
            .check_nyquist(cfg.synth.sample_rate_hz, cfg.decoder.n_harmonics)
            .map_err(|e| invalid(e.to_string()))?;
        if cfg.engine.playouts == 0 || cfg.advisor_playouts == Some(0) {
            return Err(invalid("playout budgets must be at least 1".into()));
        }
        if !(cfg.impedance_threshold_kohm.is_finite() && cfg.impedance_threshold_kohm > 0.0) {
            return Err(invalid("impedance threshold must be positive".into()));
        }
        Ok(Self {
            id: id.into(),
            phase: Phase::ImpedanceGate,
            cursor: initial_cursor(cfg.board_size),
            record: GameRecord::new(cfg.board_size, cfg.engine.komi),
            board,
            cfg,
            debouncer: Debouncer::new(),
            next_window_id: 0,
            last_window_id: None,
            eval_history: Vec::new(),
            human_moves: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn board(&self) -> &BoardState {
        &self.board
    }

    pub fn cursor(&self) -> CursorState {
        self.cursor
    }

    pub fn eval_history(&self) -> &[EvalSample] {
        &self.eval_history
    }

    /// Moves so far; the result is `unfinished` unless the game ended.
    pub fn close_session(&self) -> GameRecord {
        let mut record = self.record.clone();
        if record.result.is_none() {
            record.result = Some("unfinished".to_string());
        }
        record
    }

    pub fn hello(&self) -> Frame {
        Frame::Hello {
            session_id: Some(self.id.clone()),
            mode: Some(self.cfg.mode),
            human_color: Some(self.cfg.human_color),
            board_size: Some(self.cfg.board_size),
        }
    }

    pub fn board_state(&self) -> Frame {
        Frame::BoardState {
            size: self.board.size(),
            grid: self.board.grid_string(),
            to_move: self.board.to_move(),
            cursor: self.cursor,
        }
    }

    pub fn handle_text(&mut self, text: &str, now_s: f64) -> Vec<Frame> {
        match parse_frame(text) {
            Ok(frame) => self.handle_frame(&frame, now_s),
            Err(e) => vec![e.into()],
        }
    }

    pub fn handle_frame(&mut self, frame: &Frame, now_s: f64) -> Vec<Frame> {
        let mut out = Vec::new();
        match frame {
            Frame::Hello { .. } => {
                out.push(self.hello());
                out.push(self.board_state());
            }
            Frame::ImpedanceReport { kohm } => self.on_impedance(kohm, &mut out),
            _ if self.phase != Phase::Playing && is_gameplay(frame) => {
                let phase = match self.phase {
                    Phase::ImpedanceGate => "the impedance gate is still closed",
                    _ => "the game is finished",
                };
                out.push(Frame::error(ErrorCode::BadPhase, format!("`{}` rejected: {phase}", frame.type_name())));
            }
            Frame::Gaze { target } => match self.synthesize(GazeState { target: *target }) {
                Ok(window) => self.on_window(window, now_s, &mut out),
                Err(message) => out.push(Frame::error(ErrorCode::MalformedPayload, message)),
            },
            Frame::Window { window_id, sample_rate_hz, channels } => {
                if self.last_window_id.is_some_and(|last| *window_id <= last) {
                    out.push(Frame::error(ErrorCode::MalformedPayload, "window_id must increase within a session"));
                } else {
                    let window = SignalWindow {
                        channels: channels.clone(),
                        sample_rate_hz: *sample_rate_hz,
                        start_time_s: now_s.max(0.0),
                        window_id: *window_id,
                    };
                    self.on_window(window, now_s, &mut out);
                }
            }
            Frame::Classification { window_id, scores, predicted, confidence } => {
                let complete = Command::ALL.iter().all(|c| scores.get(c).is_some_and(|s| s.is_finite()));
                if !complete || !confidence.is_finite() {
                    out.push(Frame::error(ErrorCode::MalformedPayload, "classification needs a finite score per command"));
                } else {
                    let cls = Classification {
                        window_id: *window_id,
                        scores: scores.clone(),
                        predicted: *predicted,
                        confidence: *confidence,
                    };
                    self.on_classification(cls, now_s, &mut out);
                }
            }
            Frame::Command { command } => self.on_command(*command, &mut out),
            Frame::MovePlayed { color, mv, .. } => {
                if *color != self.cfg.human_color {
                    out.push(Frame::error(ErrorCode::IllegalMove, format!("the client plays {}", self.cfg.human_color.as_str())));
                } else {
                    self.human_move(*mv, &mut out);
                }
            }
            Frame::BoardState { .. }
            | Frame::Suggestion { .. }
            | Frame::Assessment { .. }
            | Frame::GameOver { .. }
            | Frame::Error { .. } => out.push(Frame::error(
                ErrorCode::UnexpectedFrame,
                format!("`{}` is a server-to-client frame", frame.type_name()),
            )),
        }
        out
    }

    fn on_impedance(&mut self, kohm: &BTreeMap<String, f64>, out: &mut Vec<Frame>) {
        if self.phase != Phase::ImpedanceGate {
            out.push(Frame::error(ErrorCode::BadPhase, "the impedance gate has already been passed"));
            return;
        }
        let labels = &self.cfg.synth.channel_labels;
        let well_formed = kohm.len() == labels.len()
            && labels.iter().all(|l| kohm.contains_key(l))
            && kohm.values().all(|v| v.is_finite() && *v >= 0.0);
        if !well_formed {
            out.push(Frame::error(
                ErrorCode::MalformedPayload,
                format!("impedance report needs one non-negative value for each of {}", labels.join(", ")),
            ));
            return;
        }
        let report = ImpedanceReport { per_channel_kohm: kohm.clone() };
        let check = match check_impedance(&report, self.cfg.impedance_threshold_kohm) {
            Ok(check) => check,
            Err(e) => {
                out.push(Frame::error(ErrorCode::MalformedPayload, e.to_string()));
                return;
            }
        };
        if !check.gate_open {
            let failing: Vec<&str> =
                check.per_channel_pass.iter().filter(|(_, ok)| !**ok).map(|(l, _)| l.as_str()).collect();
            out.push(Frame::error(
                ErrorCode::GateClosed,
                format!("impedance above {} kOhm on {}", self.cfg.impedance_threshold_kohm, failing.join(", ")),
            ));
            return;
        }
        self.phase = Phase::Playing;
        out.push(self.board_state());
        if self.board.to_move() != self.cfg.human_color {
            self.engine_reply(out);
        }
    }

    fn synthesize(&mut self, gaze: GazeState) -> Result<SignalWindow, String> {
        let id = self.next_window_id.max(self.last_window_id.map_or(0, |w| w + 1));
        generate_window(gaze, &self.cfg.stimulus, &self.cfg.synth, id).map_err(|e| e.to_string())
    }

    fn on_window(&mut self, window: SignalWindow, now_s: f64, out: &mut Vec<Frame>) {
        match classify(&window, &self.cfg.stimulus, &self.cfg.decoder) {
            Ok(cls) => {
                self.last_window_id = Some(window.window_id);
                self.next_window_id = window.window_id + 1;
                out.push(Frame::Classification {
                    window_id: cls.window_id,
                    scores: cls.scores.clone(),
                    predicted: cls.predicted,
                    confidence: cls.confidence,
                });
                self.on_classification(cls, now_s, out);
            }
            Err(e) => out.push(Frame::error(ErrorCode::MalformedPayload, e.to_string())),
        }
    }

    fn on_classification(&mut self, cls: Classification, now_s: f64, out: &mut Vec<Frame>) {
        if let Some(command) = self.debouncer.push(cls, &self.cfg.decoder, now_s) {
            out.push(Frame::Command { command });
            self.on_command(command, out);
        }
    }

    fn on_command(&mut self, command: Command, out: &mut Vec<Frame>) {
        match apply_command(self.cursor, command, &self.board) {
            NavOutcome::Moved(cursor) => {
                self.cursor = cursor;
                out.push(self.board_state());
            }
            NavOutcome::Blocked { .. } => out.push(self.board_state()),
            NavOutcome::Proposed(mv) => self.human_move(mv, out),
            NavOutcome::Rejected { reason } => out.push(Frame::error(ErrorCode::IllegalMove, reason)),
        }
    }

    fn human_move(&mut self, mv: Move, out: &mut Vec<Frame>) {
        if self.board.to_move() != self.cfg.human_color {
            out.push(Frame::error(ErrorCode::IllegalMove, "not the client's turn"));
            return;
        }
        if let Err(e) = self.play(mv, out) {
            out.push(Frame::error(ErrorCode::IllegalMove, e.rule_name()));
            return;
        }
        self.human_moves += 1;
        self.finish_if_over(out);
        if self.phase == Phase::Playing {
            self.engine_reply(out);
        }
    }

    fn play(&mut self, mv: Move, out: &mut Vec<Frame>) -> Result<(), crate::goban::GoError> {
        let color = self.board.to_move();
        self.board = self.board.play(mv)?;
        self.record.moves.push((color, mv));
        out.push(Frame::MovePlayed {
            color,
            mv,
            move_no: self.record.moves.len() as u32,
            captures: self.board.captures(color),
        });
        out.push(self.board_state());
        Ok(())
    }

    fn finish_if_over(&mut self, out: &mut Vec<Frame>) {
        if self.board.is_game_over() {
            let result = match self.board.resigned() {
                Some(loser) => format!("{}+R", loser.opponent().sgf_letter()),
                None => tromp_taylor_score(&self.board, self.cfg.engine.komi).result,
            };
            self.record.result = Some(result.clone());
            self.phase = Phase::Finished;
            out.push(Frame::GameOver { result });
        }
    }

    fn search(&self, label: &str, playouts: u32) -> SearchResult {
        let move_no = self.record.moves.len() as u64;
        let cfg = EngineConfig {
            playouts,
            seed: derive_seed(self.cfg.seed, label, move_no),
            ..self.cfg.engine.clone()
        };
        genmove(&self.board, &cfg).expect("search runs only while the game is live")
    }

    fn engine_reply(&mut self, out: &mut Vec<Frame>) {
        let side = self.board.to_move();
        let result = self.search("engine", self.cfg.engine.playouts);
        self.play(result.best, out).expect("engine moves are legal");
        let sample = assessment_from_search(&result, side, self.record.moves.len() as u32);
        let label = assess(&sample, &self.cfg.assessor).label;
        self.eval_history.push(sample);
        out.push(Frame::Assessment {
            move_no: sample.move_no,
            black_winrate: sample.black_winrate,
            simulations: sample.simulations,
            label,
        });
        self.finish_if_over(out);
        if self.cfg.mode == Mode::Predictive && self.human_moves > 0 && self.phase == Phase::Playing {
            out.push(self.suggestion());
        }
    }

    fn suggestion(&self) -> Frame {
        let playouts = self.cfg.advisor_playouts.unwrap_or(self.cfg.engine.playouts);
        let result = self.search("advisor", playouts);
        let moves = top_suggestions(&result, result.suggestions.len())
            .iter()
            .filter_map(|s| match s.mv {
                Move::Play { x, y } => Some(SuggestedMove { x, y, winrate: s.winrate, visits: s.visits }),
                _ => None,
            })
            .take(3)
            .collect();
        let text = format!(
            "I suggest {} (win {:.0}%).",
            format_vertex(result.best, self.board.size()),
            result.suggestions.first().map_or(0.5, |s| s.winrate) * 100.0
        );
        Frame::Suggestion { moves, text }
    }
}

/// Frames that need `phase == Playing`.
fn is_gameplay(frame: &Frame) -> bool {
    matches!(
        frame,
        Frame::Gaze { .. } | Frame::Window { .. } | Frame::Classification { .. } | Frame::Command { .. } | Frame::MovePlayed { .. }
    )
}

/// Feeds the `in` entries of a frame log to a fresh session and returns the
/// complete log of inputs and outputs it produces.
pub fn replay_log(id: &str, cfg: SessionConfig, entries: &[LogEntry]) -> Result<Vec<LogEntry>, SessionError> {
    let mut session = Session::new(id, cfg)?;
    let mut log = Vec::new();
    for e in entries.iter().filter(|e| e.dir == Direction::In) {
        log.push(e.clone());
        for frame in session.handle_frame(&e.frame, e.t) {
            log.push(LogEntry { t: e.t, dir: Direction::Out, frame });
        }
    }
    Ok(log)
}

/// Wire form of a window.
pub fn window_frame(window: &SignalWindow) -> Frame {
    Frame::Window {
        window_id: window.window_id,
        sample_rate_hz: window.sample_rate_hz,
        channels: window.channels.iter().map(|c| Channel { label: c.label.clone(), samples: c.samples.clone() }).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_cfg(size: usize) -> SessionConfig {
        SessionConfig {
            board_size: size,
            engine: EngineConfig { playouts: 50, ..EngineConfig::default() },
            synth: SynthConfig { snr_db: 60.0, ..SynthConfig::default() },
            ..SessionConfig::default()
        }
    }

    fn open(session: &mut Session) -> Vec<Frame> {
        let kohm = [("O1".to_string(), 100.0), ("O2".to_string(), 100.0)].into();
        session.handle_frame(&Frame::ImpedanceReport { kohm }, 0.0)
    }

    fn types(frames: &[Frame]) -> Vec<&'static str> {
        frames.iter().map(Frame::type_name).collect()
    }

    #[test]
    fn create_defaults() {
        let s = Session::new("a", SessionConfig { seed: 42, ..SessionConfig::default() }).unwrap();
        assert_eq!(s.phase(), Phase::ImpedanceGate);
        assert_eq!(s.cursor(), CursorState { x: 9, y: 9 });
        assert_eq!(s.board().stones_on_board(), 0);
        assert_eq!(s.board().size(), 19);
        let rec = s.close_session();
        assert!(rec.moves.is_empty());
        assert_eq!(rec.result.as_deref(), Some("unfinished"));
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(Session::new("a", SessionConfig { board_size: 0, ..SessionConfig::default() }).is_err());
        let mut cfg = SessionConfig::default();
        cfg.synth.sample_rate_hz = 40.0;
        assert!(matches!(Session::new("a", cfg), Err(SessionError::InvalidConfig(_))));
    }

    #[test]
    fn gate_opens_and_blocks() {
        let mut s = Session::new("a", fast_cfg(9)).unwrap();
        let kohm = [("O1".to_string(), 100.0), ("O2".to_string(), 500.0)].into();
        let out = s.handle_frame(&Frame::ImpedanceReport { kohm }, 0.0);
        assert!(matches!(&out[..], [Frame::Error { code: ErrorCode::GateClosed, .. }]));
        assert_eq!(s.phase(), Phase::ImpedanceGate);
        assert_eq!(types(&open(&mut s)), ["board_state"]);
        assert_eq!(s.phase(), Phase::Playing);
        assert!(matches!(&open(&mut s)[..], [Frame::Error { code: ErrorCode::BadPhase, .. }]));
    }

    #[test]
    fn select_triggers_engine_reply() {
        let mut s = Session::new("a", fast_cfg(9)).unwrap();
        open(&mut s);
        let out = s.handle_frame(&Frame::Command { command: Command::Select }, 0.0);
        assert_eq!(types(&out), ["move_played", "board_state", "move_played", "board_state", "assessment"]);
        assert!(matches!(out[0], Frame::MovePlayed { color: Color::Black, mv: Move::Play { x: 4, y: 4 }, move_no: 1, .. }));
        let out = s.handle_frame(&Frame::Command { command: Command::Select }, 0.0);
        assert!(matches!(&out[..], [Frame::Error { code: ErrorCode::IllegalMove, message }] if message == "Occupied"));
    }

    #[test]
    fn gaze_before_gate_and_after_finish_is_bad_phase() {
        let mut s = Session::new("a", fast_cfg(9)).unwrap();
        let gaze = Frame::Gaze { target: Some(Command::Up) };
        assert!(matches!(&s.handle_frame(&gaze, 0.0)[..], [Frame::Error { code: ErrorCode::BadPhase, .. }]));
        open(&mut s);
        let resign = Frame::MovePlayed { color: Color::Black, mv: Move::Resign, move_no: 0, captures: 0 };
        let out = s.handle_frame(&resign, 0.0);
        assert_eq!(types(&out), ["move_played", "board_state", "game_over"]);
        assert!(matches!(&out[2], Frame::GameOver { result } if result == "W+R"));
        assert_eq!(s.phase(), Phase::Finished);
        let before = s.board().clone();
        assert!(matches!(&s.handle_frame(&gaze, 1.0)[..], [Frame::Error { code: ErrorCode::BadPhase, .. }]));
        assert_eq!(s.board(), &before);
        assert_eq!(s.close_session().result.as_deref(), Some("W+R"));
    }

    #[test]
    fn gaze_frames_decode_to_commands() {
        let mut s = Session::new("a", fast_cfg(9)).unwrap();
        open(&mut s);
        let gaze = Frame::Gaze { target: Some(Command::Up) };
        let first = s.handle_frame(&gaze, 2.0);
        assert_eq!(types(&first), ["classification"]);
        let second = s.handle_frame(&gaze, 4.0);
        assert_eq!(types(&second), ["classification", "command", "board_state"]);
        assert_eq!(s.cursor(), CursorState { x: 4, y: 3 });
    }

    #[test]
    fn white_human_gets_engine_opening() {
        let cfg = SessionConfig { human_color: Color::White, ..fast_cfg(9) };
        let mut s = Session::new("a", cfg).unwrap();
        assert_eq!(types(&open(&mut s)), ["board_state", "move_played", "board_state", "assessment"]);
        assert_eq!(s.board().to_move(), Color::White);
    }

    #[test]
    fn predictive_suggestion_after_first_human_move() {
        let cfg = SessionConfig { mode: Mode::Predictive, ..fast_cfg(9) };
        let mut s = Session::new("a", cfg).unwrap();
        open(&mut s);
        let out = s.handle_frame(&Frame::Command { command: Command::Select }, 0.0);
        assert_eq!(types(&out).last(), Some(&"suggestion"));
        let Frame::Suggestion { moves, text } = out.last().unwrap() else { unreachable!() };
        assert!(moves.len() <= 3 && !moves.is_empty());
        assert!(text.starts_with("I suggest ") && text.ends_with("%)."), "{text}");
    }

    #[test]
    fn assessment_perspective() {
        let result = SearchResult {
            best: Move::Pass,
            suggestions: vec![crate::engine::Suggestion { mv: Move::Pass, winrate: 0.6, visits: 10_000 }],
            total_simulations: 10_000,
        };
        let b = assessment_from_search(&result, Color::Black, 3);
        assert_eq!((b.black_winrate, b.simulations, b.move_no), (0.6, 10_000, 3));
        assert!((assessment_from_search(&result, Color::White, 3).black_winrate - 0.4).abs() < 1e-12);
        let even = SearchResult { suggestions: vec![crate::engine::Suggestion { mv: Move::Pass, winrate: 0.5, visits: 1 }], ..result };
        assert_eq!(assessment_from_search(&even, Color::White, 0).black_winrate, 0.5);
    }

    #[test]
    fn text_errors_and_server_frames() {
        let mut s = Session::new("a", fast_cfg(9)).unwrap();
        assert!(matches!(&s.handle_text("{", 0.0)[..], [Frame::Error { code: ErrorCode::MalformedPayload, .. }]));
        assert!(matches!(&s.handle_text(r#"{"type":"warp"}"#, 0.0)[..], [Frame::Error { code: ErrorCode::UnknownType, .. }]));
        let f = Frame::GameOver { result: "B+1".into() };
        assert!(matches!(&s.handle_frame(&f, 0.0)[..], [Frame::Error { code: ErrorCode::UnexpectedFrame, .. }]));
        let hello = s.handle_text(r#"{"type":"hello"}"#, 0.0);
        assert_eq!(types(&hello), ["hello", "board_state"]);
    }
}
