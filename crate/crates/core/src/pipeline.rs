//! Headless workflows behind the CLI: scripted-gaze games and SGF replay
//! analysis. No sockets; everything runs through [`Session`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::assessor::{assess_series, timeline_csv, AssessorConfig, EvalSample};
use crate::command::Command;
use crate::engine::{genmove, EngineConfig};
use crate::goban::{to_sgf, BoardState, GameRecord, Move};
use crate::protocol::{Direction, Frame, LogEntry};
use crate::rng::derive_seed;
use crate::session::{assessment_from_search, Phase, Session, SessionConfig, SessionError};
use crate::synth::measure_impedance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: unknown gaze intent `{token}`")]
pub struct ScriptError {
    pub line: usize,
    pub token: String,
}

/// One intent per line; `#` starts a comment; blank lines are skipped.
pub fn parse_gaze_script(text: &str) -> Result<Vec<Command>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let token = raw.split('#').next().unwrap_or("").trim();
        if token.is_empty() {
            continue;
        }
        let command = token.parse().map_err(|_| ScriptError { line: i + 1, token: token.to_string() })?;
        out.push(command);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub session: SessionConfig,
    pub true_impedance_kohm: BTreeMap<String, f64>,
    pub impedance_jitter_pct: f64,
    /// Gaze windows spent on one intent before giving up on it.
    pub max_windows_per_intent: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            session: SessionConfig::default(),
            true_impedance_kohm: [("O1".to_string(), 100.0), ("O2".to_string(), 100.0)].into(),
            impedance_jitter_pct: 0.0,
            max_windows_per_intent: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub record: GameRecord,
    pub log: Vec<LogEntry>,
    pub eval_history: Vec<EvalSample>,
    /// Intents that never produced a command within the window budget.
    pub stalled_intents: usize,
    pub gate_open: bool,
}

impl SimulateOutput {
    pub fn sgf(&self) -> String {
        to_sgf(&self.record)
    }

    pub fn frames_jsonl(&self) -> String {
        log_to_jsonl(&self.log)
    }

    pub fn assessment_csv(&self, cfg: &AssessorConfig) -> String {
        timeline_csv(&self.eval_history, &assess_series(&self.eval_history, cfg))
    }
}

pub fn log_to_jsonl(log: &[LogEntry]) -> String {
    let mut out = String::new();
    for e in log {
        let _ = writeln!(out, "{}", serde_json::to_string(e).expect("log entries serialize"));
    }
    out
}

pub fn log_from_jsonl(text: &str) -> Result<Vec<LogEntry>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

pub const SIMULATE_SESSION_ID: &str = "simulate";

/// Runs a scripted game in-process. Each intent is gazed at, one window per
/// `window_s`, until the decoder emits a command or the game ends.
pub fn run_simulate(script: &[Command], cfg: &SimulateConfig) -> Result<SimulateOutput, SessionError> {
    let mut session = Session::new(SIMULATE_SESSION_ID, cfg.session.clone())?;
    let mut log = Vec::new();
    let feed = |session: &mut Session, log: &mut Vec<LogEntry>, frame: Frame, t: f64| {
        let out = session.handle_frame(&frame, t);
        log.push(LogEntry { t, dir: Direction::In, frame });
        let emitted_command = out.iter().any(|f| matches!(f, Frame::Command { .. }));
        log.extend(out.into_iter().map(|frame| LogEntry { t, dir: Direction::Out, frame }));
        emitted_command
    };

    let report = measure_impedance(
        &cfg.true_impedance_kohm,
        cfg.impedance_jitter_pct,
        derive_seed(cfg.session.seed, "impedance", 0),
    );
    feed(&mut session, &mut log, Frame::ImpedanceReport { kohm: report.per_channel_kohm }, 0.0);
    let gate_open = session.phase() != Phase::ImpedanceGate;

    let window_s = cfg.session.synth.window_s;
    let mut windows = 0u64;
    let mut stalled_intents = 0;
    if gate_open {
        for &intent in script {
            if session.phase() != Phase::Playing {
                break;
            }
            let mut emitted = false;
            for _ in 0..cfg.max_windows_per_intent {
                windows += 1;
                let t = windows as f64 * window_s;
                if feed(&mut session, &mut log, Frame::Gaze { target: Some(intent) }, t) {
                    emitted = true;
                    break;
                }
            }
            stalled_intents += usize::from(!emitted);
        }
    }
    Ok(SimulateOutput {
        record: session.close_session(),
        log,
        eval_history: session.eval_history().to_vec(),
        stalled_intents,
        gate_open,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("move {move_no} is illegal: {rule}")]
    IllegalMove { move_no: usize, rule: &'static str },
    #[error("bad board size: {0}")]
    BadSize(String),
}

/// After each move of `record`, searches the resulting position and records
/// a Black-perspective sample. Stops when the game ends.
pub fn replay_record(record: &GameRecord, engine: &EngineConfig) -> Result<Vec<EvalSample>, ReplayError> {
    let mut board = BoardState::new(record.size).map_err(|e| ReplayError::BadSize(e.to_string()))?;
    let mut samples = Vec::new();
    for (i, &(color, mv)) in record.moves.iter().enumerate() {
        if mv == Move::Resign {
            break;
        }
        if board.to_move() != color {
            return Err(ReplayError::IllegalMove { move_no: i + 1, rule: "OutOfTurn" });
        }
        board = board.play(mv).map_err(|e| ReplayError::IllegalMove { move_no: i + 1, rule: e.rule_name() })?;
        if board.is_game_over() {
            break;
        }
        let cfg = EngineConfig { seed: derive_seed(engine.seed, "replay", i as u64), ..engine.clone() };
        let result = genmove(&board, &cfg).expect("game is live");
        samples.push(assessment_from_search(&result, board.to_move(), (i + 1) as u32));
    }
    Ok(samples)
}
