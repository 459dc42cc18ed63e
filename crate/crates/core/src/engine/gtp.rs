//! GTP v2 over a line-oriented byte stream: a client for driving external
//! engines and a minimal engine loop that exposes the built-in UCT search.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use thiserror::Error;

use crate::goban::{BoardState, Color, Move};
use crate::rng;

use super::{genmove, EngineConfig};

const COLUMNS: &[u8] = b"ABCDEFGHJKLMNOPQRSTUVWXYZ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GtpError {
    #[error("malformed GTP response: {0}")]
    ProtocolError(String),
    #[error("engine reported failure: {0}")]
    EngineFailure(String),
    #[error("GTP transport closed")]
    TransportClosed,
    #[error("GTP transport I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GtpError {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::BrokenPipe | std::io::ErrorKind::UnexpectedEof => GtpError::TransportClosed,
            _ => GtpError::Io(e.to_string()),
        }
    }
}

/// `D4` style vertex. Columns skip `I`; rank 1 is the bottom row.
pub fn format_vertex(mv: Move, size: usize) -> String {
    match mv {
        Move::Play { x, y } => {
            let col = COLUMNS.get(x).map_or('?', |&c| c as char);
            format!("{}{}", col, size.saturating_sub(y))
        }
        Move::Pass => "pass".to_string(),
        Move::Resign => "resign".to_string(),
    }
}

pub fn parse_vertex(text: &str, size: usize) -> Result<Move, GtpError> {
    let t = text.trim().to_ascii_uppercase();
    match t.as_str() {
        "PASS" => return Ok(Move::Pass),
        "RESIGN" => return Ok(Move::Resign),
        _ => {}
    }
    let bad = || GtpError::ProtocolError(format!("bad vertex `{text}`"));
    let mut chars = t.chars();
    let col = chars.next().ok_or_else(bad)?;
    let x = COLUMNS.iter().position(|&c| c as char == col).ok_or_else(bad)?;
    let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
    if x >= size || rank < 1 || rank > size {
        return Err(bad());
    }
    Ok(Move::Play { x, y: size - rank })
}

/// Parses one complete response (without the terminating blank line).
/// Returns the payload of a success response.
pub fn parse_response(text: &str, expected_id: Option<u32>) -> Result<String, GtpError> {
    let text = text.trim_start_matches(['\n', '\r']);
    let (ok, rest) = match text.chars().next() {
        Some('=') => (true, &text[1..]),
        Some('?') => (false, &text[1..]),
        _ => return Err(GtpError::ProtocolError(format!("response must start with `=` or `?`: {text:?}"))),
    };
    let digits = rest.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let id: u32 = rest[..digits].parse().map_err(|_| GtpError::ProtocolError("bad response id".into()))?;
        if let Some(expected) = expected_id {
            if id != expected {
                return Err(GtpError::ProtocolError(format!("response id {id} does not match command id {expected}")));
            }
        }
    }
    let payload = rest[digits..].trim().to_string();
    if ok {
        Ok(payload)
    } else {
        Err(GtpError::EngineFailure(payload))
    }
}

pub struct GtpClient<R, W> {
    reader: R,
    writer: W,
    next_id: u32,
    size: usize,
}

impl<R: BufRead, W: Write> GtpClient<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self { reader, writer, next_id: 1, size: 19 }
    }

    pub fn board_size(&self) -> usize {
        self.size
    }

    /// Sends `id name args...` and returns the success payload.
    pub fn command(&mut self, name: &str, args: &[&str]) -> Result<String, GtpError> {
        let id = self.next_id;
        self.next_id += 1;
        let mut line = format!("{id} {name}");
        for a in args {
            line.push(' ');
            line.push_str(a);
        }
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;

        let mut response = String::new();
        loop {
            let mut l = String::new();
            if self.reader.read_line(&mut l)? == 0 {
                if response.is_empty() {
                    return Err(GtpError::TransportClosed);
                }
                break;
            }
            let trimmed = l.trim_end_matches(['\n', '\r']);
            if trimmed.is_empty() {
                if response.is_empty() {
                    continue;
                }
                break;
            }
            if !response.is_empty() {
                response.push('\n');
            }
            response.push_str(trimmed);
        }
        parse_response(&response, Some(id))
    }

    pub fn clear(&mut self, size: usize, komi: f64) -> Result<(), GtpError> {
        self.command("boardsize", &[&size.to_string()])?;
        self.size = size;
        self.command("clear_board", &[])?;
        self.command("komi", &[&komi.to_string()])?;
        Ok(())
    }

    pub fn play(&mut self, color: Color, mv: Move) -> Result<(), GtpError> {
        let vertex = format_vertex(mv, self.size);
        self.command("play", &[color.as_str(), &vertex])?;
        Ok(())
    }

    pub fn genmove(&mut self, color: Color) -> Result<Move, GtpError> {
        let payload = self.command("genmove", &[color.as_str()])?;
        parse_vertex(&payload, self.size)
    }

    pub fn quit(&mut self) -> Result<(), GtpError> {
        self.command("quit", &[]).map(|_| ())
    }
}

pub type ProcessClient = GtpClient<BufReader<ChildStdout>, ChildStdin>;

/// Starts an engine process speaking GTP on stdio.
pub fn spawn(program: &str, args: &[&str]) -> Result<(ProcessClient, Child), GtpError> {
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;
    let stdin = child.stdin.take().ok_or(GtpError::TransportClosed)?;
    let stdout = child.stdout.take().ok_or(GtpError::TransportClosed)?;
    Ok((GtpClient::new(BufReader::new(stdout), stdin), child))
}

const KNOWN: &[&str] = &[
    "protocol_version",
    "name",
    "version",
    "known_command",
    "list_commands",
    "boardsize",
    "komi",
    "clear_board",
    "play",
    "genmove",
    "showboard",
    "quit",
];

/// Runs the built-in engine as a GTP v2 engine until `quit` or EOF.
pub fn serve<R: BufRead, W: Write>(mut reader: R, mut writer: W, cfg: &EngineConfig) -> std::io::Result<()> {
    let mut cfg = cfg.clone();
    let mut board = BoardState::new(19).expect("19 is a valid size");
    let mut move_no = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let cleaned: String = line.split('#').next().unwrap_or("").chars().filter(|c| *c != '\r').collect();
        let mut words = cleaned.split_whitespace().peekable();
        let id = match words.peek() {
            Some(w) if w.chars().all(|c| c.is_ascii_digit()) => words.next().map(str::to_string),
            _ => None,
        };
        let Some(name) = words.next() else { continue };
        let args: Vec<&str> = words.collect();
        let reply: Result<String, String> = match name {
            "protocol_version" => Ok("2".into()),
            "name" => Ok("gazego".into()),
            "version" => Ok(env!("CARGO_PKG_VERSION").into()),
            "known_command" => Ok(KNOWN.contains(&args.first().copied().unwrap_or("")).to_string()),
            "list_commands" => Ok(KNOWN.join("\n")),
            "boardsize" => match args.first().and_then(|s| s.parse::<usize>().ok()).map(BoardState::new) {
                Some(Ok(b)) => {
                    board = b;
                    move_no = 0;
                    Ok(String::new())
                }
                _ => Err("unacceptable size".into()),
            },
            "clear_board" => {
                board = BoardState::new(board.size()).expect("current size is valid");
                move_no = 0;
                Ok(String::new())
            }
            "komi" => match args.first().and_then(|s| s.parse::<f64>().ok()) {
                Some(k) => {
                    cfg.komi = k;
                    Ok(String::new())
                }
                None => Err("syntax error".into()),
            },
            "play" => gtp_play(&board, &args).map(|b| {
                board = b;
                move_no += 1;
                String::new()
            }),
            "genmove" => match args.first().and_then(|c| c.parse::<Color>().ok()) {
                Some(color) => {
                    if color != board.to_move() {
                        board = board.play(Move::Pass).unwrap_or(board);
                    }
                    let search = EngineConfig { seed: rng::derive_seed(cfg.seed, "gtp", move_no), ..cfg.clone() };
                    match genmove(&board, &search) {
                        Ok(r) => {
                            board = board.play(r.best).expect("engine move is legal");
                            move_no += 1;
                            Ok(format_vertex(r.best, board.size()))
                        }
                        Err(e) => Err(e.to_string()),
                    }
                }
                None => Err("syntax error".into()),
            },
            "showboard" => Ok(format!("\n{}", board.to_text().trim_end())),
            "quit" => {
                write_reply(&mut writer, id.as_deref(), Ok(String::new()))?;
                return Ok(());
            }
            _ => Err("unknown command".into()),
        };
        write_reply(&mut writer, id.as_deref(), reply)?;
    }
}

fn gtp_play(board: &BoardState, args: &[&str]) -> Result<BoardState, String> {
    let (Some(color), Some(vertex)) = (args.first(), args.get(1)) else {
        return Err("syntax error".into());
    };
    let color: Color = color.parse().map_err(|_| "syntax error".to_string())?;
    let mv = parse_vertex(vertex, board.size()).map_err(|_| "syntax error".to_string())?;
    // Out-of-turn plays are accepted by inserting a pass.
    let base = if color != board.to_move() {
        board.play(Move::Pass).map_err(|_| "illegal move".to_string())?
    } else {
        board.clone()
    };
    base.play(mv).map_err(|_| "illegal move".to_string())
}

fn write_reply<W: Write>(w: &mut W, id: Option<&str>, reply: Result<String, String>) -> std::io::Result<()> {
    let (mark, body) = match reply {
        Ok(b) => ('=', b),
        Err(b) => ('?', b),
    };
    let id = id.unwrap_or("");
    if body.is_empty() {
        write!(w, "{mark}{id}\n\n")?;
    } else {
        write!(w, "{mark}{id} {body}\n\n")?;
    }
    w.flush()
}
