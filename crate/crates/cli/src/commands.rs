use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use gazego_client::{Client, WsParams};
use gazego_core::assessor::{assess_series, timeline_csv};
use gazego_core::decoder::{benchmark, operating_point, write_bench_csv};
use gazego_core::engine::gtp;
use gazego_core::goban::from_sgf;
use gazego_core::pipeline::{parse_gaze_script, replay_record, run_simulate};
use gazego_core::protocol::parse_frame;
use gazego_core::{AssessorConfig, Command, DecoderConfig, Frame, Move, StimulusTable};
use gazego_server::ServerConfig;
use tokio::io::{AsyncBufReadExt, BufReader};

use crate::config::Opts;

/// Accuracy the operating point has to reach.
const OPERATING_ACCURACY: f64 = 0.9;
const DEFAULT_BENCH_TRIALS: usize = 1000;

const EXIT_PARSE: u8 = 2;
const EXIT_GATE: u8 = 3;

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

/// Writes to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

pub fn serve(opts: &Opts) -> anyhow::Result<ExitCode> {
    let addr: SocketAddr = opts.addr().parse().with_context(|| format!("bad --addr `{}`", opts.addr()))?;
    let cfg = ServerConfig { defaults: opts.session()?, ..ServerConfig::default() };
    runtime()?.block_on(gazego_server::serve(addr, cfg))?;
    Ok(ExitCode::SUCCESS)
}

/// Output file paths for simulate: `dir/game.sgf` etc. when `out` is a
/// directory, `out.sgf` etc. otherwise.
fn simulate_paths(out: Option<&Path>) -> [PathBuf; 3] {
    let out = out.unwrap_or(Path::new("."));
    let as_dir = out.is_dir() || out.as_os_str().to_string_lossy().ends_with('/');
    if as_dir {
        ["game.sgf", "frames.jsonl", "assessment.csv"].map(|f| out.join(f))
    } else {
        let base = out.as_os_str().to_string_lossy().into_owned();
        [".sgf", ".frames.jsonl", ".assessment.csv"].map(|ext| PathBuf::from(format!("{base}{ext}")))
    }
}

pub fn simulate(script: &Path, opts: &Opts) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(script).with_context(|| format!("reading {}", script.display()))?;
    let intents = match parse_gaze_script(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {}: {e}", script.display());
            return Ok(ExitCode::from(EXIT_PARSE));
        }
    };
    let cfg = opts.simulate()?;
    let out = run_simulate(&intents, &cfg)?;
    let [sgf, frames, csv] = simulate_paths(opts.out.as_deref());
    if let Some(dir) = sgf.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    emit(Some(&sgf), &out.sgf())?;
    emit(Some(&frames), &out.frames_jsonl())?;
    emit(Some(&csv), &out.assessment_csv(&cfg.session.assessor))?;
    if !out.gate_open {
        eprintln!("error: impedance gate stayed closed; see {}", frames.display());
        return Ok(ExitCode::from(EXIT_GATE));
    }
    if out.stalled_intents > 0 {
        eprintln!("warning: {} intent(s) produced no command", out.stalled_intents);
    }
    eprintln!("{} moves, result {}", out.record.moves.len(), out.record.result.as_deref().unwrap_or("unfinished"));
    Ok(ExitCode::SUCCESS)
}

pub fn bench(opts: &Opts) -> anyhow::Result<ExitCode> {
    let grid = opts.bench_grid();
    let trials = opts.trials.unwrap_or(DEFAULT_BENCH_TRIALS);
    let rows = benchmark(&StimulusTable::default(), &DecoderConfig::default(), &grid, trials, opts.seed.unwrap_or(0))?;
    emit(opts.out.as_deref(), &write_bench_csv(&rows))?;
    for &method in &grid.methods {
        for &window_s in &grid.window_s {
            match operating_point(&rows, method, window_s, OPERATING_ACCURACY) {
                Some(r) => eprintln!(
                    "{} {window_s} s: lowest SNR reaching {OPERATING_ACCURACY}: {} dB (accuracy {:.3}, {:.1} bit/min)",
                    method.as_str(),
                    r.snr_db,
                    r.accuracy,
                    r.itr_bits_per_min
                ),
                None => eprintln!("{} {window_s} s: no SNR reaches {OPERATING_ACCURACY}", method.as_str()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn replay(path: &Path, opts: &Opts) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let record = match from_sgf(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return Ok(ExitCode::from(EXIT_PARSE));
        }
    };
    let mut engine = opts.engine();
    if opts.komi.is_none() {
        engine.komi = record.komi;
    }
    let samples = match replay_record(&record, &engine) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return Ok(ExitCode::from(EXIT_PARSE));
        }
    };
    let labels = assess_series(&samples, &AssessorConfig::default());
    emit(opts.out.as_deref(), &timeline_csv(&samples, &labels))?;
    Ok(ExitCode::SUCCESS)
}

pub fn gtp(opts: &Opts) -> anyhow::Result<ExitCode> {
    let stdin = std::io::stdin();
    gtp::serve(stdin.lock(), std::io::stdout().lock(), &opts.engine())?;
    Ok(ExitCode::SUCCESS)
}

/// One stdin line: a raw JSON frame, a command word, `pass` or `resign`.
fn frame_from_line(line: &str, human: gazego_core::Color) -> Result<Frame, String> {
    let line = line.trim();
    if line.starts_with('{') {
        return parse_frame(line).map_err(|e| e.message);
    }
    match line {
        "pass" => Ok(Frame::MovePlayed { color: human, mv: Move::Pass, move_no: 0, captures: 0 }),
        "resign" => Ok(Frame::MovePlayed { color: human, mv: Move::Resign, move_no: 0, captures: 0 }),
        word => word
            .parse::<Command>()
            .map(|command| Frame::Command { command })
            .map_err(|_| format!("expected up, down, left, right, select, pass, resign or a JSON frame, got `{word}`")),
    }
}

pub fn play(opts: &Opts) -> anyhow::Result<ExitCode> {
    let session = opts.session()?;
    let kohm = opts.reported_impedance()?;
    let client = Client::new(format!("http://{}", opts.addr()));
    let params = WsParams {
        session_id: None,
        mode: opts.mode,
        human_color: opts.human_color,
        board_size: opts.board_size,
        seed: opts.seed,
    };
    runtime()?.block_on(async move {
        let mut ws = client.connect(&params).await.context("connecting")?;
        ws.send(&Frame::ImpedanceReport { kohm }).await?;
        let mut lines = BufReader::new(tokio::io::stdin()).lines();
        let mut stdin_open = true;
        loop {
            tokio::select! {
                frame = ws.recv() => match frame? {
                    Some(f) => {
                        println!("{}", f.to_text());
                        if matches!(f, Frame::GameOver { .. }) {
                            break;
                        }
                    }
                    None => break,
                },
                line = lines.next_line(), if stdin_open => match line? {
                    Some(l) if l.trim().is_empty() => {}
                    Some(l) => match frame_from_line(&l, session.human_color) {
                        Ok(f) => ws.send(&f).await?,
                        Err(e) => eprintln!("{e}"),
                    },
                    None => {
                        stdin_open = false;
                        ws.start_close().await?;
                    }
                },
            }
        }
        if stdin_open {
            ws.close().await.ok();
        }
        anyhow::Ok(ExitCode::SUCCESS)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gazego_core::Color;

    #[test]
    fn stdin_lines() {
        assert_eq!(frame_from_line(" up ", Color::Black).unwrap(), Frame::Command { command: Command::Up });
        assert!(matches!(frame_from_line("pass", Color::White).unwrap(), Frame::MovePlayed { color: Color::White, mv: Move::Pass, .. }));
        assert!(matches!(frame_from_line(r#"{"type":"gaze","target":"none"}"#, Color::Black).unwrap(), Frame::Gaze { target: None }));
        assert!(frame_from_line("diagonal", Color::Black).is_err());
    }

    #[test]
    fn output_paths() {
        let dir = tempfile::tempdir().unwrap();
        let [sgf, _, csv] = simulate_paths(Some(dir.path()));
        assert_eq!(sgf, dir.path().join("game.sgf"));
        assert_eq!(csv, dir.path().join("assessment.csv"));
        let [sgf, frames, _] = simulate_paths(Some(&dir.path().join("run1")));
        assert_eq!(sgf, dir.path().join("run1.sgf"));
        assert_eq!(frames, dir.path().join("run1.frames.jsonl"));
    }
}
