//! `gazego`: run the service, simulate scripted games, benchmark the
//! decoder, replay SGF files through the engine, or play remotely.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Opts;

#[derive(Parser)]
#[command(name = "gazego", version, about = "Gaze-controlled Go over synthetic SSVEP")]
struct Cli {
    /// Optional `key = value` file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Start the WebSocket/HTTP server
    Serve,
    /// Play a gaze script in-process; writes SGF, frame log and assessment CSV
    Simulate {
        /// One intent per line: up, down, left, right, select; `#` comments
        script: PathBuf,
    },
    /// Decoder accuracy sweep over SNR, window length and method
    #[command(name = "bench-decoder", alias = "bench")]
    BenchDecoder,
    /// Evaluate every position of an SGF game; writes the assessment timeline
    Replay { sgf: PathBuf },
    /// Connect to a running server and play from stdin
    Play,
    /// Run the engine as a GTP v2 engine on stdin/stdout
    Gtp,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let opts = match &cli.config {
        Some(path) => match cli.opts.clone().merge_file(path) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
        },
        None => cli.opts.clone(),
    };
    let result = match cli.command {
        Cmd::Serve => commands::serve(&opts),
        Cmd::Simulate { script } => commands::simulate(&script, &opts),
        Cmd::BenchDecoder => commands::bench(&opts),
        Cmd::Replay { sgf } => commands::replay(&sgf, &opts),
        Cmd::Play => commands::play(&opts),
        Cmd::Gtp => commands::gtp(&opts),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
