//! Shared flags, the optional `key = value` config file, and conversion into
//! the core configuration structs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser};
use gazego_core::decoder::BenchGrid;
use gazego_core::pipeline::SimulateConfig;
use gazego_core::protocol::Mode;
use gazego_core::{Color, EngineConfig, Method, SessionConfig};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

/// Flags accepted by every subcommand. Unset flags fall back to the config
/// file, then to the library defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Listen address (serve) or server address (play)
    #[arg(long, global = true)]
    pub addr: Option<String>,
    /// Root seed for every random stream
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Synthetic SNR in dB; bench accepts a comma-separated list
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr_db: Option<Vec<f64>>,
    /// Analysis window length in seconds; bench accepts a list
    #[arg(long, global = true, value_delimiter = ',')]
    pub window_s: Option<Vec<f64>>,
    /// Decoding method (psd or cca); bench accepts a list
    #[arg(long, global = true, value_delimiter = ',')]
    pub method: Option<Vec<Method>>,
    /// Engine playouts per move
    #[arg(long, global = true)]
    pub playouts: Option<u32>,
    #[arg(long, global = true)]
    pub board_size: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub komi: Option<f64>,
    /// competitive or predictive
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Colour played by the gaze user
    #[arg(long, global = true)]
    pub human_color: Option<Color>,
    /// Output path; simulate treats it as a directory if it exists or ends
    /// in `/`, otherwise as a file-name prefix
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Trials per bench cell
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Electrode impedance: `N` for every channel or `LABEL=N` pairs
    #[arg(long, global = true, value_delimiter = ',')]
    pub impedance_kohm: Option<Vec<String>>,
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct FileOpts {
    #[command(flatten)]
    opts: Opts,
}

impl Opts {
    /// Fills unset fields from `path`. Keys are flag names with `-` or `_`.
    pub fn merge_file(self, path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut argv = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`", path.display(), i + 1);
            };
            argv.push(format!("--{}={}", key.trim().replace('_', "-"), value.trim()));
        }
        let file = FileOpts::try_parse_from(argv).with_context(|| format!("in {}", path.display()))?.opts;
        Ok(Self {
            addr: self.addr.or(file.addr),
            seed: self.seed.or(file.seed),
            snr_db: self.snr_db.or(file.snr_db),
            window_s: self.window_s.or(file.window_s),
            method: self.method.or(file.method),
            playouts: self.playouts.or(file.playouts),
            board_size: self.board_size.or(file.board_size),
            komi: self.komi.or(file.komi),
            mode: self.mode.or(file.mode),
            human_color: self.human_color.or(file.human_color),
            out: self.out.or(file.out),
            trials: self.trials.or(file.trials),
            impedance_kohm: self.impedance_kohm.or(file.impedance_kohm),
        })
    }

    pub fn addr(&self) -> &str {
        self.addr.as_deref().unwrap_or(DEFAULT_ADDR)
    }

    fn single<T: Copy>(name: &str, values: &Option<Vec<T>>) -> anyhow::Result<Option<T>> {
        match values.as_deref() {
            None => Ok(None),
            Some([v]) => Ok(Some(*v)),
            Some(_) => bail!("--{name} takes a single value here"),
        }
    }

    pub fn engine(&self) -> EngineConfig {
        let mut e = EngineConfig::default();
        if let Some(p) = self.playouts {
            e.playouts = p;
        }
        if let Some(k) = self.komi {
            e.komi = k;
        }
        if let Some(s) = self.seed {
            e.seed = s;
        }
        e
    }

    pub fn session(&self) -> anyhow::Result<SessionConfig> {
        let mut cfg = SessionConfig { engine: self.engine(), ..SessionConfig::default() };
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(c) = self.human_color {
            cfg.human_color = c;
        }
        if let Some(n) = self.board_size {
            cfg.board_size = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(snr) = Self::single("snr-db", &self.snr_db)? {
            cfg.synth.snr_db = snr;
        }
        if let Some(w) = Self::single("window-s", &self.window_s)? {
            cfg.synth.window_s = w;
        }
        if let Some(m) = Self::single("method", &self.method)? {
            cfg.decoder.method = m;
        }
        Ok(cfg)
    }

    pub fn simulate(&self) -> anyhow::Result<SimulateConfig> {
        let session = self.session()?;
        let mut cfg = SimulateConfig::default();
        if let Some(specs) = &self.impedance_kohm {
            cfg.true_impedance_kohm = impedance_map(specs, &session.synth.channel_labels)?;
        }
        cfg.session = session;
        Ok(cfg)
    }

    /// Impedances reported by `play`; defaults to the simulate defaults.
    pub fn reported_impedance(&self) -> anyhow::Result<BTreeMap<String, f64>> {
        match &self.impedance_kohm {
            Some(specs) => impedance_map(specs, &self.session()?.synth.channel_labels),
            None => Ok(SimulateConfig::default().true_impedance_kohm),
        }
    }

    pub fn bench_grid(&self) -> BenchGrid {
        let mut grid = BenchGrid::default();
        if let Some(v) = &self.snr_db {
            grid.snr_db = v.clone();
        }
        if let Some(v) = &self.window_s {
            grid.window_s = v.clone();
        }
        if let Some(v) = &self.method {
            grid.methods = v.clone();
        }
        grid
    }
}

fn impedance_map(specs: &[String], labels: &[String]) -> anyhow::Result<BTreeMap<String, f64>> {
    let mut map: BTreeMap<String, f64> = BTreeMap::new();
    for spec in specs {
        match spec.split_once('=') {
            Some((label, v)) => {
                let label = label.trim();
                if !labels.iter().any(|l| l == label) {
                    bail!("unknown channel `{label}` in --impedance-kohm");
                }
                map.insert(label.to_string(), v.trim().parse().with_context(|| format!("bad impedance `{spec}`"))?);
            }
            None => {
                let v: f64 = spec.trim().parse().with_context(|| format!("bad impedance `{spec}`"))?;
                for l in labels {
                    map.insert(l.clone(), v);
                }
            }
        }
    }
    let defaults = SimulateConfig::default().true_impedance_kohm;
    for l in labels {
        if !map.contains_key(l) {
            map.insert(l.clone(), defaults.get(l).copied().unwrap_or(100.0));
        }
    }
    Ok(map)
}
