//! Five-class SSVEP decoding: per-window class scores (periodogram or CCA),
//! argmax classification and debounced command emission.

mod bench;
mod cca;
mod psd;
mod smooth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::{Command, StimulusError, StimulusTable};
use crate::synth::SignalWindow;

pub use bench::{benchmark, operating_point, wolpaw_itr, write_bench_csv, BenchGrid, BenchRow};
pub use cca::{canonical_correlation, cca_scores, reference_signals, CCA_REGULARIZATION};
pub use psd::psd_scores;
pub use smooth::{smooth_decide, Debouncer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Psd,
    Cca,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Psd => "psd",
            Method::Cca => "cca",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psd" => Ok(Method::Psd),
            "cca" => Ok(Method::Cca),
            other => Err(format!("unknown decoding method `{other}` (expected psd or cca)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub method: Method,
    pub n_harmonics: usize,
    pub decision_threshold: f64,
    pub margin: f64,
    pub consecutive_required: usize,
    pub refractory_s: f64,
    pub detrend: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            method: Method::Cca,
            n_harmonics: 2,
            decision_threshold: 0.35,
            margin: 0.05,
            consecutive_required: 2,
            refractory_s: 1.0,
            detrend: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("window has {got} samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },
    #[error("window is malformed: {0}")]
    MalformedWindow(String),
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("invalid decoder config: {0}")]
    InvalidConfig(String),
    #[error("invalid benchmark grid: {0}")]
    InvalidGrid(String),
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<(), DecodeError> {
        let unit = 0.0..=1.0;
        if self.consecutive_required < 1 {
            return Err(DecodeError::InvalidConfig("consecutive_required must be >= 1".into()));
        }
        if self.n_harmonics < 1 {
            return Err(DecodeError::InvalidConfig("n_harmonics must be >= 1".into()));
        }
        if !unit.contains(&self.decision_threshold) || !unit.contains(&self.margin) {
            return Err(DecodeError::InvalidConfig("thresholds must lie in [0, 1]".into()));
        }
        if !(self.refractory_s.is_finite() && self.refractory_s >= 0.0) {
            return Err(DecodeError::InvalidConfig("refractory_s must be non-negative".into()));
        }
        Ok(())
    }
}

/// One score per command, in [`Command::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores(pub [f64; 5]);

impl ClassScores {
    pub fn get(&self, command: Command) -> f64 {
        self.0[command.index()]
    }

    pub fn uniform(value: f64) -> Self {
        Self([value; 5])
    }

    pub fn to_map(&self) -> BTreeMap<Command, f64> {
        Command::ALL.iter().map(|&c| (c, self.get(c))).collect()
    }

    /// Argmax with ties going to the lowest stimulus frequency, plus the
    /// runner-up score.
    pub fn ranked(&self, stim: &StimulusTable) -> (Command, f64, f64) {
        let order = stim.by_frequency();
        let mut best = order[0];
        for &c in &order[1..] {
            if self.get(c) > self.get(best) {
                best = c;
            }
        }
        let runner_up = order
            .iter()
            .filter(|&&c| c != best)
            .map(|&c| self.get(c))
            .fold(f64::NEG_INFINITY, f64::max);
        (best, self.get(best), runner_up)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub window_id: u64,
    pub scores: BTreeMap<Command, f64>,
    pub predicted: Command,
    pub confidence: f64,
}

impl Classification {
    pub fn top_score(&self) -> f64 {
        self.scores.get(&self.predicted).copied().unwrap_or(0.0)
    }

    pub fn from_scores(window_id: u64, scores: ClassScores, stim: &StimulusTable) -> Self {
        let (predicted, top, runner_up) = scores.ranked(stim);
        Self {
            window_id,
            scores: scores.to_map(),
            predicted,
            confidence: (top - runner_up).clamp(0.0, 1.0),
        }
    }
}

/// Structural checks shared by both scoring methods.
pub(crate) fn check_window(window: &SignalWindow, stim: &StimulusTable, n_harmonics: usize) -> Result<(), DecodeError> {
    if window.channels.is_empty() {
        return Err(DecodeError::MalformedWindow("no channels".into()));
    }
    if !(window.sample_rate_hz.is_finite() && window.sample_rate_hz > 0.0) {
        return Err(DecodeError::MalformedWindow("sample rate must be positive".into()));
    }
    let n = window.channels[0].samples.len();
    if window.channels.iter().any(|c| c.samples.len() != n) {
        return Err(DecodeError::MalformedWindow("channels differ in length".into()));
    }
    if window.channels.iter().flat_map(|c| &c.samples).any(|s| !s.is_finite()) {
        return Err(DecodeError::MalformedWindow("non-finite sample".into()));
    }
    let need = (2.0 * window.sample_rate_hz / stim.min_frequency()).ceil() as usize;
    if n < need {
        return Err(DecodeError::WindowTooShort { got: n, need });
    }
    stim.check_nyquist(window.sample_rate_hz, n_harmonics)?;
    Ok(())
}

pub fn classify(window: &SignalWindow, stim: &StimulusTable, cfg: &DecoderConfig) -> Result<Classification, DecodeError> {
    cfg.validate()?;
    let scores = match cfg.method {
        Method::Psd => psd_scores(window, stim, cfg.n_harmonics)?,
        Method::Cca => cca_scores(window, stim, cfg.n_harmonics, cfg.detrend)?,
    };
    Ok(Classification::from_scores(window.window_id, scores, stim))
}
