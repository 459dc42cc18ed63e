//! The five-symbol board-control alphabet and its flicker-frequency code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A decoded navigation command. Declaration order is the canonical class
/// order used by score vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Up,
    Down,
    Left,
    Right,
    Select,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Up,
        Command::Down,
        Command::Left,
        Command::Right,
        Command::Select,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Up => "up",
            Command::Down => "down",
            Command::Left => "left",
            Command::Right => "right",
            Command::Select => "select",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown command `{0}`")]
pub struct UnknownCommand(pub String);

impl FromStr for Command {
    type Err = UnknownCommand;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Command::Up),
            "down" => Ok(Command::Down),
            "left" => Ok(Command::Left),
            "right" => Ok(Command::Right),
            "select" => Ok(Command::Select),
            other => Err(UnknownCommand(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StimulusError {
    #[error("stimulus frequency for {0} must be positive and finite")]
    NonPositive(Command),
    #[error("stimulus frequencies for {0} and {1} are closer than 0.5 Hz")]
    TooClose(Command, Command),
    #[error("harmonic {harmonic} of {command} ({freq_hz} Hz) is not below Nyquist ({nyquist_hz} Hz)")]
    AboveNyquist {
        command: Command,
        harmonic: usize,
        freq_hz: f64,
        nyquist_hz: f64,
    },
}

/// Flicker frequency assigned to each command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusTable {
    freqs_hz: [f64; 5],
}

pub const MIN_SEPARATION_HZ: f64 = 0.5;

impl Default for StimulusTable {
    fn default() -> Self {
        Self {
            freqs_hz: [8.0, 9.0, 10.0, 11.0, 12.0],
        }
    }
}

impl StimulusTable {
    /// Builds a table from frequencies in [`Command::ALL`] order.
    pub fn new(freqs_hz: [f64; 5]) -> Result<Self, StimulusError> {
        for (i, &f) in freqs_hz.iter().enumerate() {
            if !(f.is_finite() && f > 0.0) {
                return Err(StimulusError::NonPositive(Command::ALL[i]));
            }
        }
        for i in 0..5 {
            for j in (i + 1)..5 {
                if (freqs_hz[i] - freqs_hz[j]).abs() < MIN_SEPARATION_HZ {
                    return Err(StimulusError::TooClose(Command::ALL[i], Command::ALL[j]));
                }
            }
        }
        Ok(Self { freqs_hz })
    }

    pub fn frequency(&self, command: Command) -> f64 {
        self.freqs_hz[command.index()]
    }

    pub fn min_frequency(&self) -> f64 {
        self.freqs_hz.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_frequency(&self) -> f64 {
        self.freqs_hz.iter().copied().fold(0.0, f64::max)
    }

    /// Commands ordered by ascending frequency; the tie-break order for argmax.
    pub fn by_frequency(&self) -> [Command; 5] {
        let mut order = Command::ALL;
        order.sort_by(|a, b| self.frequency(*a).total_cmp(&self.frequency(*b)));
        order
    }

    /// Checks that every harmonic up to `n_harmonics` stays below Nyquist.
    pub fn check_nyquist(&self, sample_rate_hz: f64, n_harmonics: usize) -> Result<(), StimulusError> {
        let nyquist_hz = sample_rate_hz / 2.0;
        for command in Command::ALL {
            let freq_hz = self.frequency(command) * n_harmonics as f64;
            if freq_hz >= nyquist_hz {
                return Err(StimulusError::AboveNyquist {
                    command,
                    harmonic: n_harmonics,
                    freq_hz,
                    nyquist_hz,
                });
            }
        }
        Ok(())
    }
}
