//! Fuzzy game-situation assessment: five trapezoidal memberships over
//! Black's winrate, a simulation-count confidence gate and median smoothing.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GameSituationLabel {
    #[serde(rename = "W++")]
    WhiteObvious,
    #[serde(rename = "W+")]
    WhitePossible,
    #[serde(rename = "U")]
    Uncertain,
    #[serde(rename = "B+")]
    BlackPossible,
    #[serde(rename = "B++")]
    BlackObvious,
}

use GameSituationLabel as L;

impl GameSituationLabel {
    /// Increasing Black advantage.
    pub const ALL: [GameSituationLabel; 5] = [L::WhiteObvious, L::WhitePossible, L::Uncertain, L::BlackPossible, L::BlackObvious];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(i: usize) -> Self {
        Self::ALL[i.min(4)]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            L::WhiteObvious => "W++",
            L::WhitePossible => "W+",
            L::Uncertain => "U",
            L::BlackPossible => "B+",
            L::BlackObvious => "B++",
        }
    }

    pub fn mirror(self) -> Self {
        Self::from_ordinal(4 - self.ordinal())
    }

    /// One step toward `U`.
    fn toward_uncertain(self) -> Self {
        match self {
            L::BlackObvious => L::BlackPossible,
            L::WhiteObvious => L::WhitePossible,
            other => other,
        }
    }

    fn distance_from_uncertain(self) -> usize {
        self.ordinal().abs_diff(2)
    }
}

impl fmt::Display for GameSituationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn mirror(label: GameSituationLabel) -> GameSituationLabel {
    label.mirror()
}

/// Trapezoid `a <= b <= c <= d`: 0 outside `[a, d]`, 1 on `[b, c]`. An edge
/// with `a == b` (or `c == d`) is a shoulder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapezoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Support `[lo, hi]` with a flat core on its middle half.
    pub fn centered(lo: f64, hi: f64) -> Self {
        let q = (hi - lo) / 4.0;
        Self::new(lo, lo + q, hi - q, hi)
    }

    pub fn membership(&self, w: f64) -> f64 {
        if w < self.a || w > self.d {
            0.0
        } else if w < self.b {
            (w - self.a) / (self.b - self.a)
        } else if w <= self.c {
            1.0
        } else {
            (self.d - w) / (self.d - self.c)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessorConfig {
    /// Memberships in [`GameSituationLabel::ALL`] order.
    pub memberships: [Trapezoid; 5],
    pub min_sims: u64,
    pub smoothing_window: usize,
}

impl Default for AssessorConfig {
    fn default() -> Self {
        // The outer labels are shoulders so the ends of [0, 1] stay covered.
        let w_plus_plus = Trapezoid::centered(0.0, 0.25);
        let b_plus_plus = Trapezoid::centered(0.75, 1.0);
        Self {
            memberships: [
                Trapezoid::new(0.0, 0.0, w_plus_plus.c, w_plus_plus.d),
                Trapezoid::centered(0.15, 0.45),
                Trapezoid::centered(0.35, 0.65),
                Trapezoid::centered(0.55, 0.85),
                Trapezoid::new(b_plus_plus.a, b_plus_plus.b, 1.0, 1.0),
            ],
            min_sims: 1000,
            smoothing_window: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssessorError {
    #[error("invalid assessor config: {0}")]
    InvalidConfig(String),
}

/// Memberships closer than this are treated as tied.
const TIE_EPS: f64 = 1e-9;

impl AssessorConfig {
    pub fn validate(&self) -> Result<(), AssessorError> {
        let bad = |m: &str| Err(AssessorError::InvalidConfig(m.to_string()));
        if self.smoothing_window.is_multiple_of(2) {
            return bad("smoothing_window must be odd");
        }
        for t in &self.memberships {
            if !(t.a <= t.b && t.b <= t.c && t.c <= t.d) || ![t.a, t.b, t.c, t.d].iter().all(|v| v.is_finite()) {
                return bad("trapezoid breakpoints must be ordered");
            }
        }
        if self.memberships.windows(2).any(|p| p[0].b > p[1].b || p[0].c > p[1].c) {
            return bad("label cores must increase with winrate");
        }
        for i in 0..=1000 {
            let w = i as f64 / 1000.0;
            if self.memberships.iter().all(|t| t.membership(w) <= 0.0) {
                return bad("memberships must cover [0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSample {
    pub move_no: u32,
    pub black_winrate: f64,
    pub simulations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub label: GameSituationLabel,
    pub memberships: [(GameSituationLabel, f64); 5],
}

pub fn assess(sample: &EvalSample, cfg: &AssessorConfig) -> Assessment {
    let w = sample.black_winrate.clamp(0.0, 1.0);
    let memberships = std::array::from_fn(|i| (L::ALL[i], cfg.memberships[i].membership(w)));
    let mut best = L::Uncertain;
    let mut best_mu = f64::NEG_INFINITY;
    for &(label, mu) in &memberships {
        let better = mu > best_mu + TIE_EPS
            || ((mu - best_mu).abs() <= TIE_EPS && label.distance_from_uncertain() < best.distance_from_uncertain());
        if better {
            best = label;
            best_mu = mu;
        }
    }
    let label = if sample.simulations < cfg.min_sims { best.toward_uncertain() } else { best };
    Assessment { label, memberships }
}

/// Per-sample labels followed by a median filter over label ordinals with
/// edge replication.
pub fn assess_series(samples: &[EvalSample], cfg: &AssessorConfig) -> Vec<GameSituationLabel> {
    let raw: Vec<GameSituationLabel> = samples.iter().map(|s| assess(s, cfg).label).collect();
    median_smooth(&raw, cfg.smoothing_window)
}

pub fn median_smooth(labels: &[GameSituationLabel], window: usize) -> Vec<GameSituationLabel> {
    if labels.is_empty() {
        return Vec::new();
    }
    let half = (window.max(1) / 2) as isize;
    let last = labels.len() as isize - 1;
    (0..labels.len() as isize)
        .map(|i| {
            let mut ords: Vec<usize> = (i - half..=i + half).map(|j| labels[j.clamp(0, last) as usize].ordinal()).collect();
            ords.sort_unstable();
            L::from_ordinal(ords[ords.len() / 2])
        })
        .collect()
}

pub const TIMELINE_CSV_HEADER: &str = "move_no,black_winrate,simulations,label";

pub fn timeline_csv(samples: &[EvalSample], labels: &[GameSituationLabel]) -> String {
    let mut out = String::from(TIMELINE_CSV_HEADER);
    out.push('\n');
    for (s, l) in samples.iter().zip(labels) {
        let _ = writeln!(out, "{},{:.4},{},{}", s.move_no, s.black_winrate, s.simulations, l);
    }
    out
}
