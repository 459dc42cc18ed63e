use std::collections::VecDeque;

use crate::command::Command;

use super::{Classification, DecoderConfig};

/// Emits `c` iff the last `consecutive_required` classifications all predict
/// `c` with top score >= threshold and confidence >= margin, and nothing was
/// emitted within the refractory period before `now_s`.
pub fn smooth_decide(
    history: &[Classification],
    cfg: &DecoderConfig,
    now_s: f64,
    last_emit_s: Option<f64>,
) -> Option<Command> {
    let need = cfg.consecutive_required.max(1);
    if history.len() < need {
        return None;
    }
    if let Some(t) = last_emit_s {
        if now_s - t < cfg.refractory_s {
            return None;
        }
    }
    let tail = &history[history.len() - need..];
    let candidate = tail[0].predicted;
    let agreed = tail.iter().all(|c| {
        c.predicted == candidate && c.top_score() >= cfg.decision_threshold && c.confidence >= cfg.margin
    });
    agreed.then_some(candidate)
}

/// Stream owner for [`smooth_decide`]: keeps the recent history and the last
/// emission time. History is cleared on emission so each command consumes
/// its own run of windows.
#[derive(Debug, Clone, Default)]
pub struct Debouncer {
    history: VecDeque<Classification>,
    last_emit_s: Option<f64>,
}

impl Debouncer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_emit_s(&self) -> Option<f64> {
        self.last_emit_s
    }

    pub fn push(&mut self, classification: Classification, cfg: &DecoderConfig, now_s: f64) -> Option<Command> {
        self.history.push_back(classification);
        while self.history.len() > cfg.consecutive_required.max(1) {
            self.history.pop_front();
        }
        let history = self.history.make_contiguous();
        let out = smooth_decide(history, cfg, now_s, self.last_emit_s);
        if out.is_some() {
            self.last_emit_s = Some(now_s);
            self.history.clear();
        }
        out
    }
}
