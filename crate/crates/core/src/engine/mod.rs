//! Move generation: a seedable single-threaded UCT search with random
//! playouts, plus a GTP client for attaching external engines.
//!
//! The playout budget is the strength knob. Search is deterministic for a
//! fixed seed.

pub mod gtp;
mod playout;
mod uct;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goban::{BoardState, Move};

pub use uct::genmove;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub playouts: u32,
    pub exploration_c: f64,
    pub komi: f64,
    pub seed: u64,
    /// Cap on random playout length; `None` means `2 * size^2`.
    pub max_playout_moves: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { playouts: 10_000, exploration_c: 1.4, komi: 7.5, seed: 0, max_playout_moves: None }
    }
}

impl EngineConfig {
    pub fn playout_cap(&self, size: usize) -> usize {
        self.max_playout_moves.unwrap_or(2 * size * size)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("the game is over")]
    GameOver,
    #[error("playout budget must be at least 1")]
    InvalidBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    #[serde(with = "crate::protocol::move_serde")]
    pub mv: Move,
    /// Win probability for the side to move at the root.
    pub winrate: f64,
    pub visits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    #[serde(with = "crate::protocol::move_serde")]
    pub best: Move,
    /// Root children, most visited first.
    pub suggestions: Vec<Suggestion>,
    pub total_simulations: u32,
}

impl SearchResult {
    /// Root winrate for the side to move: the mean over every simulation,
    /// i.e. the visit-weighted mean of the children.
    pub fn winrate(&self) -> f64 {
        let visits: u64 = self.suggestions.iter().map(|s| u64::from(s.visits)).sum();
        if visits == 0 {
            return 0.5;
        }
        let wins: f64 = self.suggestions.iter().map(|s| s.winrate * f64::from(s.visits)).sum();
        (wins / visits as f64).clamp(0.0, 1.0)
    }
}

pub fn set_strength(cfg: &EngineConfig, playouts: u32) -> Result<EngineConfig, EngineError> {
    if playouts < 1 {
        return Err(EngineError::InvalidBudget);
    }
    Ok(EngineConfig { playouts, ..cfg.clone() })
}

/// First `min(k, len)` suggestions in their stored order.
pub fn top_suggestions(result: &SearchResult, k: usize) -> &[Suggestion] {
    &result.suggestions[..k.min(result.suggestions.len())]
}

/// Plays `black` against `white` from `board` until the game ends or
/// `max_moves` moves are made. Seeds are offset by move number.
pub fn self_play(
    board: &BoardState,
    black: &EngineConfig,
    white: &EngineConfig,
    max_moves: usize,
) -> Result<(BoardState, Vec<Move>), EngineError> {
    let mut board = board.clone();
    let mut moves = Vec::new();
    while !board.is_game_over() && moves.len() < max_moves {
        let base = match board.to_move() {
            crate::goban::Color::Black => black,
            crate::goban::Color::White => white,
        };
        let cfg = EngineConfig { seed: crate::rng::derive_seed(base.seed, "self-play", moves.len() as u64), ..base.clone() };
        let result = genmove(&board, &cfg)?;
        board = board.play(result.best).expect("engine returned an illegal move");
        moves.push(result.best);
    }
    Ok((board, moves))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_strength_changes_only_budget() {
        let cfg = EngineConfig::default();
        let weak = set_strength(&cfg, 100).unwrap();
        assert_eq!(weak.playouts, 100);
        assert_eq!(EngineConfig { playouts: cfg.playouts, ..weak }, cfg);
        assert_eq!(set_strength(&cfg, 0), Err(EngineError::InvalidBudget));
    }

    #[test]
    fn top_suggestions_slices() {
        let board = BoardState::new(5).unwrap();
        let r = genmove(&board, &EngineConfig { playouts: 300, ..EngineConfig::default() }).unwrap();
        assert_eq!(top_suggestions(&r, 1)[0].mv, r.best);
        assert_eq!(top_suggestions(&r, 1000).len(), r.suggestions.len());
        let top3 = top_suggestions(&r, 3);
        assert!(top3.windows(2).all(|w| w[0].visits >= w[1].visits));
    }
}
