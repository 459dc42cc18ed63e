//! Go rules: legality with captures, suicide prohibition and positional
//! superko, Tromp-Taylor area scoring, and SGF game records.
//!
//! [`BoardState`] is an immutable value. [`BoardState::play`] returns a new
//! state and never touches its input. Coordinates are `x` = column (left to
//! right) and `y` = row (top to bottom).

mod score;
mod sgf;
mod zobrist;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use score::{area_score, tromp_taylor_score, Score};
pub use sgf::{from_sgf, to_sgf, GameRecord, SgfError};
pub use zobrist::{point_key, MAX_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn opponent(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Black => "black",
            Color::White => "white",
        }
    }

    pub fn sgf_letter(self) -> char {
        match self {
            Color::Black => 'B',
            Color::White => 'W',
        }
    }
}

impl std::str::FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "black" | "b" => Ok(Color::Black),
            "white" | "w" => Ok(Color::White),
            other => Err(format!("unknown color `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Play { x: usize, y: usize },
    Pass,
    Resign,
}

impl Move {
    pub fn play(x: usize, y: usize) -> Self {
        Move::Play { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoError {
    #[error("point ({x}, {y}) is already occupied")]
    Occupied { x: usize, y: usize },
    #[error("playing at ({x}, {y}) would leave the stone without liberties")]
    Suicide { x: usize, y: usize },
    #[error("playing at ({x}, {y}) would repeat an earlier position")]
    Superko { x: usize, y: usize },
    #[error("point ({x}, {y}) is off a {size}x{size} board")]
    OutOfBounds { x: usize, y: usize, size: usize },
    #[error("the game is over")]
    GameOver,
    #[error("board size {0} is not supported (1..=25)")]
    InvalidSize(usize),
    #[error("invalid position: {0}")]
    InvalidPosition(String),
}

impl GoError {
    /// Name of the violated rule, as carried in protocol error messages.
    pub fn rule_name(&self) -> &'static str {
        match self {
            GoError::Occupied { .. } => "Occupied",
            GoError::Suicide { .. } => "Suicide",
            GoError::Superko { .. } => "Superko",
            GoError::OutOfBounds { .. } => "OutOfBounds",
            GoError::GameOver => "GameOver",
            GoError::InvalidSize(_) => "InvalidSize",
            GoError::InvalidPosition(_) => "InvalidPosition",
        }
    }
}

/// Stones removed and hash produced by a prospective play.
struct PlayPreview {
    captured: Vec<usize>,
    hash: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardState {
    size: usize,
    grid: Vec<Option<Color>>,
    to_move: Color,
    hash: u64,
    position_history: HashSet<u64>,
    captures_black: u32,
    captures_white: u32,
    consecutive_passes: u8,
    resigned: Option<Color>,
}

impl BoardState {
    pub fn new(size: usize) -> Result<Self, GoError> {
        if !(1..=MAX_SIZE).contains(&size) {
            return Err(GoError::InvalidSize(size));
        }
        Ok(Self::from_parts(size, vec![None; size * size], Color::Black))
    }

    fn from_parts(size: usize, grid: Vec<Option<Color>>, to_move: Color) -> Self {
        let hash = grid
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| point_key(size, i, c)))
            .fold(0, |h, k| h ^ k);
        Self {
            size,
            grid,
            to_move,
            hash,
            position_history: HashSet::from([hash]),
            captures_black: 0,
            captures_white: 0,
            consecutive_passes: 0,
            resigned: None,
        }
    }

    /// Arbitrary setup position with a fresh history. Rejects grids holding
    /// a group without liberties.
    pub fn from_grid(size: usize, grid: Vec<Option<Color>>, to_move: Color) -> Result<Self, GoError> {
        if !(1..=MAX_SIZE).contains(&size) {
            return Err(GoError::InvalidSize(size));
        }
        if grid.len() != size * size {
            return Err(GoError::InvalidPosition(format!("expected {} points, got {}", size * size, grid.len())));
        }
        let board = Self::from_parts(size, grid, to_move);
        if let Some(p) = board.first_dead_group() {
            return Err(GoError::InvalidPosition(format!(
                "group at ({}, {}) has no liberties",
                p % size,
                p / size
            )));
        }
        Ok(board)
    }

    /// Parses the `.XO` text dump, one row per line, top row first.
    pub fn from_text(text: &str, to_move: Color) -> Result<Self, GoError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let size = rows.len();
        let mut grid = Vec::with_capacity(size * size);
        for row in &rows {
            if row.chars().count() != size {
                return Err(GoError::InvalidPosition(format!("row `{row}` is not {size} points wide")));
            }
            for ch in row.chars() {
                grid.push(match ch {
                    '.' => None,
                    'X' => Some(Color::Black),
                    'O' => Some(Color::White),
                    other => return Err(GoError::InvalidPosition(format!("unexpected character `{other}`"))),
                });
            }
        }
        Self::from_grid(size, grid, to_move)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn to_move(&self) -> Color {
        self.to_move
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn position_history(&self) -> &HashSet<u64> {
        &self.position_history
    }

    pub fn grid(&self) -> &[Option<Color>] {
        &self.grid
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Color> {
        self.grid[y * self.size + x]
    }

    /// Stones captured by `color`.
    pub fn captures(&self, color: Color) -> u32 {
        match color {
            Color::Black => self.captures_black,
            Color::White => self.captures_white,
        }
    }

    pub fn consecutive_passes(&self) -> u8 {
        self.consecutive_passes
    }

    /// The color that resigned, if any.
    pub fn resigned(&self) -> Option<Color> {
        self.resigned
    }

    pub fn is_game_over(&self) -> bool {
        self.consecutive_passes >= 2 || self.resigned.is_some()
    }

    pub fn stones_on_board(&self) -> usize {
        self.grid.iter().filter(|c| c.is_some()).count()
    }

    /// Row-major `.XO` string without separators.
    pub fn grid_string(&self) -> String {
        self.grid
            .iter()
            .map(|c| match c {
                None => '.',
                Some(Color::Black) => 'X',
                Some(Color::White) => 'O',
            })
            .collect()
    }

    /// `.XO` dump, one line per row, top row first.
    pub fn to_text(&self) -> String {
        let flat = self.grid_string();
        let mut out = String::with_capacity(flat.len() + self.size);
        for row in flat.as_bytes().chunks(self.size) {
            out.push_str(std::str::from_utf8(row).unwrap_or_default());
            out.push('\n');
        }
        out
    }

    pub(crate) fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> {
        let size = self.size;
        let (x, y) = (p % size, p / size);
        [
            (y > 0).then(|| p - size),
            (y + 1 < size).then(|| p + size),
            (x > 0).then(|| p - 1),
            (x + 1 < size).then(|| p + 1),
        ]
        .into_iter()
        .flatten()
    }

    /// Collects the group containing `start` (colored `color`, or `start`
    /// treated as such) and reports whether it has a liberty other than `ignore`.
    fn group_has_liberty(&self, start: usize, color: Color, ignore: Option<usize>, group: &mut Vec<usize>, seen: &mut [bool]) -> bool {
        group.clear();
        let mut stack = vec![start];
        seen[start] = true;
        let mut has_liberty = false;
        while let Some(p) = stack.pop() {
            group.push(p);
            for n in self.neighbors(p) {
                if seen[n] {
                    continue;
                }
                match self.grid[n] {
                    None if Some(n) != ignore => has_liberty = true,
                    Some(c) if c == color => {
                        seen[n] = true;
                        stack.push(n);
                    }
                    _ => {}
                }
            }
        }
        has_liberty
    }

    fn first_dead_group(&self) -> Option<usize> {
        let mut seen = vec![false; self.grid.len()];
        let mut group = Vec::new();
        for p in 0..self.grid.len() {
            if let (Some(c), false) = (self.grid[p], seen[p]) {
                if !self.group_has_liberty(p, c, None, &mut group, &mut seen) {
                    return Some(p);
                }
            }
        }
        None
    }

    fn preview_play(&self, x: usize, y: usize) -> Result<PlayPreview, GoError> {
        if x >= self.size || y >= self.size {
            return Err(GoError::OutOfBounds { x, y, size: self.size });
        }
        let p = y * self.size + x;
        if self.grid[p].is_some() {
            return Err(GoError::Occupied { x, y });
        }
        let me = self.to_move;
        let opp = me.opponent();
        let mut seen = vec![false; self.grid.len()];
        let mut group = Vec::new();
        let mut captured = Vec::new();
        let mut own_liberty = false;
        for n in self.neighbors(p) {
            match self.grid[n] {
                None => own_liberty = true,
                Some(c) if c == opp => {
                    if !seen[n] && !self.group_has_liberty(n, opp, Some(p), &mut group, &mut seen) {
                        captured.extend_from_slice(&group);
                    }
                }
                Some(_) => {}
            }
        }
        if !own_liberty && captured.is_empty() {
            // Own neighbours join the new stone; the merged group needs an
            // outside liberty.
            let mut seen = vec![false; self.grid.len()];
            seen[p] = true;
            own_liberty = self.neighbors(p).any(|n| {
                self.grid[n] == Some(me) && !seen[n] && self.group_has_liberty(n, me, Some(p), &mut group, &mut seen)
            });
            if !own_liberty {
                return Err(GoError::Suicide { x, y });
            }
        }
        let mut hash = self.hash ^ point_key(self.size, p, me);
        for &c in &captured {
            hash ^= point_key(self.size, c, opp);
        }
        if self.position_history.contains(&hash) {
            return Err(GoError::Superko { x, y });
        }
        Ok(PlayPreview { captured, hash })
    }

    pub fn is_legal(&self, mv: Move) -> bool {
        match mv {
            _ if self.is_game_over() => false,
            Move::Play { x, y } => self.preview_play(x, y).is_ok(),
            Move::Pass | Move::Resign => true,
        }
    }

    pub fn play(&self, mv: Move) -> Result<BoardState, GoError> {
        if self.is_game_over() {
            return Err(GoError::GameOver);
        }
        let mut next = self.clone();
        match mv {
            Move::Play { x, y } => {
                let preview = self.preview_play(x, y)?;
                let me = self.to_move;
                next.grid[y * self.size + x] = Some(me);
                for &c in &preview.captured {
                    next.grid[c] = None;
                }
                let n = preview.captured.len() as u32;
                match me {
                    Color::Black => next.captures_black += n,
                    Color::White => next.captures_white += n,
                }
                next.hash = preview.hash;
                next.position_history.insert(preview.hash);
                next.consecutive_passes = 0;
            }
            Move::Pass => {
                next.consecutive_passes = (self.consecutive_passes + 1).min(2);
            }
            Move::Resign => {
                next.resigned = Some(self.to_move);
            }
        }
        next.to_move = self.to_move.opponent();
        Ok(next)
    }

    /// Every accepted play in point order, then `Pass`. Empty once the game is over.
    pub fn legal_moves(&self) -> Vec<Move> {
        if self.is_game_over() {
            return Vec::new();
        }
        let mut moves: Vec<Move> = (0..self.grid.len())
            .filter(|&p| self.grid[p].is_none())
            .map(|p| (p % self.size, p / self.size))
            .filter(|&(x, y)| self.preview_play(x, y).is_ok())
            .map(|(x, y)| Move::Play { x, y })
            .collect();
        moves.push(Move::Pass);
        moves
    }
}

impl fmt::Display for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn board(text: &str, to_move: Color) -> BoardState {
        BoardState::from_text(text, to_move).unwrap()
    }

    #[test]
    fn empty_board_play() {
        let b = BoardState::new(19).unwrap();
        let next = b.play(Move::play(3, 3)).unwrap();
        assert_eq!(next.get(3, 3), Some(Color::Black));
        assert_eq!(next.captures(Color::Black), 0);
        assert_eq!(next.to_move(), Color::White);
        assert_eq!(b.stones_on_board(), 0, "input must not be mutated");
    }

    #[test]
    fn corner_capture() {
        let b = board(
            "OX...
             .....
             .....
             .....
             .....",
            Color::Black,
        );
        let next = b.play(Move::play(0, 1)).unwrap();
        assert_eq!(next.get(0, 0), None);
        assert_eq!(next.captures(Color::Black), 1);
    }

    #[test]
    fn ko_recapture_is_superko() {
        // Black captures at (2,1); White retaking at (1,1) recreates the position.
        let b = board(
            ".XO..
             XO.O.
             .XO..
             .....
             .....",
            Color::Black,
        );
        let after = b.play(Move::play(2, 1)).unwrap();
        assert_eq!(after.get(1, 1), None);
        assert_eq!(after.play(Move::play(1, 1)), Err(GoError::Superko { x: 1, y: 1 }));
    }

    #[test]
    fn suicide_is_rejected() {
        let b = board(
            ".O...
             O....
             .....
             .....
             .....",
            Color::Black,
        );
        assert_eq!(b.play(Move::play(0, 0)), Err(GoError::Suicide { x: 0, y: 0 }));
        // Filling your own group's last liberty.
        let b = board(
            "X.O..
             XO...
             O....
             .....
             .....",
            Color::Black,
        );
        assert_eq!(b.play(Move::play(1, 0)), Err(GoError::Suicide { x: 1, y: 0 }));
    }

    #[test]
    fn occupied_out_of_bounds_and_game_over() {
        let b = BoardState::new(9).unwrap().play(Move::play(4, 4)).unwrap();
        assert_eq!(b.play(Move::play(4, 4)), Err(GoError::Occupied { x: 4, y: 4 }));
        assert_eq!(b.play(Move::play(9, 0)), Err(GoError::OutOfBounds { x: 9, y: 0, size: 9 }));
        let over = b.play(Move::Pass).unwrap().play(Move::Pass).unwrap();
        assert!(over.is_game_over());
        assert_eq!(over.play(Move::Pass), Err(GoError::GameOver));
        assert!(over.legal_moves().is_empty());
    }

    #[test]
    fn resign_ends_game() {
        let b = BoardState::new(9).unwrap().play(Move::Resign).unwrap();
        assert_eq!(b.resigned(), Some(Color::Black));
        assert!(b.is_game_over());
    }

    #[test]
    fn empty_nine_by_nine_has_82_moves() {
        let moves = BoardState::new(9).unwrap().legal_moves();
        assert_eq!(moves.len(), 82);
        assert_eq!(moves.last(), Some(&Move::Pass));
    }

    #[test]
    fn pass_keeps_history_consistent() {
        let b = BoardState::new(5).unwrap().play(Move::play(2, 2)).unwrap().play(Move::Pass).unwrap();
        assert!(b.position_history().contains(&b.hash()));
        assert_eq!(b.consecutive_passes(), 1);
        let b = b.play(Move::play(1, 1)).unwrap();
        assert_eq!(b.consecutive_passes(), 0);
    }

    #[test]
    fn text_round_trip() {
        let text = "X.O\n.X.\nO..\n";
        let b = board(text, Color::White);
        assert_eq!(b.to_text(), text);
        assert_eq!(b.grid_string(), "X.O.X.O..");
        assert!(BoardState::from_text("XO\nO.\n", Color::Black).is_err(), "dead black stone");
    }
}
