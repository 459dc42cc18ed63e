//! Five-command cursor control: four arrows move a cursor, `Select` proposes
//! a play at it.

use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::goban::{BoardState, Move};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CursorState {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Top,
    Bottom,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NavOutcome {
    Moved(CursorState),
    Blocked { edge: Edge },
    Proposed(Move),
    /// `reason` is the goban rule name, e.g. `Occupied`.
    Rejected { reason: &'static str },
}

/// Centre point, rounding down.
pub fn initial_cursor(size: usize) -> CursorState {
    let c = size.saturating_sub(1) / 2;
    CursorState { x: c, y: c }
}

pub fn apply_command(cursor: CursorState, command: Command, board: &BoardState) -> NavOutcome {
    let last = board.size() - 1;
    let CursorState { x, y } = cursor;
    let moved = |x, y| NavOutcome::Moved(CursorState { x, y });
    match command {
        Command::Up if y == 0 => NavOutcome::Blocked { edge: Edge::Top },
        Command::Up => moved(x, y - 1),
        Command::Down if y >= last => NavOutcome::Blocked { edge: Edge::Bottom },
        Command::Down => moved(x, y + 1),
        Command::Left if x == 0 => NavOutcome::Blocked { edge: Edge::Left },
        Command::Left => moved(x - 1, y),
        Command::Right if x >= last => NavOutcome::Blocked { edge: Edge::Right },
        Command::Right => moved(x + 1, y),
        Command::Select => {
            let mv = Move::play(x, y);
            match board.play(mv) {
                Ok(_) => NavOutcome::Proposed(mv),
                Err(e) => NavOutcome::Rejected { reason: e.rule_name() },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_examples() {
        let board = BoardState::new(19).unwrap();
        assert_eq!(apply_command(CursorState { x: 9, y: 9 }, Command::Up, &board), NavOutcome::Moved(CursorState { x: 9, y: 8 }));
        assert_eq!(apply_command(CursorState { x: 0, y: 5 }, Command::Left, &board), NavOutcome::Blocked { edge: Edge::Left });
        let occupied = board.play(Move::play(4, 4)).unwrap();
        assert_eq!(
            apply_command(CursorState { x: 4, y: 4 }, Command::Select, &occupied),
            NavOutcome::Rejected { reason: "Occupied" }
        );
        assert_eq!(apply_command(CursorState { x: 3, y: 3 }, Command::Select, &board), NavOutcome::Proposed(Move::play(3, 3)));
    }

    #[test]
    fn initial_cursor_examples() {
        assert_eq!(initial_cursor(19), CursorState { x: 9, y: 9 });
        assert_eq!(initial_cursor(9), CursorState { x: 4, y: 4 });
        assert_eq!(initial_cursor(2), CursorState { x: 0, y: 0 });
        assert_eq!(initial_cursor(1), CursorState { x: 0, y: 0 });
    }

    #[test]
    fn all_edges_block() {
        let board = BoardState::new(3).unwrap();
        assert_eq!(apply_command(CursorState { x: 1, y: 0 }, Command::Up, &board), NavOutcome::Blocked { edge: Edge::Top });
        assert_eq!(apply_command(CursorState { x: 1, y: 2 }, Command::Down, &board), NavOutcome::Blocked { edge: Edge::Bottom });
        assert_eq!(apply_command(CursorState { x: 2, y: 1 }, Command::Right, &board), NavOutcome::Blocked { edge: Edge::Right });
    }
}
