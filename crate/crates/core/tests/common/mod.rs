//! Independent reference implementations used as test oracles. None of
//! these call into the code they check.
#![allow(dead_code)]

use std::collections::HashSet;
use std::f64::consts::PI;

use gazego_core::goban::tromp_taylor_score;
use gazego_core::{BoardState, Color, Move};
use nalgebra::{DMatrix, DVector};

pub const EMPTY: u8 = 0;
pub const BLACK: u8 = 1;
pub const WHITE: u8 = 2;

pub fn cell(c: Option<Color>) -> u8 {
    match c {
        None => EMPTY,
        Some(Color::Black) => BLACK,
        Some(Color::White) => WHITE,
    }
}

pub fn color_code(c: Color) -> u8 {
    cell(Some(c))
}

pub fn grid_of(board: &BoardState) -> Vec<u8> {
    board.grid().iter().map(|&c| cell(c)).collect()
}

fn neighbours(size: usize, p: usize) -> Vec<usize> {
    let (x, y) = (p % size, p / size);
    let mut out = Vec::with_capacity(4);
    if x > 0 {
        out.push(p - 1);
    }
    if x + 1 < size {
        out.push(p + 1);
    }
    if y > 0 {
        out.push(p - size);
    }
    if y + 1 < size {
        out.push(p + size);
    }
    out
}

/// Stones of the group at `p` and whether it has a liberty.
pub fn flood_group(grid: &[u8], size: usize, p: usize) -> (Vec<usize>, bool) {
    let color = grid[p];
    let mut seen = vec![false; grid.len()];
    let mut stack = vec![p];
    let mut stones = Vec::new();
    let mut liberty = false;
    seen[p] = true;
    while let Some(q) = stack.pop() {
        stones.push(q);
        for n in neighbours(size, q) {
            if grid[n] == EMPTY {
                liberty = true;
            } else if grid[n] == color && !seen[n] {
                seen[n] = true;
                stack.push(n);
            }
        }
    }
    (stones, liberty)
}

pub fn all_groups_have_liberties(grid: &[u8], size: usize) -> bool {
    (0..grid.len()).filter(|&p| grid[p] != EMPTY).all(|p| flood_group(grid, size, p).1)
}

/// Plays `color` at `p` under suicide-forbidden positional superko rules.
pub fn oracle_play(
    grid: &[u8],
    size: usize,
    p: usize,
    color: u8,
    history: &HashSet<Vec<u8>>,
) -> Result<(Vec<u8>, usize), &'static str> {
    if grid[p] != EMPTY {
        return Err("Occupied");
    }
    let opponent = if color == BLACK { WHITE } else { BLACK };
    let mut g = grid.to_vec();
    g[p] = color;
    let mut captured = 0;
    for n in neighbours(size, p) {
        if g[n] == opponent {
            let (stones, liberty) = flood_group(&g, size, n);
            if !liberty {
                captured += stones.len();
                for s in stones {
                    g[s] = EMPTY;
                }
            }
        }
    }
    if !flood_group(&g, size, p).1 {
        return Err("Suicide");
    }
    if history.contains(&g) {
        return Err("Superko");
    }
    Ok((g, captured))
}

/// Pearson correlation between `x` and its least-squares projection onto
/// the span of `refs`, after centring everything.
pub fn projection_correlation(x: &[f64], refs: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let centre = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        DVector::from_iterator(v.len(), v.iter().map(|a| a - m))
    };
    let xv = centre(x);
    if xv.norm() == 0.0 {
        return 0.0;
    }
    let mut y = DMatrix::zeros(n, refs.len());
    for (j, r) in refs.iter().enumerate() {
        y.set_column(j, &centre(r));
    }
    let beta = y.clone().svd(true, true).solve(&xv, 1e-12).expect("svd solve");
    let xhat = &y * beta;
    if xhat.norm() == 0.0 {
        return 0.0;
    }
    (xv.dot(&xhat) / (xv.norm() * xhat.norm())).clamp(0.0, 1.0)
}

/// Sine and cosine at each of the first `n_harmonics` multiples of `freq_hz`.
pub fn sinusoid_refs(freq_hz: f64, n_harmonics: usize, n: usize, fs: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for h in 1..=n_harmonics {
        let w = 2.0 * PI * h as f64 * freq_hz / fs;
        out.push((0..n).map(|i| (w * i as f64).sin()).collect());
        out.push((0..n).map(|i| (w * i as f64).cos()).collect());
    }
    out
}

/// 5x5, Black to move: a six-stone White block whose only liberty is (2,3).
pub const CAPTURE_PUZZLE: &str = "\
.XXX.
XOOOX
XOOOX
.X.X.
.....
";

pub const CAPTURE_POINT: Move = Move::Play { x: 2, y: 3 };

/// Black move maximising the worst-case Tromp-Taylor margin after White's
/// best reply, with the runner-up value.
pub fn depth2_best(board: &BoardState, komi: f64) -> (Move, f64, f64) {
    let mut scored: Vec<(Move, f64)> = Vec::new();
    for m in legal_by_try_play(board) {
        let after = board.play(m).unwrap();
        let value = if after.is_game_over() {
            tromp_taylor_score(&after, komi).margin()
        } else {
            legal_by_try_play(&after)
                .into_iter()
                .map(|r| tromp_taylor_score(&after.play(r).unwrap(), komi).margin())
                .fold(f64::INFINITY, f64::min)
        };
        scored.push((m, value));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    (scored[0].0, scored[0].1, scored.get(1).map_or(f64::NEG_INFINITY, |s| s.1))
}

pub fn legal_by_try_play(board: &BoardState) -> Vec<Move> {
    let size = board.size();
    let mut out: Vec<Move> = (0..size * size)
        .map(|p| Move::play(p % size, p / size))
        .filter(|&m| board.play(m).is_ok())
        .collect();
    if !board.is_game_over() {
        out.push(Move::Pass);
    }
    out
}
