use super::{BoardState, Color};

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub black_points: f64,
    pub white_points: f64,
    /// `B+3.5`, `W+7.5` or `Draw`.
    pub result: String,
}

impl Score {
    /// Black minus White, komi included.
    pub fn margin(&self) -> f64 {
        self.black_points - self.white_points
    }

    pub fn winner(&self) -> Option<Color> {
        let m = self.margin();
        if m > 0.0 {
            Some(Color::Black)
        } else if m < 0.0 {
            Some(Color::White)
        } else {
            None
        }
    }
}

pub fn format_result(margin: f64) -> String {
    if margin > 0.0 {
        format!("B+{margin}")
    } else if margin < 0.0 {
        format!("W+{}", -margin)
    } else {
        "Draw".to_string()
    }
}

/// Area score of a row-major grid: stones plus empty regions that reach
/// only one color. Komi is added to White.
pub fn area_score(size: usize, grid: &[Option<Color>], komi: f64) -> Score {
    let mut black = 0usize;
    let mut white = 0usize;
    let mut seen = vec![false; grid.len()];
    let mut stack = Vec::new();
    for start in 0..grid.len() {
        match grid[start] {
            Some(Color::Black) => black += 1,
            Some(Color::White) => white += 1,
            None if !seen[start] => {
                let (mut region, mut touches_black, mut touches_white) = (0usize, false, false);
                seen[start] = true;
                stack.push(start);
                while let Some(p) = stack.pop() {
                    region += 1;
                    let (x, y) = (p % size, p / size);
                    let nbrs = [
                        (y > 0).then(|| p - size),
                        (y + 1 < size).then(|| p + size),
                        (x > 0).then(|| p - 1),
                        (x + 1 < size).then(|| p + 1),
                    ];
                    for n in nbrs.into_iter().flatten() {
                        match grid[n] {
                            Some(Color::Black) => touches_black = true,
                            Some(Color::White) => touches_white = true,
                            None if !seen[n] => {
                                seen[n] = true;
                                stack.push(n);
                            }
                            None => {}
                        }
                    }
                }
                match (touches_black, touches_white) {
                    (true, false) => black += region,
                    (false, true) => white += region,
                    _ => {}
                }
            }
            None => {}
        }
    }
    let black_points = black as f64;
    let white_points = white as f64 + komi;
    Score { black_points, white_points, result: format_result(black_points - white_points) }
}

pub fn tromp_taylor_score(board: &BoardState, komi: f64) -> Score {
    area_score(board.size(), board.grid(), komi)
}
