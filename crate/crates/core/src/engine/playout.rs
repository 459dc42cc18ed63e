//! Mutable padded board for random playouts. Tracks groups with pseudo
//! liberties (count, sum and sum of squares of liberty indices) so atari and
//! capture checks are O(1). Uses simple ko only; superko is enforced in the
//! tree, not here.

use rand::Rng;

use crate::goban::{area_score, BoardState, Color};

const EMPTY: u8 = 0;
const BLACK: u8 = 1;
const WHITE: u8 = 2;
const EDGE: u8 = 3;

const NONE: u32 = u32::MAX;

fn stone(c: Color) -> u8 {
    match c {
        Color::Black => BLACK,
        Color::White => WHITE,
    }
}

#[derive(Clone, Copy, Default)]
struct Libs {
    count: u32,
    sum: u64,
    sum_sq: u64,
}

impl Libs {
    fn add(&mut self, p: usize) {
        self.count += 1;
        self.sum += p as u64;
        self.sum_sq += (p * p) as u64;
    }

    fn remove(&mut self, p: usize) {
        self.count -= 1;
        self.sum -= p as u64;
        self.sum_sq -= (p * p) as u64;
    }

    fn merge(&mut self, o: Libs) {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    /// All pseudo liberties are the same point.
    fn in_atari(&self) -> bool {
        self.count > 0 && self.sum * self.sum == self.count as u64 * self.sum_sq
    }
}

#[derive(Clone)]
pub(crate) struct PlayoutBoard {
    size: usize,
    stride: usize,
    cells: Vec<u8>,
    /// Group representative per stone.
    head: Vec<u32>,
    /// Circular linked list of stones per group.
    next: Vec<u32>,
    libs: Vec<Libs>,
    empties: Vec<u32>,
    empty_pos: Vec<u32>,
    to_move: Color,
    ko: Option<usize>,
    passes: u8,
}

impl PlayoutBoard {
    pub fn from_board(board: &BoardState) -> Self {
        let size = board.size();
        let stride = size + 2;
        let n = stride * stride;
        let mut b = PlayoutBoard {
            size,
            stride,
            cells: vec![EDGE; n],
            head: vec![NONE; n],
            next: vec![NONE; n],
            libs: vec![Libs::default(); n],
            empties: Vec::with_capacity(size * size),
            empty_pos: vec![NONE; n],
            to_move: board.to_move(),
            ko: None,
            passes: board.consecutive_passes(),
        };
        for y in 0..size {
            for x in 0..size {
                let p = b.idx(x, y);
                match board.get(x, y) {
                    None => {
                        b.cells[p] = EMPTY;
                        b.push_empty(p);
                    }
                    Some(c) => b.cells[p] = stone(c),
                }
            }
        }
        for y in 0..size {
            for x in 0..size {
                let p = b.idx(x, y);
                if b.cells[p] == BLACK || b.cells[p] == WHITE {
                    b.head[p] = p as u32;
                    b.next[p] = p as u32;
                    let mut l = Libs::default();
                    for q in b.nbrs(p) {
                        if b.cells[q] == EMPTY {
                            l.add(q);
                        }
                    }
                    b.libs[p] = l;
                }
            }
        }
        for y in 0..size {
            for x in 0..size {
                let p = b.idx(x, y);
                let c = b.cells[p];
                if c == BLACK || c == WHITE {
                    for q in b.nbrs(p) {
                        if b.cells[q] == c && b.head[q] != b.head[p] {
                            b.merge(b.head[p] as usize, b.head[q] as usize);
                        }
                    }
                }
            }
        }
        b
    }

    fn idx(&self, x: usize, y: usize) -> usize {
        (y + 1) * self.stride + x + 1
    }

    fn nbrs(&self, p: usize) -> [usize; 4] {
        [p - self.stride, p + self.stride, p - 1, p + 1]
    }

    fn diags(&self, p: usize) -> [usize; 4] {
        [p - self.stride - 1, p - self.stride + 1, p + self.stride - 1, p + self.stride + 1]
    }

    fn push_empty(&mut self, p: usize) {
        self.empty_pos[p] = self.empties.len() as u32;
        self.empties.push(p as u32);
    }

    fn remove_empty(&mut self, p: usize) {
        let i = self.empty_pos[p] as usize;
        let last = *self.empties.last().expect("empty list underflow");
        self.empties[i] = last;
        self.empty_pos[last as usize] = i as u32;
        self.empties.pop();
        self.empty_pos[p] = NONE;
    }

    /// Merges group `b` into group `a` (both heads).
    fn merge(&mut self, a: usize, b: usize) {
        let (a, b) = if self.group_len(a) >= self.group_len(b) { (a, b) } else { (b, a) };
        let mut s = b;
        loop {
            self.head[s] = a as u32;
            s = self.next[s] as usize;
            if s == b {
                break;
            }
        }
        self.next.swap(a, b);
        let lb = self.libs[b];
        self.libs[a].merge(lb);
    }

    fn group_len(&self, h: usize) -> usize {
        let mut n = 1;
        let mut s = self.next[h] as usize;
        while s != h {
            n += 1;
            s = self.next[s] as usize;
        }
        n
    }

    /// True single-point eye of `color`: all orthogonal neighbours own or
    /// edge, and at most one enemy diagonal (none when touching the edge).
    fn is_eye(&self, p: usize, color: u8) -> bool {
        if self.nbrs(p).iter().any(|&q| self.cells[q] != color && self.cells[q] != EDGE) {
            return false;
        }
        let enemy = if color == BLACK { WHITE } else { BLACK };
        let mut enemies = 0;
        let mut edge = false;
        for q in self.diags(p) {
            match self.cells[q] {
                EDGE => edge = true,
                c if c == enemy => enemies += 1,
                _ => {}
            }
        }
        if edge {
            enemies == 0
        } else {
            enemies <= 1
        }
    }

    fn is_legal(&self, p: usize, color: u8) -> bool {
        if self.cells[p] != EMPTY || self.ko == Some(p) {
            return false;
        }
        for q in self.nbrs(p) {
            let c = self.cells[q];
            if c == EMPTY {
                return true;
            }
            if c == EDGE {
                continue;
            }
            let l = &self.libs[self.head[q] as usize];
            let atari = l.in_atari();
            if c == color && !atari {
                return true;
            }
            if c != color && atari {
                return true;
            }
        }
        false
    }

    fn remove_group(&mut self, h: usize) -> usize {
        let mut removed = 0;
        let mut s = h;
        loop {
            let nxt = self.next[s] as usize;
            self.cells[s] = EMPTY;
            self.head[s] = NONE;
            self.next[s] = NONE;
            self.push_empty(s);
            removed += 1;
            s = nxt;
            if s == h {
                break;
            }
        }
        // Second pass: the freed points become liberties of adjacent groups.
        let mut s = self.empties.len() - removed;
        while s < self.empties.len() {
            let p = self.empties[s] as usize;
            for q in self.nbrs(p) {
                if self.head[q] != NONE {
                    let hq = self.head[q] as usize;
                    self.libs[hq].add(p);
                }
            }
            s += 1;
        }
        removed
    }

    fn place(&mut self, p: usize, color: u8) {
        self.cells[p] = color;
        self.remove_empty(p);
        self.head[p] = p as u32;
        self.next[p] = p as u32;
        let mut l = Libs::default();
        for q in self.nbrs(p) {
            if self.cells[q] == EMPTY {
                l.add(q);
            }
        }
        self.libs[p] = l;
        let enemy = if color == BLACK { WHITE } else { BLACK };
        let mut captured_single = None;
        let mut captured_total = 0;
        for q in self.nbrs(p) {
            let c = self.cells[q];
            if c == BLACK || c == WHITE {
                let hq = self.head[q] as usize;
                self.libs[hq].remove(p);
                if c == color {
                    let hp = self.head[p] as usize;
                    if hq != hp {
                        self.merge(hp, hq);
                    }
                } else if c == enemy && self.libs[hq].count == 0 {
                    let n = self.remove_group(hq);
                    captured_total += n;
                    if n == 1 {
                        captured_single = Some(q);
                    }
                }
            }
        }
        self.ko = None;
        if captured_total == 1 {
            let h = self.head[p] as usize;
            if self.group_len(h) == 1 && self.libs[h].count == 1 {
                self.ko = captured_single;
            }
        }
    }

    fn pass(&mut self) {
        self.passes += 1;
        self.ko = None;
        self.to_move = self.to_move.opponent();
    }

    /// Plays a uniformly random legal non-eye-filling move, or passes.
    fn random_move<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let color = stone(self.to_move);
        let mut remaining = self.empties.len();
        while remaining > 0 {
            let i = rng.random_range(0..remaining);
            let p = self.empties[i] as usize;
            if self.is_legal(p, color) && !self.is_eye(p, color) {
                self.place(p, color);
                self.passes = 0;
                self.to_move = self.to_move.opponent();
                return;
            }
            remaining -= 1;
            self.empties.swap(i, remaining);
            let (a, b) = (self.empties[i] as usize, self.empties[remaining] as usize);
            self.empty_pos[a] = i as u32;
            self.empty_pos[b] = remaining as u32;
        }
        self.pass();
    }

    /// Plays out to two passes or `max_moves`, returning Black-minus-White
    /// area score margin (komi included).
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R, max_moves: usize, komi: f64) -> f64 {
        let mut moves = 0;
        while self.passes < 2 && moves < max_moves {
            self.random_move(rng);
            moves += 1;
        }
        self.score(komi)
    }

    pub fn score(&self, komi: f64) -> f64 {
        let grid: Vec<Option<Color>> = (0..self.size * self.size)
            .map(|i| match self.cells[self.idx(i % self.size, i / self.size)] {
                BLACK => Some(Color::Black),
                WHITE => Some(Color::White),
                _ => None,
            })
            .collect();
        area_score(self.size, &grid, komi).margin()
    }

    #[cfg(test)]
    pub fn grid_string(&self) -> String {
        (0..self.size * self.size)
            .map(|i| match self.cells[self.idx(i % self.size, i / self.size)] {
                BLACK => 'X',
                WHITE => 'O',
                _ => '.',
            })
            .collect()
    }

    #[cfg(test)]
    pub fn play_xy(&mut self, x: usize, y: usize) -> bool {
        let p = self.idx(x, y);
        let color = stone(self.to_move);
        if !self.is_legal(p, color) {
            return false;
        }
        self.place(p, color);
        self.passes = 0;
        self.to_move = self.to_move.opponent();
        true
    }

    #[cfg(test)]
    pub fn eye_at(&self, x: usize, y: usize, color: Color) -> bool {
        self.is_eye(self.idx(x, y), stone(color))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goban::Move;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_rules_engine_on_random_games() {
        // Random legal games via the rules engine; the playout board must
        // reproduce every resulting grid (captures included).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let mut board = BoardState::new(7).unwrap();
            let mut fast = PlayoutBoard::from_board(&board);
            for _ in 0..120 {
                let plays: Vec<Move> = board.legal_moves().into_iter().filter(|m| matches!(m, Move::Play { .. })).collect();
                if plays.is_empty() {
                    break;
                }
                let mv = plays[rng.random_range(0..plays.len())];
                let Move::Play { x, y } = mv else { unreachable!() };
                board = board.play(mv).unwrap();
                assert!(fast.play_xy(x, y), "fast board rejected ({x},{y})\n{board}");
                assert_eq!(fast.grid_string(), board.grid_string());
                // Rebuilding from scratch must agree with incremental state.
                let rebuilt = PlayoutBoard::from_board(&board);
                assert_eq!(rebuilt.grid_string(), fast.grid_string());
            }
        }
    }

    #[test]
    fn eye_detection() {
        let b = BoardState::from_text(".X...\nXX...\n.....\n.....\n.....", Color::Black).unwrap();
        let fast = PlayoutBoard::from_board(&b);
        assert!(fast.eye_at(0, 0, Color::Black));
        assert!(!fast.eye_at(0, 0, Color::White));
        let b = BoardState::from_text(".X...\nXO...\n.....\n.....\n.....", Color::Black).unwrap();
        assert!(!PlayoutBoard::from_board(&b).eye_at(0, 0, Color::Black), "edge eye with enemy diagonal is false");
        let b = BoardState::from_text(".....\n.OX..\n.X.X.\n..X..\n.....", Color::Black).unwrap();
        assert!(PlayoutBoard::from_board(&b).eye_at(2, 2, Color::Black), "one enemy diagonal allowed in the centre");
    }

    #[test]
    fn playouts_terminate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = BoardState::new(9).unwrap();
        for _ in 0..50 {
            let mut fast = PlayoutBoard::from_board(&b);
            let margin = fast.run(&mut rng, 162, 7.5);
            assert!(margin.abs() <= 81.0 + 7.5);
            assert!(fast.passes >= 2 || fast.empties.len() < 81);
        }
    }
}
