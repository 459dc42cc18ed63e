use std::sync::OnceLock;

use crate::rng::splitmix64;

use super::Color;

pub const MAX_SIZE: usize = 25;

/// Fixed seed for the Zobrist table; hashes are stable across runs and platforms.
const ZOBRIST_SEED: u64 = 0x676F_6261_6E5F_7A62;

fn table() -> &'static [[u64; 2]] {
    static TABLE: OnceLock<Vec<[u64; 2]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut state = ZOBRIST_SEED;
        (0..MAX_SIZE * MAX_SIZE)
            .map(|_| [splitmix64(&mut state), splitmix64(&mut state)])
            .collect()
    })
}

/// Key for a stone of `color` at row-major point `p` on a `size` board.
pub fn point_key(size: usize, p: usize, color: Color) -> u64 {
    let (x, y) = (p % size, p / size);
    table()[y * MAX_SIZE + x][color as usize]
}
