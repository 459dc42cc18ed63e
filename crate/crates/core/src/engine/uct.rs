use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::goban::{tromp_taylor_score, BoardState, Color, Move};

use super::playout::PlayoutBoard;
use super::{EngineConfig, EngineError, SearchResult, Suggestion};

struct Node {
    mv: Move,
    /// Player who made `mv`; `wins` is from this player's perspective.
    mover: Color,
    children: Vec<u32>,
    /// Not yet expanded moves, stored reversed so `pop` yields point order.
    untried: Option<Vec<Move>>,
    visits: u32,
    wins: f64,
}

impl Node {
    fn new(mv: Move, mover: Color) -> Self {
        Self { mv, mover, children: Vec::new(), untried: None, visits: 0, wins: 0.0 }
    }

    fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.wins / self.visits as f64
        }
    }
}

fn black_result(margin: f64) -> f64 {
    if margin > 0.0 {
        1.0
    } else if margin < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// UCT search from `board` with exactly `cfg.playouts` simulations.
///
/// Selection is UCB1 over expanded children; a node's untried moves are
/// expanded one per simulation in point order (Pass last) before any
/// child is revisited. Leaves are valued by one random playout scored
/// with Tromp-Taylor rules.
pub fn genmove(board: &BoardState, cfg: &EngineConfig) -> Result<SearchResult, EngineError> {
    if board.is_game_over() {
        return Err(EngineError::GameOver);
    }
    if cfg.playouts < 1 {
        return Err(EngineError::InvalidBudget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cap = cfg.playout_cap(board.size());
    let mut nodes = vec![Node::new(Move::Pass, board.to_move().opponent())];
    let mut path: Vec<u32> = Vec::with_capacity(64);

    for _ in 0..cfg.playouts {
        let mut b = board.clone();
        let mut node = 0usize;
        path.clear();
        path.push(0);
        while !b.is_game_over() {
            if nodes[node].untried.is_none() {
                let mut moves = b.legal_moves();
                moves.reverse();
                nodes[node].untried = Some(moves);
            }
            if let Some(mv) = nodes[node].untried.as_mut().and_then(Vec::pop) {
                b = b.play(mv).expect("generated move is legal");
                let child = nodes.len() as u32;
                nodes.push(Node::new(mv, b.to_move().opponent()));
                nodes[node].children.push(child);
                path.push(child);
                break;
            }
            let parent_visits = nodes[node].visits.max(1) as f64;
            let log_n = parent_visits.ln();
            let mut best = None;
            let mut best_value = f64::NEG_INFINITY;
            for &c in &nodes[node].children {
                let ch = &nodes[c as usize];
                let value = ch.mean() + cfg.exploration_c * (log_n / ch.visits as f64).sqrt();
                if value > best_value {
                    best_value = value;
                    best = Some(c);
                }
            }
            let Some(next) = best else { break };
            node = next as usize;
            b = b.play(nodes[node].mv).expect("tree move is legal");
            path.push(next);
        }

        let margin = if b.is_game_over() {
            tromp_taylor_score(&b, cfg.komi).margin()
        } else {
            PlayoutBoard::from_board(&b).run(&mut rng, cap, cfg.komi)
        };
        let r = black_result(margin);
        for &id in &path {
            let n = &mut nodes[id as usize];
            n.visits += 1;
            n.wins += if n.mover == Color::Black { r } else { 1.0 - r };
        }
    }

    let mut children: Vec<(usize, &Node)> = nodes[0].children.iter().enumerate().map(|(i, &c)| (i, &nodes[c as usize])).collect();
    children.sort_by(|(ia, a), (ib, b)| {
        b.visits
            .cmp(&a.visits)
            .then(b.mean().total_cmp(&a.mean()))
            .then(ia.cmp(ib))
    });
    let suggestions: Vec<Suggestion> = children
        .iter()
        .map(|(_, n)| Suggestion { mv: n.mv, winrate: n.mean().clamp(0.0, 1.0), visits: n.visits })
        .collect();
    Ok(SearchResult { best: suggestions[0].mv, suggestions, total_simulations: cfg.playouts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let board = BoardState::new(7).unwrap().play(Move::play(3, 3)).unwrap();
        let cfg = EngineConfig { playouts: 500, seed: 17, ..EngineConfig::default() };
        assert_eq!(genmove(&board, &cfg).unwrap(), genmove(&board, &cfg).unwrap());
    }

    #[test]
    fn budget_and_visit_accounting() {
        let board = BoardState::new(5).unwrap();
        let cfg = EngineConfig { playouts: 777, ..EngineConfig::default() };
        let r = genmove(&board, &cfg).unwrap();
        assert_eq!(r.total_simulations, 777);
        assert_eq!(r.suggestions.iter().map(|s| s.visits).sum::<u32>(), 777);
        assert_eq!(r.best, r.suggestions[0].mv);
        assert!(r.suggestions.windows(2).all(|w| w[0].visits >= w[1].visits));
        assert!(r.suggestions.iter().all(|s| (0.0..=1.0).contains(&s.winrate)));
        let legal = board.legal_moves();
        assert!(r.suggestions.iter().all(|s| legal.contains(&s.mv)));
    }

    #[test]
    fn single_playout_budget_works() {
        let r = genmove(&BoardState::new(3).unwrap(), &EngineConfig { playouts: 1, ..EngineConfig::default() }).unwrap();
        assert_eq!(r.suggestions.len(), 1);
        assert_eq!(r.best, Move::play(0, 0));
    }

    #[test]
    fn game_over_is_an_error() {
        let over = BoardState::new(5).unwrap().play(Move::Pass).unwrap().play(Move::Pass).unwrap();
        assert_eq!(genmove(&over, &EngineConfig::default()), Err(EngineError::GameOver));
    }

    #[test]
    fn only_legal_play_beats_losing_pass() {
        // White fills all but one point; Black's only legal play captures everything.
        let mut text = String::from(".OOOO\n");
        for _ in 0..4 {
            text.push_str("OOOOO\n");
        }
        let board = BoardState::from_text(&text, Color::Black).unwrap();
        assert_eq!(board.legal_moves(), vec![Move::play(0, 0), Move::Pass]);
        let r = genmove(&board, &EngineConfig { playouts: 200, ..EngineConfig::default() }).unwrap();
        assert_eq!(r.best, Move::play(0, 0));
    }
}
