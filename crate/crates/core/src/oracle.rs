//! Single-agent capture oracle: "can `side` take the enemy king within `k` of
//! its own consecutive moves if the opponent never moves?"
//!
//! The opponent is frozen for the whole horizon. That is exactly right inside
//! one multimove turn (the opponent really does not move), and it is what the
//! strategy scripts mean by "can take the king in three moves". It is *not* a
//! statement about play across turns; the solver handles that.
//!
//! Search is iterative deepening over depth-first search in canonical move
//! order, so the witness is the first shortest line in that order. Nodes are
//! pruned when no piece of `side` can reach the king square within the plies
//! left even on an empty board (see [`capture_distance_lower_bound`]).

use std::sync::OnceLock;

use thiserror::Error;

use crate::bitboard::SquareSet;
use crate::movegen::{self, is_attacked};
use crate::position::{KeySet, Position};
use crate::types::{Color, Move, PieceKind, Square};

/// A line of moves by one side, ending in the capture of the enemy king.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaptureWitness {
    pub moves: Vec<Move>,
}

impl CaptureWitness {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("position is already decided")]
    TerminalPosition,
    #[error("horizon must be at least one move")]
    ZeroHorizon,
    #[error("no piece on {0}")]
    EmptySquare(Square),
}

const UNREACHABLE: u32 = 99;

fn knight_table() -> &'static [[u8; 64]; 64] {
    static TABLE: OnceLock<[[u8; 64]; 64]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[u8::MAX; 64]; 64];
        for from in Square::all() {
            let row = &mut t[from.index()];
            row[from.index()] = 0;
            let mut queue = std::collections::VecDeque::from([from]);
            while let Some(s) = queue.pop_front() {
                let d = row[s.index()];
                for n in crate::bitboard::knight_attacks(s) {
                    if row[n.index()] == u8::MAX {
                        row[n.index()] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        t
    })
}

fn chebyshev(a: Square, b: Square) -> u32 {
    let df = (a.file() as i32 - b.file() as i32).unsigned_abs();
    let dr = (a.rank() as i32 - b.rank() as i32).unsigned_abs();
    df.max(dr)
}

/// Empty-board moves for a piece of `kind` to capture on `to`.
fn piece_distance(kind: PieceKind, color: Color, from: Square, to: Square) -> u32 {
    if from == to {
        return 0;
    }
    let df = (from.file() as i32 - to.file() as i32).unsigned_abs();
    let dr = (from.rank() as i32 - to.rank() as i32).unsigned_abs();
    let diagonal = df == dr;
    let straight = df == 0 || dr == 0;
    match kind {
        PieceKind::King => df.max(dr),
        PieceKind::Knight => knight_table()[from.index()][to.index()] as u32,
        PieceKind::Rook => {
            if straight {
                1
            } else {
                2
            }
        }
        PieceKind::Bishop => {
            if (df + dr) % 2 == 1 {
                UNREACHABLE
            } else if diagonal {
                1
            } else {
                2
            }
        }
        PieceKind::Queen => {
            if straight || diagonal {
                1
            } else {
                2
            }
        }
        PieceKind::Pawn => pawn_distance(color, from, to),
    }
}

fn pawn_distance(color: Color, from: Square, to: Square) -> u32 {
    let ahead = |rank: u8| -> i32 {
        if color == Color::White {
            rank as i32 - from.rank() as i32
        } else {
            from.rank() as i32 - rank as i32
        }
    };
    let double = (from.rank() == color.pawn_start_rank()) as i32;
    let mut best = UNREACHABLE;
    let r = ahead(to.rank());
    let df = (from.file() as i32 - to.file() as i32).abs();
    if r >= 1 && df <= r {
        best = (r - double).max(df).max(1) as u32;
    }
    // Promote, then at least one more move with the new piece.
    let p = ahead(color.promotion_rank());
    if p >= 1 {
        best = best.min((p - double).max(1) as u32 + 1);
    }
    best
}

/// Lower bound on the moves `side` needs to capture the enemy king, assuming
/// nothing blocks and the king stays put. Never exceeds the true minimum.
pub fn capture_distance_lower_bound(pos: &Position, side: Color) -> u32 {
    let Some(target) = pos.king_square(side.opponent()) else {
        return UNREACHABLE;
    };
    let mut best = UNREACHABLE;
    for (from, piece) in pos.piece_list() {
        if piece.color != side {
            continue;
        }
        let mut d = piece_distance(piece.kind, side, from, target);
        if piece.kind == PieceKind::King {
            d = d.min(castle_distance(pos, side, from, target));
        }
        if d < best {
            best = d;
            if best <= 1 {
                break;
            }
        }
    }
    best
}

fn castle_distance(pos: &Position, side: Color, from: Square, target: Square) -> u32 {
    let rank = if side == Color::White { 0 } else { 7 };
    if from != Square::new(4, rank) {
        return UNREACHABLE;
    }
    let mut d = UNREACHABLE;
    if pos.castling().has(side, true) {
        d = d.min(1 + chebyshev(Square::new(6, rank), target));
    }
    if pos.castling().has(side, false) {
        d = d.min(1 + chebyshev(Square::new(2, rank), target));
    }
    d
}

/// Reusable oracle state (the failure memo keeps its allocation between
/// queries).
#[derive(Default)]
pub struct CaptureOracle {
    failed: KeySet,
    pub nodes: u64,
    pub queries: u64,
}

impl CaptureOracle {
    pub fn new() -> CaptureOracle {
        CaptureOracle::default()
    }

    /// Shortest capture line for `side` within `k` of its own moves.
    pub fn witness(&mut self, pos: &Position, side: Color, k: u32) -> Result<Option<CaptureWitness>, OracleError> {
        if pos.is_terminal() {
            return Err(OracleError::TerminalPosition);
        }
        if k == 0 {
            return Err(OracleError::ZeroHorizon);
        }
        self.queries += 1;
        let Some(target) = pos.king_square(side.opponent()) else {
            return Err(OracleError::TerminalPosition);
        };
        let k = k.min(255);
        if capture_distance_lower_bound(pos, side) > k {
            return Ok(None);
        }
        self.failed.clear();
        let base = pos.single_agent(side, k);
        let mut line = Vec::with_capacity(k as usize);
        for depth in 1..=k {
            let mut p = base.single_agent(side, depth);
            if self.dfs(&mut p, side, target, depth, &mut line) {
                line.reverse();
                return Ok(Some(CaptureWitness { moves: line }));
            }
        }
        Ok(None)
    }

    pub fn exists(&mut self, pos: &Position, side: Color, k: u32) -> Result<bool, OracleError> {
        Ok(self.witness(pos, side, k)?.is_some())
    }

    fn dfs(&mut self, p: &mut Position, side: Color, target: Square, left: u32, line: &mut Vec<Move>) -> bool {
        self.nodes += 1;
        if left == 1 {
            if !is_attacked(p, target, side) {
                return false;
            }
            let mut moves = Vec::with_capacity(48);
            movegen::generate(p, &mut moves);
            let capture = moves
                .into_iter()
                .filter(|m| m.to == target)
                .min_by_key(|m| (m.from, m.promotion))
                .expect("an attacked king square has a capturing move");
            line.push(capture);
            return true;
        }
        if capture_distance_lower_bound(p, side) > left || self.failed.contains(&p.key()) {
            return false;
        }
        for mv in movegen::legal_moves(p) {
            let token = p.make(mv);
            let found = if p.winner() == Some(side) {
                true
            } else if p.side_to_move() == side && !p.is_terminal() {
                self.dfs(p, side, target, left - 1, line)
            } else {
                // Ran out of moves and the turn passed.
                false
            };
            p.unmake(mv, &token).expect("oracle unmake");
            if found {
                line.push(mv);
                return true;
            }
        }
        self.failed.insert(p.key());
        false
    }
}

/// Capture line for the side to move within `k` of its own moves, or `None`
/// if no such line exists.
pub fn can_capture_king_within(pos: &Position, k: u32) -> Result<Option<CaptureWitness>, OracleError> {
    CaptureOracle::new().witness(pos, pos.side_to_move(), k)
}

/// Like [`can_capture_king_within`] but for either side, regardless of whose
/// turn it is.
pub fn capture_witness_for(pos: &Position, side: Color, k: u32) -> Result<Option<CaptureWitness>, OracleError> {
    CaptureOracle::new().witness(pos, side, k)
}

/// Squares the piece on `from` can stand on after at most `k` of its own
/// consecutive moves, everything else frozen. Captures are allowed (and the
/// piece may continue afterwards); own pieces block. The start square is
/// included only if the piece can come back to it.
pub fn reach_squares_within(pos: &Position, from: Square, k: u32) -> Result<SquareSet, OracleError> {
    let piece = pos.piece_at(from).ok_or(OracleError::EmptySquare(from))?;
    if pos.is_terminal() {
        return Err(OracleError::TerminalPosition);
    }
    let side = piece.color;
    let start = pos.single_agent(side, k.clamp(1, 255));
    let mut reached = SquareSet::EMPTY;
    let mut seen = KeySet::default();
    seen.insert(start.key());
    let mut frontier = vec![(start, from)];
    let mut moves = Vec::with_capacity(48);
    for _ in 0..k {
        let mut next = Vec::new();
        for (p, at) in frontier {
            movegen::generate(&p, &mut moves);
            for &mv in moves.iter().filter(|m| m.from == at) {
                let mut q = p;
                q.make(mv);
                reached.insert(mv.to);
                if q.is_terminal() || q.side_to_move() != side {
                    continue;
                }
                if seen.insert(q.key()) {
                    next.push((q, mv.to));
                }
            }
        }
        frontier = next;
    }
    Ok(reached)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::{parse_moves, parse_xfen};
    use crate::types::{sq, TurnConfig};

    #[test]
    fn start_needs_four_moves() {
        let p = Position::initial(TurnConfig::of(4, 1));
        assert_eq!(can_capture_king_within(&p, 3).unwrap(), None);
        let w = can_capture_king_within(&p, 4).unwrap().unwrap();
        assert_eq!(w.len(), 4);
        let mut q = p;
        for m in &w.moves {
            q = crate::rules::apply_move(&q, *m).unwrap();
        }
        assert_eq!(q.winner(), Some(Color::White));
    }

    #[test]
    fn errors() {
        let p = Position::initial(TurnConfig::of(1, 1));
        assert_eq!(can_capture_king_within(&p, 0), Err(OracleError::ZeroHorizon));
        assert_eq!(
            reach_squares_within(&p, sq("e4"), 1),
            Err(OracleError::EmptySquare(sq("e4")))
        );
        let done = parse_xfen("4k3/8/8/8/8/8/8/8 b - - 0 1 0 1 1").unwrap();
        assert_eq!(can_capture_king_within(&done, 1), Err(OracleError::TerminalPosition));
    }

    #[test]
    fn knight_reach_from_b1() {
        let p = Position::initial(TurnConfig::of(1, 1));
        let r = reach_squares_within(&p, sq("b1"), 1).unwrap();
        assert_eq!(r, [sq("a3"), sq("c3")].into_iter().collect());
    }

    #[test]
    fn knight_and_queen_lines_after_c3_e3_f3() {
        let p = Position::initial(TurnConfig::of(3, 2));
        let mut q = p;
        for m in parse_moves("b1c3 e2e3 d1f3", &p).unwrap() {
            q.make(m);
        }
        // Qf3xf7xe8 is shortest; the c3 knight also reaches e8 in three.
        let w = capture_witness_for(&q, Color::White, 3).unwrap().unwrap();
        assert_eq!(w.len(), 2);
        assert!(reach_squares_within(&q, sq("c3"), 3).unwrap().contains(sq("e8")));
        assert!(!reach_squares_within(&q, sq("c3"), 2).unwrap().contains(sq("e8")));
    }

    #[test]
    fn pawn_bound_counts_promotion() {
        let p = parse_xfen("4k3/8/8/8/8/8/P7/4K3 w - - 0 1 1 9 1").unwrap();
        // a2-a4-a5-a6-a7-a8=Q then Qxe8: six moves, bound must not exceed it.
        assert!(capture_distance_lower_bound(&p, Color::White) <= 6);
        assert_eq!(can_capture_king_within(&p, 5).unwrap(), None);
        assert!(can_capture_king_within(&p, 6).unwrap().is_some());
    }
}
