//! Position generators and independent reference checks shared by the
//! property and acceptance suites.
#![allow(dead_code)]

use std::collections::HashSet;

use mmchess_core::reference::{naive_attacked, naive_moves};
use mmchess_core::{
    legal_moves, Color, EpRule, GameRecord, Move, Piece, PieceKind, Position, PositionBuilder, Square, TurnConfig,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// A reachable position: random play from the start of a random small config.
pub fn playout(seed: u64) -> (Position, GameRecord) {
    let mut rng = StdRng::seed_from_u64(seed);
    let config = TurnConfig::of(rng.gen_range(1..=4), rng.gen_range(1..=4));
    let rule = if rng.gen_bool(0.5) {
        EpRule::Strict
    } else {
        EpRule::Loose
    };
    let mut pos = Position::initial_with_rule(config, rule);
    let mut record = GameRecord::new(pos);
    let plies = rng.gen_range(0..70);
    for _ in 0..plies {
        let moves = legal_moves(&pos);
        let mv = *moves.choose(&mut rng).expect("live positions have moves");
        let mut next = pos;
        next.make(mv);
        if next.is_terminal() {
            break;
        }
        record.push_ply(&pos, mv);
        pos = next;
    }
    (pos, record)
}

/// A sparse board: two kings plus up to `extra` random pieces, any side to
/// move, any point inside the turn.
pub fn sparse(seed: u64, extra: usize) -> Position {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        let config = TurnConfig::of(rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut squares: Vec<u8> = (0..64).collect();
        squares.shuffle(&mut rng);
        let at = |i: usize| Square::new(squares[i] % 8, squares[i] / 8);
        let mut b = PositionBuilder::new(config)
            .piece(at(0), Piece::new(Color::White, PieceKind::King))
            .piece(at(1), Piece::new(Color::Black, PieceKind::King));
        let n = rng.gen_range(0..=extra);
        for i in 0..n {
            let kind = [
                PieceKind::Pawn,
                PieceKind::Knight,
                PieceKind::Bishop,
                PieceKind::Rook,
                PieceKind::Queen,
            ]
            .choose(&mut rng)
            .copied()
            .unwrap();
            let color = if rng.gen_bool(0.5) { Color::White } else { Color::Black };
            b = b.piece(at(2 + i), Piece::new(color, kind));
        }
        let side = if rng.gen_bool(0.5) { Color::White } else { Color::Black };
        let left = rng.gen_range(1..=config.allowance(side) as u32);
        let rule = if rng.gen_bool(0.5) {
            EpRule::Strict
        } else {
            EpRule::Loose
        };
        if let Ok(p) = b.side_to_move(side).moves_remaining(left).ep_rule(rule).build() {
            if !p.is_terminal() {
                return p;
            }
        }
    }
}

/// Both generators interleaved.
pub fn mixed(seed: u64) -> Position {
    if seed % 3 == 2 {
        sparse(seed, 8)
    } else {
        playout(seed).0
    }
}

pub fn move_set(moves: &[Move]) -> HashSet<Move> {
    moves.iter().copied().collect()
}

pub fn check_generators_agree(pos: &Position) -> Result<(), String> {
    let fast = legal_moves(pos);
    let naive = naive_moves(pos);
    if fast.len() != move_set(&fast).len() {
        return Err("duplicate moves".into());
    }
    if move_set(&fast) != move_set(&naive) {
        return Err(format!("generator mismatch: {} vs naive {}", fast.len(), naive.len()));
    }
    for m in &fast {
        if let Some(p) = pos.piece_at(m.to) {
            if p.color == pos.side_to_move() {
                return Err(format!("friendly capture {m}"));
            }
        }
    }
    Ok(())
}

pub fn check_make_unmake(pos: &Position) -> Result<(), String> {
    for mv in legal_moves(pos) {
        let mut p = *pos;
        let token = p.make(mv);
        if p.key() == pos.key() {
            return Err(format!("{mv} left the position unchanged"));
        }
        p.unmake(mv, &token).map_err(|e| format!("{mv}: {e}"))?;
        if p != *pos || p.key() != pos.key() {
            return Err(format!("{mv} did not undo"));
        }
    }
    Ok(())
}

pub fn check_mirror(pos: &Position) -> Result<(), String> {
    let m = pos.mirrored();
    if m.mirrored() != *pos {
        return Err("mirror is not an involution".into());
    }
    let expected: HashSet<Move> = legal_moves(pos).into_iter().map(Move::mirror).collect();
    if move_set(&legal_moves(&m)) != expected {
        return Err("mirrored moves differ".into());
    }
    for c in Color::ALL {
        let a = mmchess_core::attacked_squares(pos, c).mirror();
        if a != mmchess_core::attacked_squares(&m, c.opponent()) {
            return Err(format!("mirrored attacks of {c} differ"));
        }
        let naive: mmchess_core::SquareSet = naive_attacked(pos, c).into_iter().collect();
        if naive != mmchess_core::attacked_squares(pos, c) {
            return Err(format!("attacks of {c} differ from naive"));
        }
    }
    Ok(())
}

pub fn check_xfen_roundtrip(pos: &Position) -> Result<(), String> {
    let text = mmchess_core::to_xfen(pos);
    let back = mmchess_core::parse_xfen(&text).map_err(|e| format!("{text}: {e}"))?;
    if back != *pos {
        return Err(format!("{text} does not round-trip"));
    }
    Ok(())
}

pub fn check_record_roundtrip(record: &GameRecord) -> Result<(), String> {
    let text = mmchess_core::serialize_record(record);
    let back = mmchess_core::parse_record(&text).map_err(|e| format!("{e}\n{text}"))?;
    if back != *record {
        return Err(format!("record does not round-trip:\n{text}"));
    }
    if mmchess_core::serialize_record(&back) != text {
        return Err("reserialization differs".into());
    }
    back.replay().map_err(|e| e.to_string())?;
    Ok(())
}

/// Unpruned single-agent search: can `side` capture the king within `k` of
/// its own moves, the opponent frozen.
pub fn brute_capture(pos: &Position, side: Color, k: u32) -> bool {
    fn go(p: &Position, side: Color, k: u32) -> bool {
        if k == 0 {
            return false;
        }
        naive_moves(p).into_iter().any(|mv| {
            let mut q = *p;
            q.make(mv);
            q.winner() == Some(side) || go(&q, side, k - 1)
        })
    }
    go(&pos.single_agent(side, k), side, k)
}

/// Plain AND-OR search with no table, no oracle and no pruning beyond
/// looking for a king capture on the prover's very last ply. `None` when some
/// line reaches a side without moves (the pass rule is not modelled here).
pub fn naive_forced_win(pos: &Position, prover: Color, turns: u32) -> Option<bool> {
    if let Some(w) = pos.winner() {
        return Some(w == prover);
    }
    if turns == 0 {
        return Some(false);
    }
    let moves = legal_moves(pos);
    if moves.is_empty() {
        return None;
    }
    let mover = pos.side_to_move();
    if mover == prover && turns == 1 && pos.moves_remaining() == 1 {
        let king = pos.king_square(prover.opponent());
        return Some(moves.iter().any(|m| Some(m.to) == king));
    }
    let mut unknown = false;
    for mv in moves {
        let mut q = *pos;
        q.make(mv);
        let ended_turn = !q.is_terminal() && q.side_to_move() != mover;
        let t = if mover == prover && ended_turn {
            turns - 1
        } else {
            turns
        };
        match naive_forced_win(&q, prover, t) {
            Some(true) if mover == prover => return Some(true),
            Some(false) if mover != prover => return Some(false),
            None => unknown = true,
            _ => {}
        }
    }
    if unknown {
        None
    } else {
        Some(mover != prover)
    }
}
