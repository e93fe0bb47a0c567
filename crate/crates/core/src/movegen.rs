//! Bitboard move generation.
//!
//! Every pseudo-legal chess move is legal here: there is no check, so a king
//! may step into attack and pinned pieces move freely. The only extra rule is
//! that a finished game has no moves.

use crate::bitboard::{
    bishop_attacks, king_attacks, knight_attacks, pawn_attacks, queen_attacks, rook_attacks, SquareSet,
};
use crate::position::Position;
use crate::types::{Color, Move, MoveKind, PieceKind, Square};

/// Moves for the side to move, in canonical order: king captures first, then
/// other captures, then quiet moves, each group ordered by (from, to, promotion).
pub fn legal_moves(pos: &Position) -> Vec<Move> {
    let mut moves = Vec::with_capacity(48);
    generate(pos, &mut moves);
    sort_canonical(pos, &mut moves);
    moves
}

/// Unordered generation into `out` (which is cleared first).
pub fn generate(pos: &Position, out: &mut Vec<Move>) {
    out.clear();
    if pos.is_terminal() {
        return;
    }
    generate_for(pos, pos.side_to_move(), out);
}

#[inline]
fn class(pos: &Position, mv: &Move) -> u8 {
    if !mv.kind.is_capture() {
        2
    } else if pos.piece_at(mv.to).is_some_and(|p| p.kind == PieceKind::King) {
        0
    } else {
        1
    }
}

pub fn sort_canonical(pos: &Position, moves: &mut [Move]) {
    moves.sort_unstable_by_key(|m| (class(pos, m), m.from, m.to, m.promotion));
}

fn push_pawn_move(out: &mut Vec<Move>, from: Square, to: Square, kind: MoveKind, promotes: bool) {
    if promotes {
        for k in PieceKind::PROMOTIONS {
            out.push(Move::new(from, to, kind).with_promotion(k));
        }
    } else {
        out.push(Move::new(from, to, kind));
    }
}

pub(crate) fn generate_for(pos: &Position, us: Color, out: &mut Vec<Move>) {
    let them = us.opponent();
    let own = pos.color_set(us);
    let enemy = pos.color_set(them);
    let occ = own | enemy;
    let empty = !occ;

    let fwd: i8 = us.forward();
    let start_rank = us.pawn_start_rank();
    let promo_rank = us.promotion_rank();
    let ep = pos
        .en_passant()
        .filter(|t| Position::ep_pusher(*t) == them && pos.piece_at(*t).is_none());

    for from in pos.pieces(us, PieceKind::Pawn) {
        if let Some(one) = from.offset(0, fwd) {
            if empty.contains(one) {
                push_pawn_move(out, from, one, MoveKind::Normal, one.rank() == promo_rank);
                if from.rank() == start_rank {
                    let two = one.offset(0, fwd).expect("double push stays on board");
                    if empty.contains(two) {
                        out.push(Move::new(from, two, MoveKind::DoublePawnPush));
                    }
                }
            }
        }
        let att = pawn_attacks(from, us);
        for to in att & enemy {
            push_pawn_move(out, from, to, MoveKind::Capture, to.rank() == promo_rank);
        }
        if let Some(t) = ep {
            if att.contains(t) {
                out.push(Move::new(from, t, MoveKind::EnPassant));
            }
        }
    }

    let emit = |from: Square, targets: SquareSet, out: &mut Vec<Move>| {
        for to in targets & !own {
            let kind = if enemy.contains(to) {
                MoveKind::Capture
            } else {
                MoveKind::Normal
            };
            out.push(Move::new(from, to, kind));
        }
    };

    for from in pos.pieces(us, PieceKind::Knight) {
        emit(from, knight_attacks(from), out);
    }
    for from in pos.pieces(us, PieceKind::Bishop) {
        emit(from, bishop_attacks(from, occ), out);
    }
    for from in pos.pieces(us, PieceKind::Rook) {
        emit(from, rook_attacks(from, occ), out);
    }
    for from in pos.pieces(us, PieceKind::Queen) {
        emit(from, queen_attacks(from, occ), out);
    }
    for from in pos.pieces(us, PieceKind::King) {
        emit(from, king_attacks(from), out);
    }

    let rank = if us == Color::White { 0 } else { 7 };
    let king_home = Square::new(4, rank);
    let rights = pos.castling();
    if pos.pieces(us, PieceKind::King).contains(king_home) {
        let rooks = pos.pieces(us, PieceKind::Rook);
        if rights.has(us, true)
            && rooks.contains(Square::new(7, rank))
            && empty.contains(Square::new(5, rank))
            && empty.contains(Square::new(6, rank))
        {
            out.push(Move::new(king_home, Square::new(6, rank), MoveKind::CastleKingside));
        }
        if rights.has(us, false)
            && rooks.contains(Square::new(0, rank))
            && empty.contains(Square::new(1, rank))
            && empty.contains(Square::new(2, rank))
            && empty.contains(Square::new(3, rank))
        {
            out.push(Move::new(king_home, Square::new(2, rank), MoveKind::CastleQueenside));
        }
    }
}

/// Whether `color` has at least one move, ignoring whose turn it is.
pub fn has_any_move(pos: &Position, color: Color) -> bool {
    if let Some(k) = pos.king_square(color) {
        if !(king_attacks(k) & !pos.color_set(color)).is_empty() {
            return true;
        }
    }
    let mut buf = Vec::new();
    generate_for(pos, color, &mut buf);
    !buf.is_empty()
}

/// Squares on which some piece of `by` could capture with one move. Pawns
/// count only their diagonals.
pub fn attacked_squares(pos: &Position, by: Color) -> SquareSet {
    let occ = pos.occupied();
    let mut s = SquareSet::EMPTY;
    for from in pos.pieces(by, PieceKind::Pawn) {
        s |= pawn_attacks(from, by);
    }
    for from in pos.pieces(by, PieceKind::Knight) {
        s |= knight_attacks(from);
    }
    for from in pos.pieces(by, PieceKind::Bishop) {
        s |= bishop_attacks(from, occ);
    }
    for from in pos.pieces(by, PieceKind::Rook) {
        s |= rook_attacks(from, occ);
    }
    for from in pos.pieces(by, PieceKind::Queen) {
        s |= queen_attacks(from, occ);
    }
    for from in pos.pieces(by, PieceKind::King) {
        s |= king_attacks(from);
    }
    s
}

/// Whether some piece of `by` attacks `target`.
#[inline]
pub fn is_attacked(pos: &Position, target: Square, by: Color) -> bool {
    let occ = pos.occupied();
    let theirs = pos.color_set(by);
    let queens = pos.kind_set(PieceKind::Queen);
    !(knight_attacks(target) & pos.kind_set(PieceKind::Knight) & theirs).is_empty()
        || !(pawn_attacks(target, by.opponent()) & pos.kind_set(PieceKind::Pawn) & theirs).is_empty()
        || !(king_attacks(target) & pos.kind_set(PieceKind::King) & theirs).is_empty()
        || !(bishop_attacks(target, occ) & (pos.kind_set(PieceKind::Bishop) | queens) & theirs).is_empty()
        || !(rook_attacks(target, occ) & (pos.kind_set(PieceKind::Rook) | queens) & theirs).is_empty()
}

/// Whether the side to move can take the enemy king with its next ply.
#[inline]
pub fn can_capture_king_now(pos: &Position) -> bool {
    let us = pos.side_to_move();
    match pos.king_square(us.opponent()) {
        Some(k) => !pos.is_terminal() && is_attacked(pos, k, us),
        None => false,
    }
}

/// Ply-counting perft: leaves at `depth` plies, following the turn structure.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let mut moves = Vec::with_capacity(48);
    generate(pos, &mut moves);
    if depth == 1 {
        return moves.len() as u64;
    }
    let mut p = *pos;
    let mut total = 0;
    for mv in moves {
        let token = p.make(mv);
        total += perft(&p, depth - 1);
        p.unmake(mv, &token).expect("perft unmake");
    }
    total
}
