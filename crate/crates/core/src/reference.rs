//! Naive square-by-square move generator.
//!
//! Shares nothing with [`crate::movegen`] beyond the board accessors: it walks
//! direction offsets on (file, rank) coordinates and never touches a bitboard.
//! It exists to cross-check the optimized generator (`perft --audit` and the
//! equivalence tests).

use crate::position::Position;
use crate::types::{Color, Move, MoveKind, PieceKind, Square};

const KNIGHT: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING: [(i8, i8); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];
const ORTHOGONAL: [(i8, i8); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
const DIAGONAL: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, -1), (-1, 1)];

fn target_kind(pos: &Position, us: Color, to: Square) -> Option<MoveKind> {
    match pos.piece_at(to) {
        None => Some(MoveKind::Normal),
        Some(p) if p.color != us => Some(MoveKind::Capture),
        Some(_) => None,
    }
}

fn slide(pos: &Position, us: Color, from: Square, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in dirs {
        let mut cur = from;
        while let Some(next) = cur.offset(df, dr) {
            match target_kind(pos, us, next) {
                Some(kind) => {
                    out.push(Move::new(from, next, kind));
                    if kind == MoveKind::Capture {
                        break;
                    }
                }
                None => break,
            }
            cur = next;
        }
    }
}

fn leap(pos: &Position, us: Color, from: Square, deltas: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in deltas {
        if let Some(to) = from.offset(df, dr) {
            if let Some(kind) = target_kind(pos, us, to) {
                out.push(Move::new(from, to, kind));
            }
        }
    }
}

fn pawn(pos: &Position, us: Color, from: Square, out: &mut Vec<Move>) {
    let dir: i8 = if us == Color::White { 1 } else { -1 };
    let last_rank = if us == Color::White { 7 } else { 0 };
    let home_rank = if us == Color::White { 1 } else { 6 };
    let add = |out: &mut Vec<Move>, to: Square, kind: MoveKind| {
        if to.rank() == last_rank {
            for k in [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen] {
                out.push(Move::new(from, to, kind).with_promotion(k));
            }
        } else {
            out.push(Move::new(from, to, kind));
        }
    };
    if let Some(one) = from.offset(0, dir) {
        if pos.piece_at(one).is_none() {
            add(out, one, MoveKind::Normal);
            if from.rank() == home_rank {
                if let Some(two) = one.offset(0, dir) {
                    if pos.piece_at(two).is_none() {
                        out.push(Move::new(from, two, MoveKind::DoublePawnPush));
                    }
                }
            }
        }
    }
    for df in [-1i8, 1] {
        let Some(to) = from.offset(df, dir) else { continue };
        match pos.piece_at(to) {
            Some(p) if p.color != us => add(out, to, MoveKind::Capture),
            Some(_) => {}
            None => {
                // En passant: the target must have been created by the other side.
                if pos.en_passant() == Some(to) {
                    let pusher = if to.rank() == 2 { Color::White } else { Color::Black };
                    if pusher != us {
                        out.push(Move::new(from, to, MoveKind::EnPassant));
                    }
                }
            }
        }
    }
}

fn castles(pos: &Position, us: Color, out: &mut Vec<Move>) {
    let rank = if us == Color::White { 0 } else { 7 };
    let king = Square::new(4, rank);
    let is = |f: u8, kind: PieceKind| {
        pos.piece_at(Square::new(f, rank))
            .is_some_and(|p| p.color == us && p.kind == kind)
    };
    let empty = |f: u8| pos.piece_at(Square::new(f, rank)).is_none();
    if !is(4, PieceKind::King) {
        return;
    }
    if pos.castling().has(us, true) && is(7, PieceKind::Rook) && empty(5) && empty(6) {
        out.push(Move::new(king, Square::new(6, rank), MoveKind::CastleKingside));
    }
    if pos.castling().has(us, false) && is(0, PieceKind::Rook) && empty(1) && empty(2) && empty(3) {
        out.push(Move::new(king, Square::new(2, rank), MoveKind::CastleQueenside));
    }
}

/// All moves of the side to move, unordered.
pub fn naive_moves(pos: &Position) -> Vec<Move> {
    let mut out = Vec::new();
    if pos.is_terminal() {
        return out;
    }
    let us = pos.side_to_move();
    for from in Square::all() {
        let Some(piece) = pos.piece_at(from) else { continue };
        if piece.color != us {
            continue;
        }
        match piece.kind {
            PieceKind::Pawn => pawn(pos, us, from, &mut out),
            PieceKind::Knight => leap(pos, us, from, &KNIGHT, &mut out),
            PieceKind::Bishop => slide(pos, us, from, &DIAGONAL, &mut out),
            PieceKind::Rook => slide(pos, us, from, &ORTHOGONAL, &mut out),
            PieceKind::Queen => {
                slide(pos, us, from, &ORTHOGONAL, &mut out);
                slide(pos, us, from, &DIAGONAL, &mut out);
            }
            PieceKind::King => leap(pos, us, from, &KING, &mut out),
        }
    }
    castles(pos, us, &mut out);
    out
}

/// Squares `by` attacks, computed one piece and one direction at a time.
pub fn naive_attacked(pos: &Position, by: Color) -> Vec<Square> {
    let mut hit = [false; 64];
    for from in Square::all() {
        let Some(piece) = pos.piece_at(from) else { continue };
        if piece.color != by {
            continue;
        }
        let mut mark = |s: Square| hit[s.index()] = true;
        match piece.kind {
            PieceKind::Pawn => {
                let dir = if by == Color::White { 1 } else { -1 };
                for df in [-1, 1] {
                    if let Some(s) = from.offset(df, dir) {
                        mark(s);
                    }
                }
            }
            PieceKind::Knight | PieceKind::King => {
                let deltas = if piece.kind == PieceKind::Knight {
                    &KNIGHT
                } else {
                    &KING
                };
                for &(df, dr) in deltas {
                    if let Some(s) = from.offset(df, dr) {
                        mark(s);
                    }
                }
            }
            _ => {
                let dirs: Vec<(i8, i8)> = match piece.kind {
                    PieceKind::Bishop => DIAGONAL.to_vec(),
                    PieceKind::Rook => ORTHOGONAL.to_vec(),
                    _ => ORTHOGONAL.iter().chain(DIAGONAL.iter()).copied().collect(),
                };
                for (df, dr) in dirs {
                    let mut cur = from;
                    while let Some(next) = cur.offset(df, dr) {
                        mark(next);
                        if pos.piece_at(next).is_some() {
                            break;
                        }
                        cur = next;
                    }
                }
            }
        }
    }
    Square::all().filter(|s| hit[s.index()]).collect()
}

/// Perft driven by the naive generator. Positions are advanced with
/// [`Position::make`], which is shared with the fast path.
pub fn naive_perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = naive_moves(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .into_iter()
        .map(|mv| {
            let mut child = *pos;
            child.make(mv);
            naive_perft(&child, depth - 1)
        })
        .sum()
}
