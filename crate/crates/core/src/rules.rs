//! Value-level rules API: start position, move lists, apply/undo and winner.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bitboard::SquareSet;
use crate::movegen;
use crate::position::{Position, PositionError, TokenMismatch, UndoToken};
use crate::types::{Color, EpRule, Move, PieceKind, Square, TurnConfig};

/// Why a move was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IllegalReason {
    TerminalPosition,
    EmptySquare,
    WrongSide,
    FriendlyCapture,
    BadGeometry,
    BlockedPath,
    BadPromotion,
}

impl IllegalReason {
    pub fn code(self) -> &'static str {
        match self {
            IllegalReason::TerminalPosition => "terminal-position",
            IllegalReason::EmptySquare => "empty-square",
            IllegalReason::WrongSide => "wrong-side",
            IllegalReason::FriendlyCapture => "friendly-capture",
            IllegalReason::BadGeometry => "bad-geometry",
            IllegalReason::BlockedPath => "blocked-path",
            IllegalReason::BadPromotion => "bad-promotion",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            IllegalReason::TerminalPosition => "the game is already over",
            IllegalReason::EmptySquare => "there is no piece on the from-square",
            IllegalReason::WrongSide => "that piece belongs to the side not on move",
            IllegalReason::FriendlyCapture => "the target square holds a piece of the same color",
            IllegalReason::BadGeometry => "that piece cannot move that way",
            IllegalReason::BlockedPath => "the path is blocked",
            IllegalReason::BadPromotion => "a pawn reaching the last rank must promote to N, B, R or Q (and only then)",
        }
    }
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("illegal move {text}: {reason} ({})", reason.describe())]
pub struct IllegalMove {
    pub text: String,
    pub reason: IllegalReason,
}

pub fn initial_position(config: TurnConfig) -> Position {
    Position::initial(config)
}

pub fn initial_position_with_rule(config: TurnConfig, rule: EpRule) -> Position {
    Position::initial_with_rule(config, rule)
}

/// Canonically ordered moves; empty for a finished game.
pub fn legal_moves(pos: &Position) -> Vec<Move> {
    movegen::legal_moves(pos)
}

pub fn attacked_squares(pos: &Position, by: Color) -> SquareSet {
    movegen::attacked_squares(pos, by)
}

/// The color whose opponent's king is gone, if any.
pub fn winner_of(pos: &Position) -> Result<Option<Color>, PositionError> {
    pos.winner_from_board()
}

fn geometry_allows(pos: &Position, from: Square, to: Square) -> bool {
    let Some(piece) = pos.piece_at(from) else { return false };
    let df = to.file() as i8 - from.file() as i8;
    let dr = to.rank() as i8 - from.rank() as i8;
    let (adf, adr) = (df.abs(), dr.abs());
    match piece.kind {
        PieceKind::Knight => (adf, adr) == (1, 2) || (adf, adr) == (2, 1),
        PieceKind::Bishop => adf == adr && adf > 0,
        PieceKind::Rook => (adf == 0) != (adr == 0),
        PieceKind::Queen => (adf == adr && adf > 0) || ((adf == 0) != (adr == 0)),
        PieceKind::King => {
            let home = Square::new(4, if piece.color == Color::White { 0 } else { 7 });
            (adf.max(adr) == 1) || (from == home && adr == 0 && adf == 2)
        }
        PieceKind::Pawn => {
            let fwd = piece.color.forward();
            (df == 0 && dr == fwd)
                || (df == 0 && dr == 2 * fwd && from.rank() == piece.color.pawn_start_rank())
                || (adf == 1 && dr == fwd)
        }
    }
}

/// Finds the legal move matching `from`/`to`/`promotion`, or explains why none exists.
pub fn resolve_move(
    pos: &Position,
    from: Square,
    to: Square,
    promotion: Option<PieceKind>,
) -> Result<Move, IllegalMove> {
    let text = {
        let mut t = format!("{from}{to}");
        if let Some(p) = promotion {
            t.push(p.letter());
        }
        t
    };
    let fail = |reason| {
        Err(IllegalMove {
            text: text.clone(),
            reason,
        })
    };
    if pos.is_terminal() {
        return fail(IllegalReason::TerminalPosition);
    }
    let Some(piece) = pos.piece_at(from) else {
        return fail(IllegalReason::EmptySquare);
    };
    if piece.color != pos.side_to_move() {
        return fail(IllegalReason::WrongSide);
    }
    if pos.piece_at(to).is_some_and(|p| p.color == piece.color) {
        return fail(IllegalReason::FriendlyCapture);
    }
    let moves = movegen::legal_moves(pos);
    if let Some(m) = moves
        .iter()
        .find(|m| m.from == from && m.to == to && m.promotion == promotion)
    {
        return Ok(*m);
    }
    if moves.iter().any(|m| m.from == from && m.to == to) {
        return fail(IllegalReason::BadPromotion);
    }
    if promotion.is_some() && piece.kind != PieceKind::Pawn {
        return fail(IllegalReason::BadPromotion);
    }
    if geometry_allows(pos, from, to) {
        // Pawn diagonals onto empty squares are not captures; everything else is obstruction.
        if piece.kind == PieceKind::Pawn && from.file() != to.file() {
            return fail(IllegalReason::BadGeometry);
        }
        return fail(IllegalReason::BlockedPath);
    }
    fail(IllegalReason::BadGeometry)
}

/// Applies `mv` (matched by from/to/promotion against the legal list).
pub fn apply_move(pos: &Position, mv: Move) -> Result<Position, IllegalMove> {
    apply_move_with_token(pos, mv).map(|(p, _)| p)
}

pub fn apply_move_with_token(pos: &Position, mv: Move) -> Result<(Position, UndoToken), IllegalMove> {
    let resolved = resolve_move(pos, mv.from, mv.to, mv.promotion)?;
    let mut next = *pos;
    let token = next.make(resolved);
    Ok((next, token))
}

/// Takes back the move most recently applied to `pos`.
pub fn undo_move(pos: &Position, mv: Move, token: &UndoToken) -> Result<Position, TokenMismatch> {
    let mut prev = *pos;
    let resolved = Move { kind: mv.kind, ..mv };
    prev.unmake(resolved, token)?;
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::position::PositionBuilder;
    use crate::types::{sq, MoveKind, Piece};

    fn mv(from: &str, to: &str) -> Move {
        Move::new(sq(from), sq(to), MoveKind::Normal)
    }

    #[test]
    fn first_ply_keeps_white_on_move() {
        let p = initial_position(TurnConfig::of(2, 1));
        let q = apply_move(&p, mv("b1", "a3")).unwrap();
        assert_eq!(q.piece_at(sq("a3")).unwrap().kind, PieceKind::Knight);
        assert_eq!(q.side_to_move(), Color::White);
        assert_eq!(q.moves_remaining(), 1);
        let r = apply_move(&q, mv("a3", "b5")).unwrap();
        assert_eq!(r.side_to_move(), Color::Black);
        assert_eq!(r.moves_remaining(), 1);
    }

    #[test]
    fn king_capture_ends_the_game_mid_turn() {
        let p = PositionBuilder::new(TurnConfig::of(4, 1))
            .piece(sq("e1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("c7"), Piece::new(Color::White, PieceKind::Knight))
            .piece(sq("e8"), Piece::new(Color::Black, PieceKind::King))
            .moves_remaining(3)
            .build()
            .unwrap();
        let q = apply_move(&p, mv("c7", "e8")).unwrap();
        assert_eq!(q.winner(), Some(Color::White));
        assert!(q.is_terminal());
        assert!(legal_moves(&q).is_empty());
        assert_eq!(winner_of(&q), Ok(Some(Color::White)));
        let err = apply_move(&q, mv("e1", "e2")).unwrap_err();
        assert_eq!(err.reason, IllegalReason::TerminalPosition);
    }

    #[test]
    fn en_passant_on_the_immediately_following_move() {
        // White e2-e4 as the last ply of its turn; Black's d4 pawn takes on e3.
        let p = PositionBuilder::new(TurnConfig::of(1, 2))
            .piece(sq("e1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("e2"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("e8"), Piece::new(Color::Black, PieceKind::King))
            .piece(sq("d4"), Piece::new(Color::Black, PieceKind::Pawn))
            .build()
            .unwrap();
        let q = apply_move(&p, mv("e2", "e4")).unwrap();
        assert_eq!(q.en_passant(), Some(sq("e3")));
        let r = apply_move(&q, mv("d4", "e3")).unwrap();
        assert_eq!(r.piece_at(sq("e3")), Some(Piece::new(Color::Black, PieceKind::Pawn)));
        assert_eq!(r.piece_at(sq("e4")), None);
        assert_eq!(r.side_to_move(), Color::Black);
    }

    #[test]
    fn en_passant_expires_after_one_ply_under_strict_rule() {
        let p = PositionBuilder::new(TurnConfig::of(1, 2))
            .piece(sq("e1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("e2"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("e8"), Piece::new(Color::Black, PieceKind::King))
            .piece(sq("d4"), Piece::new(Color::Black, PieceKind::Pawn))
            .build()
            .unwrap();
        let q = apply_move(&p, mv("e2", "e4")).unwrap();
        let r = apply_move(&q, mv("e8", "e7")).unwrap();
        assert_eq!(r.en_passant(), None);
        let err = apply_move(&r, mv("d4", "e3")).unwrap_err();
        assert_eq!(err.reason, IllegalReason::BadGeometry);

        // Under the loose rule the whole of Black's turn may use it.
        let p = PositionBuilder::new(TurnConfig::of(1, 2))
            .piece(sq("e1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("e2"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("e8"), Piece::new(Color::Black, PieceKind::King))
            .piece(sq("d4"), Piece::new(Color::Black, PieceKind::Pawn))
            .ep_rule(EpRule::Loose)
            .build()
            .unwrap();
        let q = apply_move(&p, mv("e2", "e4")).unwrap();
        let r = apply_move(&q, mv("e8", "e7")).unwrap();
        assert_eq!(r.en_passant(), Some(sq("e3")));
        let s = apply_move(&r, mv("d4", "e3")).unwrap();
        assert_eq!(s.piece_at(sq("e4")), None);
    }

    #[test]
    fn pusher_cannot_use_its_own_target() {
        // White pushes with a ply to spare; its d2 pawn attacks e3 but may not take there.
        let p = PositionBuilder::new(TurnConfig::of(2, 1))
            .piece(sq("e1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("e2"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("d2"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("e8"), Piece::new(Color::Black, PieceKind::King))
            .build()
            .unwrap();
        let q = apply_move(&p, mv("e2", "e4")).unwrap();
        assert!(legal_moves(&q).iter().all(|m| m.kind != MoveKind::EnPassant));
    }

    #[test]
    fn moving_into_attack_is_legal() {
        let p = PositionBuilder::new(TurnConfig::of(1, 1))
            .piece(sq("e1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("e8"), Piece::new(Color::Black, PieceKind::Rook))
            .piece(sq("a8"), Piece::new(Color::Black, PieceKind::King))
            .build()
            .unwrap();
        assert!(legal_moves(&p).contains(&mv("e1", "e2")));
    }

    #[test]
    fn illegal_reasons() {
        let p = initial_position(TurnConfig::of(1, 1));
        let reason = |f: &str, t: &str| apply_move(&p, mv(f, t)).unwrap_err().reason;
        assert_eq!(reason("e2", "e5"), IllegalReason::BadGeometry);
        assert_eq!(reason("a1", "a3"), IllegalReason::BlockedPath);
        assert_eq!(reason("d1", "d2"), IllegalReason::FriendlyCapture);
        assert_eq!(reason("e7", "e5"), IllegalReason::WrongSide);
        assert_eq!(reason("e4", "e5"), IllegalReason::EmptySquare);
        assert_eq!(reason("f1", "h3"), IllegalReason::BlockedPath);
        assert_eq!(reason("b1", "b3"), IllegalReason::BadGeometry);
    }

    #[test]
    fn promotion_is_mandatory_and_can_move_again() {
        let p = PositionBuilder::new(TurnConfig::of(2, 1))
            .piece(sq("a1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("b7"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("h1"), Piece::new(Color::Black, PieceKind::King))
            .build()
            .unwrap();
        assert_eq!(
            apply_move(&p, mv("b7", "b8")).unwrap_err().reason,
            IllegalReason::BadPromotion
        );
        let q = apply_move(&p, mv("b7", "b8").with_promotion(PieceKind::Queen)).unwrap();
        assert_eq!(q.side_to_move(), Color::White);
        let r = apply_move(&q, mv("b8", "h2")).unwrap();
        assert_eq!(r.piece_at(sq("h2")).unwrap().kind, PieceKind::Queen);
    }

    #[test]
    fn undo_restores_capture_and_promotion() {
        let p = PositionBuilder::new(TurnConfig::of(1, 1))
            .piece(sq("a1"), Piece::new(Color::White, PieceKind::King))
            .piece(sq("b7"), Piece::new(Color::White, PieceKind::Pawn))
            .piece(sq("c8"), Piece::new(Color::Black, PieceKind::Rook))
            .piece(sq("h8"), Piece::new(Color::Black, PieceKind::King))
            .build()
            .unwrap();
        let m = mv("b7", "c8").with_promotion(PieceKind::Knight);
        let (q, token) = apply_move_with_token(&p, m).unwrap();
        assert_eq!(token.captured().unwrap().kind, PieceKind::Rook);
        let resolved = resolve_move(&p, m.from, m.to, m.promotion).unwrap();
        assert_eq!(undo_move(&q, resolved, &token).unwrap(), p);
    }

    #[test]
    fn no_move_mid_turn_forfeits_the_rest() {
        // After h2-h3 every White piece is boxed in, so the remaining plies are lost.
        let w = |k| Piece::new(Color::White, k);
        let b = |k| Piece::new(Color::Black, k);
        let p = PositionBuilder::new(TurnConfig::of(3, 1))
            .piece(sq("a1"), w(PieceKind::King))
            .piece(sq("b1"), w(PieceKind::Knight))
            .piece(sq("b2"), w(PieceKind::Bishop))
            .piece(sq("c1"), w(PieceKind::Bishop))
            .piece(sq("a2"), w(PieceKind::Pawn))
            .piece(sq("a3"), w(PieceKind::Pawn))
            .piece(sq("c3"), w(PieceKind::Pawn))
            .piece(sq("d2"), w(PieceKind::Pawn))
            .piece(sq("h2"), w(PieceKind::Pawn))
            .piece(sq("a4"), b(PieceKind::Pawn))
            .piece(sq("c4"), b(PieceKind::Pawn))
            .piece(sq("d3"), b(PieceKind::Pawn))
            .piece(sq("h4"), b(PieceKind::Pawn))
            .piece(sq("h8"), b(PieceKind::King))
            .build()
            .unwrap();
        assert_eq!(legal_moves(&p).len(), 1);
        let q = apply_move(&p, mv("h2", "h3")).unwrap();
        assert_eq!(q.side_to_move(), Color::Black);
        assert_eq!(q.moves_remaining(), 1);
    }
}
