//! Game state and in-place move application.
//!
//! A [`Position`] carries everything needed to continue the game: the board,
//! whose turn it is, how many plies of the current turn remain, castling and
//! en-passant bookkeeping, the turn configuration itself and the winner once a
//! king has been taken. It is a plain value (`Copy`), so search code clones it
//! freely or uses [`Position::make`] / [`Position::unmake`] in place.

use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::bitboard::SquareSet;
use crate::movegen;
use crate::types::{Color, EpRule, Move, MoveKind, Piece, PieceKind, Square, TurnConfig};

/// Castling rights as four independent flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CastlingRights(u8);

impl CastlingRights {
    pub const WHITE_KINGSIDE: u8 = 1;
    pub const WHITE_QUEENSIDE: u8 = 2;
    pub const BLACK_KINGSIDE: u8 = 4;
    pub const BLACK_QUEENSIDE: u8 = 8;

    pub const NONE: CastlingRights = CastlingRights(0);
    pub const ALL: CastlingRights = CastlingRights(15);

    pub const fn from_bits(bits: u8) -> CastlingRights {
        CastlingRights(bits & 15)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn has(self, color: Color, kingside: bool) -> bool {
        self.0 & Self::flag(color, kingside) != 0
    }

    #[inline]
    pub const fn flag(color: Color, kingside: bool) -> u8 {
        match (color, kingside) {
            (Color::White, true) => Self::WHITE_KINGSIDE,
            (Color::White, false) => Self::WHITE_QUEENSIDE,
            (Color::Black, true) => Self::BLACK_KINGSIDE,
            (Color::Black, false) => Self::BLACK_QUEENSIDE,
        }
    }

    pub fn set(&mut self, color: Color, kingside: bool, on: bool) {
        let f = Self::flag(color, kingside);
        if on {
            self.0 |= f;
        } else {
            self.0 &= !f;
        }
    }

    /// White rights become Black rights and vice versa.
    pub fn swapped(self) -> CastlingRights {
        CastlingRights(((self.0 & 3) << 2) | ((self.0 >> 2) & 3))
    }

    /// Rights lost when a piece leaves or lands on `sq`.
    #[inline]
    fn cleared_by(sq: Square) -> u8 {
        match sq.index() {
            0 => Self::WHITE_QUEENSIDE,
            4 => Self::WHITE_KINGSIDE | Self::WHITE_QUEENSIDE,
            7 => Self::WHITE_KINGSIDE,
            56 => Self::BLACK_QUEENSIDE,
            60 => Self::BLACK_KINGSIDE | Self::BLACK_QUEENSIDE,
            63 => Self::BLACK_KINGSIDE,
            _ => 0,
        }
    }
}

mod zobrist {
    const fn splitmix(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^ (x >> 31)
    }

    const fn piece_table() -> [u64; 768] {
        let mut t = [0u64; 768];
        let mut i = 0;
        while i < 768 {
            t[i] = splitmix(0x5eed_0000 + i as u64);
            i += 1;
        }
        t
    }

    static PIECES: [u64; 768] = piece_table();

    #[inline]
    pub fn piece(color: usize, kind: usize, sq: usize) -> u64 {
        PIECES[(color * 6 + kind) * 64 + sq]
    }

    #[inline]
    pub fn scalar(tag: u64, value: u64) -> u64 {
        splitmix((tag << 32) ^ value)
    }
}

/// State saved by [`Position::make`] so the move can be taken back exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UndoToken {
    mv: Move,
    moved: Piece,
    captured: Option<(Piece, Square)>,
    castling: CastlingRights,
    en_passant: Option<Square>,
    side_to_move: Color,
    moves_remaining: u8,
    winner: Option<Color>,
    hash_before: u64,
    hash_after: u64,
}

impl UndoToken {
    /// The piece taken by the move, if any.
    pub fn captured(&self) -> Option<Piece> {
        self.captured.map(|(p, _)| p)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("undo token does not belong to move {0} applied to this position")]
pub struct TokenMismatch(pub Move);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PositionError {
    #[error("{0:?} has more than one king")]
    ExtraKing(Color),
    #[error("both kings are missing")]
    NoKings,
    #[error("{0:?} has {1} pieces (at most 16 allowed)")]
    TooManyPieces(Color, u32),
    #[error("{0:?} has {1} pawns (at most 8 allowed)")]
    TooManyPawns(Color, u32),
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
    #[error("en-passant target {0} is not on rank 3 or 6")]
    BadEnPassantRank(Square),
    #[error("en-passant target {0} is inconsistent with the board")]
    BadEnPassantTarget(Square),
    #[error("castling right {0} needs an unmoved king and rook")]
    BadCastlingRight(char),
    #[error("moves remaining {remaining} exceeds the allowance {allowance} of the side to move")]
    MovesRemainingTooLarge { remaining: u32, allowance: u32 },
    #[error("moves remaining is 0 in a position that is not over")]
    NoMovesRemaining,
}

/// Full game state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    by_kind: [SquareSet; 6],
    by_color: [SquareSet; 2],
    mailbox: [Option<Piece>; 64],
    config: TurnConfig,
    side_to_move: Color,
    moves_remaining: u8,
    castling: CastlingRights,
    en_passant: Option<Square>,
    ep_rule: EpRule,
    winner: Option<Color>,
    hash: u64,
}

/// See [`Position::key`]. Equality compares every word; hashing uses the
/// Zobrist key.
#[derive(Clone, Copy, Debug)]
pub struct PositionKey {
    words: [u64; 6],
    hash: u64,
}

impl PartialEq for PositionKey {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words
    }
}

impl Eq for PositionKey {}

impl Hash for PositionKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

/// Hasher for keys whose `Hash` impl writes a single Zobrist word: that word
/// is already uniformly mixed, so it is used as is.
#[derive(Default, Clone, Copy)]
pub struct ZobristHasher(u64);

impl Hasher for ZobristHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 ^= n;
    }
}

pub type ZobristBuild = std::hash::BuildHasherDefault<ZobristHasher>;
pub type KeyMap<V> = std::collections::HashMap<PositionKey, V, ZobristBuild>;
pub type KeySet = std::collections::HashSet<PositionKey, ZobristBuild>;

impl Hash for Position {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

const BACK_RANK: [PieceKind; 8] = [
    PieceKind::Rook,
    PieceKind::Knight,
    PieceKind::Bishop,
    PieceKind::Queen,
    PieceKind::King,
    PieceKind::Bishop,
    PieceKind::Knight,
    PieceKind::Rook,
];

impl Position {
    /// The standard chess array with White to move and `i` plies to play.
    pub fn initial(config: TurnConfig) -> Position {
        Self::initial_with_rule(config, EpRule::Strict)
    }

    pub fn initial_with_rule(config: TurnConfig, ep_rule: EpRule) -> Position {
        let mut p = Position::empty(config);
        p.ep_rule = ep_rule;
        for file in 0..8u8 {
            p.put(Square::new(file, 0), Piece::new(Color::White, BACK_RANK[file as usize]));
            p.put(Square::new(file, 1), Piece::new(Color::White, PieceKind::Pawn));
            p.put(Square::new(file, 6), Piece::new(Color::Black, PieceKind::Pawn));
            p.put(Square::new(file, 7), Piece::new(Color::Black, BACK_RANK[file as usize]));
        }
        p.castling = CastlingRights::ALL;
        p.rehash();
        p
    }

    /// An empty board, White to move with a full turn ahead. Used as a starting
    /// point for constructed positions; see [`PositionBuilder`].
    pub fn empty(config: TurnConfig) -> Position {
        let mut p = Position {
            by_kind: [SquareSet::EMPTY; 6],
            by_color: [SquareSet::EMPTY; 2],
            mailbox: [None; 64],
            config,
            side_to_move: Color::White,
            moves_remaining: config.allowance(Color::White),
            castling: CastlingRights::NONE,
            en_passant: None,
            ep_rule: EpRule::Strict,
            winner: None,
            hash: 0,
        };
        p.rehash();
        p
    }

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.mailbox[sq.index()]
    }

    #[inline]
    pub fn config(&self) -> TurnConfig {
        self.config
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    #[inline]
    pub fn moves_remaining(&self) -> u32 {
        self.moves_remaining as u32
    }

    #[inline]
    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    /// The square a pawn skipped with its last double push, if still open.
    /// Whether the side to move may use it is decided by the generators: only
    /// the pusher's opponent can capture en passant.
    #[inline]
    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    #[inline]
    pub fn ep_rule(&self) -> EpRule {
        self.ep_rule
    }

    #[inline]
    pub fn winner(&self) -> Option<Color> {
        self.winner
    }

    #[inline]
    pub fn is_terminal(&self) -> bool {
        self.winner.is_some()
    }

    #[inline]
    pub fn hash_key(&self) -> u64 {
        self.hash
    }

    /// Compact exact identity of this position (48 bytes), for tables.
    pub fn key(&self) -> PositionKey {
        let mut planes = [0u64; 3];
        for (kind, set) in self.by_kind.iter().enumerate() {
            for (bit, plane) in planes.iter_mut().enumerate() {
                if (kind + 1) >> bit & 1 == 1 {
                    *plane |= set.0;
                }
            }
        }
        let scalars = self.side_to_move as u64
            | (self.moves_remaining as u64) << 8
            | (self.castling.bits() as u64) << 16
            | (self.en_passant.map_or(64, |s| s.index() as u64)) << 24
            | (self.ep_rule as u64) << 32
            | (self.winner.map_or(2, |w| w as u64)) << 40
            | (self.config.allowance(Color::White) as u64) << 48
            | (self.config.allowance(Color::Black) as u64) << 56;
        PositionKey {
            words: [
                self.by_color[0].0,
                self.by_color[1].0,
                planes[0],
                planes[1],
                planes[2],
                scalars,
            ],
            hash: self.hash,
        }
    }

    #[inline]
    pub fn occupied(&self) -> SquareSet {
        self.by_color[0] | self.by_color[1]
    }

    #[inline]
    pub fn color_set(&self, color: Color) -> SquareSet {
        self.by_color[color.index()]
    }

    #[inline]
    pub fn kind_set(&self, kind: PieceKind) -> SquareSet {
        self.by_kind[kind.index()]
    }

    #[inline]
    pub fn pieces(&self, color: Color, kind: PieceKind) -> SquareSet {
        self.by_color[color.index()] & self.by_kind[kind.index()]
    }

    #[inline]
    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces(color, PieceKind::King).first()
    }

    /// Every occupied square with its piece, in square order.
    pub fn piece_list(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        self.occupied()
            .into_iter()
            .map(move |s| (s, self.mailbox[s.index()].expect("occupied square has a piece")))
    }

    /// The color whose opponent has no king.
    pub fn winner_from_board(&self) -> Result<Option<Color>, PositionError> {
        let white = !self.pieces(Color::White, PieceKind::King).is_empty();
        let black = !self.pieces(Color::Black, PieceKind::King).is_empty();
        match (white, black) {
            (true, true) => Ok(None),
            (true, false) => Ok(Some(Color::White)),
            (false, true) => Ok(Some(Color::Black)),
            (false, false) => Err(PositionError::NoKings),
        }
    }

    /// Mirror image: ranks reversed, colors swapped, rights and allowances swapped.
    pub fn mirrored(&self) -> Position {
        let mut p = Position::empty(self.config.swapped());
        for (s, piece) in self.piece_list() {
            p.put(s.mirror(), Piece::new(piece.color.opponent(), piece.kind));
        }
        p.side_to_move = self.side_to_move.opponent();
        p.moves_remaining = self.moves_remaining;
        p.castling = self.castling.swapped();
        p.en_passant = self.en_passant.map(Square::mirror);
        p.ep_rule = self.ep_rule;
        p.winner = self.winner.map(Color::opponent);
        p.rehash();
        p
    }

    /// Copy in which `side` is to move with `plies` consecutive moves ahead of
    /// it, as if the opponent did not exist. Used by the single-agent capture
    /// oracle.
    pub fn single_agent(&self, side: Color, plies: u32) -> Position {
        let plies = plies.min(255) as u8;
        let mut p = *self;
        let allowance = p.config.allowance(side).max(plies);
        p.config = p.config.with_allowance(side, allowance);
        p.side_to_move = side;
        p.moves_remaining = plies;
        p.rehash();
        p
    }

    #[inline]
    fn put(&mut self, sq: Square, piece: Piece) {
        debug_assert!(self.mailbox[sq.index()].is_none());
        self.mailbox[sq.index()] = Some(piece);
        self.by_kind[piece.kind.index()].insert(sq);
        self.by_color[piece.color.index()].insert(sq);
        self.hash ^= zobrist::piece(piece.color.index(), piece.kind.index(), sq.index());
    }

    #[inline]
    fn take(&mut self, sq: Square) -> Piece {
        let piece = self.mailbox[sq.index()].take().expect("take from empty square");
        self.by_kind[piece.kind.index()].remove(sq);
        self.by_color[piece.color.index()].remove(sq);
        self.hash ^= zobrist::piece(piece.color.index(), piece.kind.index(), sq.index());
        piece
    }

    fn scalar_hash(&self) -> u64 {
        let mut h = zobrist::scalar(1, self.side_to_move as u64)
            ^ zobrist::scalar(2, self.moves_remaining as u64)
            ^ zobrist::scalar(3, self.castling.bits() as u64);
        if let Some(ep) = self.en_passant {
            h ^= zobrist::scalar(4, ep.index() as u64);
        }
        if let Some(w) = self.winner {
            h ^= zobrist::scalar(5, w as u64);
        }
        h
    }

    fn rehash(&mut self) {
        let mut h = 0;
        for (s, p) in self.piece_list() {
            h ^= zobrist::piece(p.color.index(), p.kind.index(), s.index());
        }
        self.hash = h ^ self.scalar_hash();
    }

    /// Square of the pawn that created the current en-passant target.
    fn ep_pawn_square(target: Square) -> Square {
        if target.rank() == 2 {
            Square::new(target.file(), 3)
        } else {
            Square::new(target.file(), 4)
        }
    }

    /// Color whose double push created `target`.
    #[inline]
    pub(crate) fn ep_pusher(target: Square) -> Color {
        if target.rank() == 2 {
            Color::White
        } else {
            Color::Black
        }
    }

    /// Applies a move produced by the move generator for this position. No
    /// legality checking is done here; see [`crate::rules::apply_move`].
    pub fn make(&mut self, mv: Move) -> UndoToken {
        let hash_before = self.hash;
        let old_scalar = self.scalar_hash();
        let mut token = UndoToken {
            mv,
            moved: self.mailbox[mv.from.index()].expect("move from empty square"),
            captured: None,
            castling: self.castling,
            en_passant: self.en_passant,
            side_to_move: self.side_to_move,
            moves_remaining: self.moves_remaining,
            winner: self.winner,
            hash_before,
            hash_after: 0,
        };
        let us = self.side_to_move;

        let capture_sq = if mv.kind == MoveKind::EnPassant {
            Some(Square::new(mv.to.file(), mv.from.rank()))
        } else if self.mailbox[mv.to.index()].is_some() {
            Some(mv.to)
        } else {
            None
        };
        if let Some(cs) = capture_sq {
            let victim = self.take(cs);
            token.captured = Some((victim, cs));
        }

        let moved = self.take(mv.from);
        let placed = match mv.promotion {
            Some(kind) => Piece::new(moved.color, kind),
            None => moved,
        };
        self.put(mv.to, placed);

        match mv.kind {
            MoveKind::CastleKingside => {
                let r = mv.from.rank();
                let rook = self.take(Square::new(7, r));
                self.put(Square::new(5, r), rook);
            }
            MoveKind::CastleQueenside => {
                let r = mv.from.rank();
                let rook = self.take(Square::new(0, r));
                self.put(Square::new(3, r), rook);
            }
            _ => {}
        }

        self.castling = CastlingRights::from_bits(
            self.castling.bits() & !(CastlingRights::cleared_by(mv.from) | CastlingRights::cleared_by(mv.to)),
        );

        match self.ep_rule {
            EpRule::Strict => self.en_passant = None,
            EpRule::Loose => {
                if let Some(t) = self.en_passant {
                    let pawn = Self::ep_pawn_square(t);
                    if mv.from == pawn || capture_sq == Some(pawn) {
                        self.en_passant = None;
                    }
                }
            }
        }
        if mv.kind == MoveKind::DoublePawnPush {
            self.en_passant = Some(Square::new(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2));
        }

        if matches!(token.captured, Some((p, _)) if p.kind == PieceKind::King) {
            self.winner = Some(us);
            self.side_to_move = us.opponent();
            self.moves_remaining = 0;
        } else {
            self.moves_remaining -= 1;
            if self.moves_remaining == 0 || !movegen::has_any_move(self, us) {
                self.end_turn();
            }
        }

        self.hash ^= old_scalar ^ self.scalar_hash();
        token.hash_after = self.hash;
        token
    }

    /// Hands the move to the opponent. A side with no move at all forfeits its
    /// whole turn; if neither side can move the position is left as it is.
    fn end_turn(&mut self) {
        for _ in 0..2 {
            let finished = self.side_to_move;
            if self.ep_rule == EpRule::Loose {
                if let Some(t) = self.en_passant {
                    if Self::ep_pusher(t) != finished {
                        self.en_passant = None;
                    }
                }
            }
            self.side_to_move = finished.opponent();
            self.moves_remaining = self.config.allowance(self.side_to_move);
            if movegen::has_any_move(self, self.side_to_move) {
                return;
            }
        }
    }

    /// Exact inverse of [`Position::make`].
    pub fn unmake(&mut self, mv: Move, token: &UndoToken) -> Result<(), TokenMismatch> {
        if token.mv != mv || token.hash_after != self.hash {
            return Err(TokenMismatch(mv));
        }
        match mv.kind {
            MoveKind::CastleKingside => {
                let r = mv.from.rank();
                let rook = self.take(Square::new(5, r));
                self.put(Square::new(7, r), rook);
            }
            MoveKind::CastleQueenside => {
                let r = mv.from.rank();
                let rook = self.take(Square::new(3, r));
                self.put(Square::new(0, r), rook);
            }
            _ => {}
        }
        self.take(mv.to);
        self.put(mv.from, token.moved);
        if let Some((victim, cs)) = token.captured {
            self.put(cs, victim);
        }
        self.castling = token.castling;
        self.en_passant = token.en_passant;
        self.side_to_move = token.side_to_move;
        self.moves_remaining = token.moves_remaining;
        self.winner = token.winner;
        self.hash = token.hash_before;
        debug_assert_eq!(self.hash, {
            let mut c = *self;
            c.rehash();
            c.hash
        });
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn recomputed_hash(&self) -> u64 {
        let mut c = *self;
        c.rehash();
        c.hash
    }
}

/// Validating constructor for arbitrary positions.
#[derive(Clone, Debug)]
pub struct PositionBuilder {
    config: TurnConfig,
    pieces: Vec<(Square, Piece)>,
    side_to_move: Color,
    moves_remaining: Option<u32>,
    castling: CastlingRights,
    en_passant: Option<Square>,
    ep_rule: EpRule,
}

impl PositionBuilder {
    pub fn new(config: TurnConfig) -> Self {
        PositionBuilder {
            config,
            pieces: Vec::new(),
            side_to_move: Color::White,
            moves_remaining: None,
            castling: CastlingRights::NONE,
            en_passant: None,
            ep_rule: EpRule::Strict,
        }
    }

    /// Places a piece, replacing whatever stood there.
    pub fn piece(mut self, sq: Square, piece: Piece) -> Self {
        self.pieces.retain(|(s, _)| *s != sq);
        self.pieces.push((sq, piece));
        self
    }

    pub fn side_to_move(mut self, color: Color) -> Self {
        self.side_to_move = color;
        self
    }

    /// Defaults to the full allowance of the side to move.
    pub fn moves_remaining(mut self, n: u32) -> Self {
        self.moves_remaining = Some(n);
        self
    }

    pub fn castling(mut self, rights: CastlingRights) -> Self {
        self.castling = rights;
        self
    }

    pub fn en_passant(mut self, target: Option<Square>) -> Self {
        self.en_passant = target;
        self
    }

    pub fn ep_rule(mut self, rule: EpRule) -> Self {
        self.ep_rule = rule;
        self
    }

    pub fn build(self) -> Result<Position, PositionError> {
        let mut p = Position::empty(self.config);
        for (s, piece) in &self.pieces {
            if piece.kind == PieceKind::Pawn && (s.rank() == 0 || s.rank() == 7) {
                return Err(PositionError::PawnOnBackRank(*s));
            }
            p.put(*s, *piece);
        }
        for color in Color::ALL {
            let n = p.color_set(color).len();
            if n > 16 {
                return Err(PositionError::TooManyPieces(color, n));
            }
            let pawns = p.pieces(color, PieceKind::Pawn).len();
            if pawns > 8 {
                return Err(PositionError::TooManyPawns(color, pawns));
            }
            if p.pieces(color, PieceKind::King).len() > 1 {
                return Err(PositionError::ExtraKing(color));
            }
        }
        p.winner = p.winner_from_board()?;

        for (ch, color, kingside) in [
            ('K', Color::White, true),
            ('Q', Color::White, false),
            ('k', Color::Black, true),
            ('q', Color::Black, false),
        ] {
            if !self.castling.has(color, kingside) {
                continue;
            }
            let rank = if color == Color::White { 0 } else { 7 };
            let king_ok = p.piece_at(Square::new(4, rank)) == Some(Piece::new(color, PieceKind::King));
            let rook_file = if kingside { 7 } else { 0 };
            let rook_ok = p.piece_at(Square::new(rook_file, rank)) == Some(Piece::new(color, PieceKind::Rook));
            if !(king_ok && rook_ok) {
                return Err(PositionError::BadCastlingRight(ch));
            }
        }
        p.castling = self.castling;

        if let Some(t) = self.en_passant {
            if t.rank() != 2 && t.rank() != 5 {
                return Err(PositionError::BadEnPassantRank(t));
            }
            let pusher = Position::ep_pusher(t);
            let pawn_sq = Position::ep_pawn_square(t);
            let behind = Square::new(t.file(), if pusher == Color::White { 1 } else { 6 });
            // Under the loose rule the pusher may since have moved other
            // pieces onto the squares the pawn passed over.
            let passed_clear =
                self.ep_rule == EpRule::Loose || (p.piece_at(t).is_none() && p.piece_at(behind).is_none());
            if p.piece_at(pawn_sq) != Some(Piece::new(pusher, PieceKind::Pawn)) || !passed_clear {
                return Err(PositionError::BadEnPassantTarget(t));
            }
        }
        p.en_passant = self.en_passant;
        p.ep_rule = self.ep_rule;
        p.side_to_move = self.side_to_move;

        let allowance = self.config.allowance(self.side_to_move) as u32;
        let remaining = self
            .moves_remaining
            .unwrap_or(if p.winner.is_some() { 0 } else { allowance });
        if remaining > allowance {
            return Err(PositionError::MovesRemainingTooLarge { remaining, allowance });
        }
        if remaining == 0 && p.winner.is_none() {
            return Err(PositionError::NoMovesRemaining);
        }
        p.moves_remaining = remaining as u8;
        p.rehash();
        Ok(p)
    }
}
