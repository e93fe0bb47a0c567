//! Text formats: extended FEN (XFen), long-algebraic move text and the game
//! record file.
//!
//! XFen is standard FEN followed by three decimal fields: plies remaining in
//! the current turn, `i` and `j`:
//!
//! ```text
//! rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1 2 2 1
//! ```
//!
//! An optional tenth field `ep-loose` selects the loose en-passant rule; it is
//! omitted for the default strict rule. The halfmove and fullmove fields are
//! accepted but not tracked (they are written as `0 1`).
//!
//! Move text is `<from><to>[nbrq]`; castling is written as the king move
//! (`e1g1`, `e1c1`, `e8g8`, `e8c8`).
//!
//! A record file is line oriented:
//!
//! ```text
//! mmchess-record 1
//! config 2 1
//! xfen rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1 2 2 1
//! w b1a3 a3b5
//! b e7e6
//! w b5c7 c7e8
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::position::{CastlingRights, Position, PositionBuilder, PositionError};
use crate::record::{GameRecord, ReplayError, Turn};
use crate::rules::{self, IllegalMove};
use crate::types::{Color, EpRule, Move, Piece, PieceKind, Square, TurnConfig};

pub const RECORD_MAGIC: &str = "mmchess-record";
pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("xfen error at byte {offset}: {reason}")]
pub struct XFenError {
    pub offset: usize,
    pub reason: String,
}

fn xerr<T>(offset: usize, reason: impl Into<String>) -> Result<T, XFenError> {
    Err(XFenError {
        offset,
        reason: reason.into(),
    })
}

/// Splits on ASCII spaces, keeping each field's byte offset.
fn fields(text: &[u8]) -> Vec<(usize, &[u8])> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &b) in text.iter().enumerate() {
        if b == b' ' || b == b'\t' {
            if let Some(s) = start.take() {
                out.push((s, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

fn parse_number(offset: usize, field: &[u8], what: &str) -> Result<u32, XFenError> {
    if field.is_empty() || field.len() > 9 || !field.iter().all(u8::is_ascii_digit) {
        return xerr(offset, format!("{what} must be a decimal number"));
    }
    Ok(field.iter().fold(0u32, |acc, d| acc * 10 + (d - b'0') as u32))
}

fn parse_board(offset: usize, field: &[u8]) -> Result<Vec<(Square, Piece)>, XFenError> {
    let mut pieces = Vec::new();
    let mut rank: i32 = 7;
    let mut file: i32 = 0;
    for (i, &b) in field.iter().enumerate() {
        let at = offset + i;
        match b {
            b'/' => {
                if file != 8 {
                    return xerr(at, format!("rank {} does not have 8 squares", rank + 1));
                }
                rank -= 1;
                file = 0;
                if rank < 0 {
                    return xerr(at, "more than 8 ranks");
                }
            }
            b'1'..=b'8' => {
                file += (b - b'0') as i32;
                if file > 8 {
                    return xerr(at, format!("rank {} has more than 8 squares", rank + 1));
                }
            }
            _ => {
                let Some(piece) = Piece::from_fen_char(b as char).filter(|_| b.is_ascii_alphabetic()) else {
                    return xerr(at, format!("unexpected character {:?}", b as char));
                };
                if file >= 8 {
                    return xerr(at, format!("rank {} has more than 8 squares", rank + 1));
                }
                pieces.push((Square::new(file as u8, rank as u8), piece));
                file += 1;
            }
        }
    }
    if rank != 0 || file != 8 {
        return xerr(offset + field.len(), "board must describe exactly 8 ranks of 8 squares");
    }
    Ok(pieces)
}

fn parse_castling(offset: usize, field: &[u8]) -> Result<CastlingRights, XFenError> {
    if field == b"-" {
        return Ok(CastlingRights::NONE);
    }
    let mut bits = 0u8;
    for (i, &b) in field.iter().enumerate() {
        let flag = match b {
            b'K' => CastlingRights::WHITE_KINGSIDE,
            b'Q' => CastlingRights::WHITE_QUEENSIDE,
            b'k' => CastlingRights::BLACK_KINGSIDE,
            b'q' => CastlingRights::BLACK_QUEENSIDE,
            _ => return xerr(offset + i, format!("bad castling flag {:?}", b as char)),
        };
        if bits & flag != 0 {
            return xerr(offset + i, "repeated castling flag");
        }
        bits |= flag;
    }
    Ok(CastlingRights::from_bits(bits))
}

/// Parses an XFen string (default en-passant rule unless the optional tenth
/// field says otherwise).
pub fn parse_xfen(text: &str) -> Result<Position, XFenError> {
    parse_xfen_bytes(text.as_bytes())
}

pub fn parse_xfen_bytes(text: &[u8]) -> Result<Position, XFenError> {
    if let Some(i) = text
        .iter()
        .position(|b| !b.is_ascii() || (b.is_ascii_control() && *b != b'\t'))
    {
        return xerr(i, "non-printable or non-ASCII byte");
    }
    let f = fields(text);
    if f.len() < 9 {
        return xerr(text.len(), format!("expected 9 fields, found {}", f.len()));
    }
    if f.len() > 10 {
        return xerr(f[10].0, "unexpected trailing field");
    }
    let pieces = parse_board(f[0].0, f[0].1)?;
    let side = match f[1].1 {
        b"w" => Color::White,
        b"b" => Color::Black,
        _ => return xerr(f[1].0, "side to move must be `w` or `b`"),
    };
    let castling = parse_castling(f[2].0, f[2].1)?;
    let ep = match f[3].1 {
        b"-" => None,
        s => match std::str::from_utf8(s).ok().and_then(|s| s.parse::<Square>().ok()) {
            Some(sq) => Some(sq),
            None => return xerr(f[3].0, "bad en-passant square"),
        },
    };
    parse_number(f[4].0, f[4].1, "halfmove clock")?;
    parse_number(f[5].0, f[5].1, "fullmove number")?;
    let remaining = parse_number(f[6].0, f[6].1, "moves remaining")?;
    let i = parse_number(f[7].0, f[7].1, "white moves per turn")?;
    let j = parse_number(f[8].0, f[8].1, "black moves per turn")?;
    let config = TurnConfig::new(i, j).map_err(|e| XFenError {
        offset: f[7].0,
        reason: e.to_string(),
    })?;
    let rule = match f.get(9) {
        None => EpRule::Strict,
        Some((_, b"ep-strict")) => EpRule::Strict,
        Some((_, b"ep-loose")) => EpRule::Loose,
        Some((off, _)) => return xerr(*off, "unknown rule field (expected ep-strict or ep-loose)"),
    };

    let mut b = PositionBuilder::new(config)
        .side_to_move(side)
        .castling(castling)
        .en_passant(ep)
        .ep_rule(rule)
        .moves_remaining(remaining);
    for (s, p) in pieces {
        b = b.piece(s, p);
    }
    b.build().map_err(|e| {
        let offset = match e {
            PositionError::BadCastlingRight(_) => f[2].0,
            PositionError::BadEnPassantRank(_) | PositionError::BadEnPassantTarget(_) => f[3].0,
            PositionError::MovesRemainingTooLarge { .. } | PositionError::NoMovesRemaining => f[6].0,
            _ => f[0].0,
        };
        XFenError {
            offset,
            reason: e.to_string(),
        }
    })
}

/// Plain-text board, rank 8 at the top, White in upper case, with file
/// letters underneath.
pub fn board_diagram(pos: &Position) -> String {
    let mut s = String::new();
    for rank in (0..8).rev() {
        let _ = write!(s, "{} ", rank + 1);
        for file in 0..8 {
            let sq = Square::try_new(file, rank).expect("on board");
            s.push(' ');
            s.push(pos.piece_at(sq).map_or('.', |p| p.fen_char()));
        }
        s.push('\n');
    }
    s.push_str("   a b c d e f g h\n");
    s
}

pub fn to_xfen(pos: &Position) -> String {
    let mut s = String::with_capacity(90);
    for rank in (0..8u8).rev() {
        let mut empty = 0;
        for file in 0..8u8 {
            match pos.piece_at(Square::new(file, rank)) {
                Some(p) => {
                    if empty > 0 {
                        let _ = write!(s, "{empty}");
                        empty = 0;
                    }
                    s.push(p.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            let _ = write!(s, "{empty}");
        }
        if rank > 0 {
            s.push('/');
        }
    }
    s.push(' ');
    s.push(pos.side_to_move().letter());
    s.push(' ');
    let c = pos.castling();
    if c.bits() == 0 {
        s.push('-');
    } else {
        for (ch, color, ks) in [
            ('K', Color::White, true),
            ('Q', Color::White, false),
            ('k', Color::Black, true),
            ('q', Color::Black, false),
        ] {
            if c.has(color, ks) {
                s.push(ch);
            }
        }
    }
    match pos.en_passant() {
        Some(t) => {
            let _ = write!(s, " {t}");
        }
        None => s.push_str(" -"),
    }
    let cfg = pos.config();
    let _ = write!(
        s,
        " 0 1 {} {} {}",
        pos.moves_remaining(),
        cfg.white_moves_per_turn(),
        cfg.black_moves_per_turn()
    );
    if pos.ep_rule() == EpRule::Loose {
        s.push_str(" ep-loose");
    }
    s
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveTextError {
    #[error("malformed move text `{0}`")]
    Malformed(String),
    #[error(transparent)]
    Illegal(#[from] IllegalMove),
}

/// Splits `e7e8q` into its parts without consulting a position.
pub fn split_move_text(text: &str) -> Result<(Square, Square, Option<PieceKind>), MoveTextError> {
    let bad = || MoveTextError::Malformed(text.to_string());
    if !text.is_ascii() || !(4..=5).contains(&text.len()) {
        return Err(bad());
    }
    let from: Square = text[0..2].parse().map_err(|_| bad())?;
    let to: Square = text[2..4].parse().map_err(|_| bad())?;
    let promotion = match text.as_bytes().get(4) {
        None => None,
        Some(b) => match PieceKind::from_letter(*b as char) {
            Some(k) if PieceKind::PROMOTIONS.contains(&k) && b.is_ascii_lowercase() => Some(k),
            _ => return Err(bad()),
        },
    };
    Ok((from, to, promotion))
}

/// Resolves one move token against `pos`.
pub fn parse_move(text: &str, pos: &Position) -> Result<Move, MoveTextError> {
    let (from, to, promotion) = split_move_text(text)?;
    Ok(rules::resolve_move(pos, from, to, promotion)?)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("move {index} (`{token}`): {source}")]
pub struct MoveListError {
    pub index: usize,
    pub token: String,
    #[source]
    pub source: MoveTextError,
}

/// Parses a whitespace-separated move list, applying each move in turn.
pub fn parse_moves(text: &str, pos: &Position) -> Result<Vec<Move>, MoveListError> {
    let mut cur = *pos;
    let mut out = Vec::new();
    for (index, token) in text.split_whitespace().enumerate() {
        let mv = parse_move(token, &cur).map_err(|source| MoveListError {
            index,
            token: token.to_string(),
            source,
        })?;
        cur.make(mv);
        out.push(mv);
    }
    Ok(out)
}

pub fn moves_to_text(moves: &[Move]) -> String {
    moves.iter().map(Move::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordParseError {
    #[error("line {line}: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Xfen {
        line: usize,
        #[source]
        source: XFenError,
    },
    #[error("turn {turn} (line {line}): {reason}")]
    Turn { turn: usize, line: usize, reason: String },
    #[error("turn {turn}: replay failed: {source}")]
    Replay {
        turn: usize,
        #[source]
        source: ReplayError,
    },
}

impl RecordParseError {
    pub fn turn(&self) -> Option<usize> {
        match self {
            RecordParseError::Turn { turn, .. } | RecordParseError::Replay { turn, .. } => Some(*turn),
            _ => None,
        }
    }
}

pub fn serialize_record(record: &GameRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{RECORD_MAGIC} {RECORD_VERSION}");
    let _ = writeln!(
        s,
        "config {} {}",
        record.turn_config.white_moves_per_turn(),
        record.turn_config.black_moves_per_turn()
    );
    let _ = writeln!(s, "xfen {}", to_xfen(&record.initial_position));
    for turn in &record.turns {
        let _ = writeln!(s, "{} {}", turn.color.letter(), moves_to_text(&turn.moves));
    }
    s
}

/// Parses and replays a record; every turn is validated against the rules.
pub fn parse_record(text: &str) -> Result<GameRecord, RecordParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let header = |line: usize, reason: &str| RecordParseError::Header {
        line,
        reason: reason.to_string(),
    };

    let (n, magic) = lines.next().ok_or_else(|| header(1, "empty record"))?;
    let mut parts = magic.split_whitespace();
    if parts.next() != Some(RECORD_MAGIC) {
        return Err(header(n, "missing `mmchess-record` header"));
    }
    match parts.next().map(str::parse::<u32>) {
        Some(Ok(RECORD_VERSION)) => {}
        _ => return Err(header(n, "unsupported record version")),
    }

    let (n, config_line) = lines.next().ok_or_else(|| header(n + 1, "missing config line"))?;
    let nums: Vec<&str> = config_line.split_whitespace().collect();
    let config = match nums.as_slice() {
        ["config", i, j] => match (i.parse::<u32>(), j.parse::<u32>()) {
            (Ok(i), Ok(j)) => TurnConfig::new(i, j).map_err(|e| header(n, &e.to_string()))?,
            _ => return Err(header(n, "config values must be integers")),
        },
        _ => return Err(header(n, "expected `config <i> <j>`")),
    };

    let (n, xfen_line) = lines.next().ok_or_else(|| header(n + 1, "missing xfen line"))?;
    let Some(xfen) = xfen_line.strip_prefix("xfen ") else {
        return Err(header(n, "expected `xfen <position>`"));
    };
    let initial = parse_xfen(xfen).map_err(|source| RecordParseError::Xfen { line: n, source })?;
    if initial.config() != config {
        return Err(header(n, "xfen allowances differ from the config line"));
    }

    let mut record = GameRecord::new(initial);
    let mut pos = initial;
    for (turn, (line, text)) in lines.enumerate() {
        let mut tokens = text.split_whitespace();
        let color = match tokens.next() {
            Some("w") => Color::White,
            Some("b") => Color::Black,
            _ => {
                return Err(RecordParseError::Turn {
                    turn,
                    line,
                    reason: "turn line must start with `w` or `b`".into(),
                })
            }
        };
        if pos.is_terminal() || pos.side_to_move() != color {
            return Err(RecordParseError::Replay {
                turn,
                source: ReplayError::WrongSide { turn, color },
            });
        }
        let mut moves = Vec::new();
        let mut cur = pos;
        for (ply, token) in tokens.enumerate() {
            if ply > 0 && (cur.is_terminal() || cur.side_to_move() != color) {
                return Err(RecordParseError::Replay {
                    turn,
                    source: ReplayError::TurnTooLong { turn },
                });
            }
            let mv = parse_move(token, &cur).map_err(|e| RecordParseError::Turn {
                turn,
                line,
                reason: format!("ply {ply} `{token}`: {e}"),
            })?;
            cur.make(mv);
            moves.push(mv);
        }
        record.turns.push(Turn { color, moves });
        pos = cur;
    }
    record.replay().map_err(|source| RecordParseError::Replay {
        turn: source.turn().unwrap_or(0),
        source,
    })?;
    Ok(record)
}
