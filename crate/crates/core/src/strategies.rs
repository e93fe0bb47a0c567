//! Scripted winning strategies, one per decided family of `(i, j)` cells,
//! and the dispatch table that picks one for a configuration.
//!
//! A script looks at the game so far and returns its side's next full turn.
//! Fixed openings are hard-coded; finishing turns ask the capture oracle. If
//! a script meets a position its plan does not cover it returns
//! [`ScriptError::OffBook`] instead of improvising; the verifier treats that
//! as a failure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::CaptureOracle;
use crate::position::Position;
use crate::record::{GameRecord, ReplayError};
use crate::rules;
use crate::types::{sq, Color, Move, PieceKind, Square, TurnConfig};

/// Stable strategy identifiers, exposed as `lemma2` … `lemma10`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StrategyId {
    L2,
    L3,
    L4,
    L5,
    L6,
    L7,
    L8,
    L9,
    L10,
}

impl StrategyId {
    pub const ALL: [StrategyId; 9] = [
        StrategyId::L2,
        StrategyId::L3,
        StrategyId::L4,
        StrategyId::L5,
        StrategyId::L6,
        StrategyId::L7,
        StrategyId::L8,
        StrategyId::L9,
        StrategyId::L10,
    ];

    pub fn number(self) -> u32 {
        self as u32 + 2
    }

    pub fn from_number(n: u32) -> Option<StrategyId> {
        StrategyId::ALL.get(n.checked_sub(2)? as usize).copied()
    }

    pub fn as_str(self) -> &'static str {
        [
            "lemma2", "lemma3", "lemma4", "lemma5", "lemma6", "lemma7", "lemma8", "lemma9", "lemma10",
        ][self as usize]
    }

    pub fn side(self) -> Color {
        match self {
            StrategyId::L2 | StrategyId::L3 | StrategyId::L4 | StrategyId::L5 | StrategyId::L6 => Color::White,
            _ => Color::Black,
        }
    }

    /// The cells this strategy is verified on. Families are checked at their
    /// smallest instance: extra moves for the winner go unused.
    pub fn verification_configs(self) -> Vec<TurnConfig> {
        match self {
            StrategyId::L2 => vec![TurnConfig::of(2, 1)],
            StrategyId::L3 => vec![TurnConfig::of(3, 1)],
            StrategyId::L4 => vec![TurnConfig::of(3, 2)],
            StrategyId::L5 => vec![TurnConfig::of(3, 3)],
            StrategyId::L6 => vec![TurnConfig::of(4, 1)],
            StrategyId::L7 => vec![TurnConfig::of(1, 2)],
            StrategyId::L8 => vec![TurnConfig::of(1, 3)],
            StrategyId::L9 => vec![TurnConfig::of(2, 3)],
            StrategyId::L10 => vec![TurnConfig::of(1, 4), TurnConfig::of(2, 4), TurnConfig::of(3, 4)],
        }
    }

    /// Human-readable description of the cells covered.
    pub fn coverage(self) -> &'static str {
        match self {
            StrategyId::L2 => "(2,1)",
            StrategyId::L3 => "(3,1)",
            StrategyId::L4 => "(3,2)",
            StrategyId::L5 => "(3,3)",
            StrategyId::L6 => "(i,j) with i >= 4",
            StrategyId::L7 => "(1,2)",
            StrategyId::L8 => "(1,3)",
            StrategyId::L9 => "(2,3)",
            StrategyId::L10 => "(i,j) with i <= 3 and j >= 4",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            StrategyId::L2 => "Nb1-a3-b5, then Nb5-c7xe8",
            StrategyId::L3 => "Nb1-a3-b5 and h2-h3, then Nb5-c7xe8",
            StrategyId::L4 => "Nb1-c3, e2-e3, Qd1-f3, then capture within three",
            StrategyId::L5 => "e2-e3, Qd1-f3, Nb1-c3, then capture within three",
            StrategyId::L6 => "Nb1-a3-b5-c7xe8 in the first turn",
            StrategyId::L7 => "knight or queen attack chosen by White's first move, then capture within two",
            StrategyId::L8 => "Nb8-c6, Ng8-f6, a7-a6, then capture within three",
            StrategyId::L9 => "opening chosen by White's first turn, then capture within three",
            StrategyId::L10 => "capture within four with the knights on the first turn",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy `{0}` (expected lemma2 … lemma10)")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyId {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("lemma").unwrap_or(s);
        digits
            .parse::<u32>()
            .ok()
            .and_then(StrategyId::from_number)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

impl From<StrategyId> for String {
    fn from(id: StrategyId) -> String {
        id.as_str().to_string()
    }
}

impl TryFrom<String> for StrategyId {
    type Error = UnknownStrategy;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Sub-case labels used by the strategies that branch on White's opening.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpeningClass {
    /// (1,2): a-, b-, c-, g- or h-pawn, or the b1 knight moved.
    A,
    /// (1,2): f-pawn or the g1 knight moved.
    B,
    /// (1,2): d-pawn moved.
    C,
    /// (1,2): e-pawn moved.
    D,
    /// (2,3): b1 knight on a4.
    A1,
    /// (2,3): b1 knight on b5, c4, d5 or e4.
    A2,
    /// (2,3): queen on f3.
    B1,
    /// (2,3): queen on g4.
    B2,
    /// (2,3): queen on h5.
    B3,
    /// (2,3): c-pawn on c3 and queen on b3.
    C3,
    /// (2,3): anything else.
    Standard,
}

impl OpeningClass {
    pub fn label(self) -> &'static str {
        match self {
            OpeningClass::A => "A",
            OpeningClass::B => "B",
            OpeningClass::C | OpeningClass::C3 => "C",
            OpeningClass::D => "D",
            OpeningClass::A1 => "A1",
            OpeningClass::A2 => "A2",
            OpeningClass::B1 => "B1",
            OpeningClass::B2 => "B2",
            OpeningClass::B3 => "B3",
            OpeningClass::Standard => "Standard",
        }
    }
}

impl fmt::Display for OpeningClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("{0} does not branch on the opening")]
    NoClasses(StrategyId),
    #[error("record has no complete first White turn")]
    NotAtDecisionPoint,
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("off book: {reason}")]
    OffBook { reason: String, record: Box<GameRecord> },
    #[error("it is not {0}'s turn")]
    NotOurTurn(Color),
    #[error("script {0} does not cover the cell {1}")]
    WrongConfig(StrategyId, TurnConfig),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// Scratch state shared by consecutive script calls.
#[derive(Default)]
pub struct ScriptContext {
    pub oracle: CaptureOracle,
}

/// A deterministic turn-by-turn decision procedure for one side.
pub trait Script: Send + Sync {
    fn id(&self) -> StrategyId;

    fn side(&self) -> Color;

    /// The next full turn. `pos` is the result of replaying `record`, and it
    /// is this script's side to move at the start of a turn.
    fn decide(&self, ctx: &mut ScriptContext, record: &GameRecord, pos: &Position) -> Result<Vec<Move>, ScriptError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StrategyScript {
    pub id: StrategyId,
    pub side: Color,
}

impl StrategyScript {
    pub fn new(id: StrategyId) -> StrategyScript {
        StrategyScript { id, side: id.side() }
    }

    /// Whether this script is meant for `config`.
    pub fn covers(&self, config: TurnConfig) -> bool {
        strategy_for(config).map(|s| s.id) == Some(self.id)
    }
}

/// The strategy that wins `config`, or `None` for the open cells (1,1) and
/// (2,2). White wins iff `i >= min(j, 4)`.
pub fn strategy_for(config: TurnConfig) -> Option<StrategyScript> {
    let (i, j) = (config.white_moves_per_turn(), config.black_moves_per_turn());
    let id = match (i, j) {
        (1, 1) | (2, 2) => return None,
        _ if i >= 4 => StrategyId::L6,
        (3, 3) => StrategyId::L5,
        (3, 2) => StrategyId::L4,
        (3, 1) => StrategyId::L3,
        (2, 1) => StrategyId::L2,
        _ if j >= 4 => StrategyId::L10,
        (1, 2) => StrategyId::L7,
        (1, 3) => StrategyId::L8,
        (2, 3) => StrategyId::L9,
        _ => unreachable!("every cell is covered"),
    };
    Some(StrategyScript::new(id))
}

/// Replays `record` and asks `script` for its next turn.
pub fn next_turn(script: &dyn Script, record: &GameRecord) -> Result<Vec<Move>, ScriptError> {
    let pos = record.replay()?;
    if pos.is_terminal() || pos.side_to_move() != script.side() {
        return Err(ScriptError::NotOurTurn(script.side()));
    }
    script.decide(&mut ScriptContext::default(), record, &pos)
}

/// Sub-case of `record`'s opening for strategies that branch on it.
pub fn classify_opening(id: StrategyId, record: &GameRecord) -> Result<OpeningClass, ClassifyError> {
    if !matches!(id, StrategyId::L7 | StrategyId::L9) {
        return Err(ClassifyError::NoClasses(id));
    }
    let first = match record.turns.first() {
        Some(t) if t.color == Color::White && !t.moves.is_empty() => t,
        _ => return Err(ClassifyError::NotAtDecisionPoint),
    };
    let after = record.truncated(1).replay()?;
    if after.side_to_move() == Color::White && !after.is_terminal() {
        return Err(ClassifyError::NotAtDecisionPoint);
    }
    Ok(match id {
        StrategyId::L7 => classify_single_move(first.moves[0]),
        _ => classify_two_moves(&after),
    })
}

fn classify_single_move(mv: Move) -> OpeningClass {
    match mv.from.to_string().as_str() {
        "d2" => OpeningClass::C,
        "e2" => OpeningClass::D,
        "f2" | "g1" => OpeningClass::B,
        _ => OpeningClass::A,
    }
}

fn classify_two_moves(pos: &Position) -> OpeningClass {
    let knights = pos.pieces(Color::White, PieceKind::Knight);
    let queens = pos.pieces(Color::White, PieceKind::Queen);
    let has_pawn = |s: &str| pos.pieces(Color::White, PieceKind::Pawn).contains(sq(s));
    if knights.contains(sq("a4")) {
        OpeningClass::A1
    } else if ["b5", "c4", "d5", "e4"].iter().any(|s| knights.contains(sq(s))) {
        OpeningClass::A2
    } else if queens.contains(sq("f3")) {
        OpeningClass::B1
    } else if queens.contains(sq("g4")) {
        OpeningClass::B2
    } else if queens.contains(sq("h5")) {
        OpeningClass::B3
    } else if queens.contains(sq("b3")) && has_pawn("c3") && !has_pawn("c2") {
        OpeningClass::C3
    } else {
        OpeningClass::Standard
    }
}

fn off_book(record: &GameRecord, reason: impl Into<String>) -> ScriptError {
    ScriptError::OffBook {
        reason: reason.into(),
        record: Box::new(record.clone()),
    }
}

/// Resolves a fixed line against `pos`, move by move.
fn fixed_line(record: &GameRecord, pos: &Position, line: &[&str]) -> Result<Vec<Move>, ScriptError> {
    let mut p = *pos;
    let mut out = Vec::with_capacity(line.len());
    for text in line {
        let (from, to, promo) = crate::notation::split_move_text(text).expect("well-formed script move");
        let mv = rules::resolve_move(&p, from, to, promo).map_err(|e| {
            off_book(
                record,
                format!("prescribed move {text} is not playable: {}", e.reason.code()),
            )
        })?;
        p.make(mv);
        out.push(mv);
    }
    Ok(out)
}

fn capture_within(
    ctx: &mut ScriptContext,
    record: &GameRecord,
    pos: &Position,
    side: Color,
    k: u32,
) -> Result<Vec<Move>, ScriptError> {
    match ctx.oracle.witness(pos, side, k) {
        Ok(Some(w)) => Ok(w.moves),
        Ok(None) => Err(off_book(record, format!("no king capture within {k}"))),
        Err(e) => Err(off_book(record, e.to_string())),
    }
}

fn try_capture_within(ctx: &mut ScriptContext, pos: &Position, side: Color, k: u32) -> Option<Vec<Move>> {
    ctx.oracle.witness(pos, side, k).ok().flatten().map(|w| w.moves)
}

impl Script for StrategyScript {
    fn id(&self) -> StrategyId {
        self.id
    }

    fn side(&self) -> Color {
        self.side
    }

    fn decide(&self, ctx: &mut ScriptContext, record: &GameRecord, pos: &Position) -> Result<Vec<Move>, ScriptError> {
        let turn = record.turns_by(self.side);
        let allowance = pos.config().allowance(self.side) as u32;
        match self.id {
            StrategyId::L2 => match turn {
                0 => fixed_line(record, pos, &["b1a3", "a3b5"]),
                1 => fixed_line(record, pos, &["b5c7", "c7e8"]),
                _ => Err(off_book(record, "the line should already have won")),
            },
            StrategyId::L3 => match turn {
                0 => fixed_line(record, pos, &["b1a3", "a3b5", "h2h3"]),
                1 => fixed_line(record, pos, &["b5c7", "c7e8"]),
                _ => Err(off_book(record, "the line should already have won")),
            },
            StrategyId::L4 => match turn {
                0 => fixed_line(record, pos, &["b1c3", "e2e3", "d1f3"]),
                _ => capture_within(ctx, record, pos, self.side, 3),
            },
            StrategyId::L5 => match turn {
                0 => fixed_line(record, pos, &["e2e3", "d1f3", "b1c3"]),
                _ => capture_within(ctx, record, pos, self.side, 3),
            },
            StrategyId::L6 => match turn {
                0 => fixed_line(record, pos, &["b1a3", "a3b5", "b5c7", "c7e8"]),
                _ => Err(off_book(record, "the line should already have won")),
            },
            StrategyId::L7 => self.decide_one_two(ctx, record, pos, turn),
            StrategyId::L8 => match turn {
                0 => fixed_line(record, pos, &["b8c6", "g8f6", "a7a6"]),
                _ => capture_within(ctx, record, pos, self.side, 3),
            },
            StrategyId::L9 => match turn {
                0 => self.open_two_three(record, pos),
                _ => capture_within(ctx, record, pos, self.side, 3),
            },
            StrategyId::L10 => capture_within(ctx, record, pos, self.side, allowance),
        }
    }
}

impl StrategyScript {
    fn decide_one_two(
        &self,
        ctx: &mut ScriptContext,
        record: &GameRecord,
        pos: &Position,
        turn: usize,
    ) -> Result<Vec<Move>, ScriptError> {
        let class = classify_opening(self.id, record).map_err(|e| off_book(record, e.to_string()))?;
        if turn == 0 {
            return match class {
                OpeningClass::A | OpeningClass::D => fixed_line(record, pos, &["b8c6", "c6e5"]),
                OpeningClass::B => fixed_line(record, pos, &["b8c6", "c6b4"]),
                OpeningClass::C => fixed_line(record, pos, &["c7c5", "d8a5"]),
                other => unreachable!("single-move class {other}"),
            };
        }
        if let Some(line) = try_capture_within(ctx, pos, self.side, 2) {
            return Ok(line);
        }
        // The king escaped to e2: bring the c8 bishop to g4 behind d7-d6.
        if class == OpeningClass::D && turn == 1 && pos.king_square(Color::White) == Some(sq("e2")) {
            return fixed_line(record, pos, &["d7d6", "c8g4"]);
        }
        Err(off_book(record, "no king capture within 2"))
    }

    fn open_two_three(&self, record: &GameRecord, pos: &Position) -> Result<Vec<Move>, ScriptError> {
        let class = classify_opening(self.id, record).map_err(|e| off_book(record, e.to_string()))?;
        match class {
            OpeningClass::A1 | OpeningClass::A2 => {
                let target = ["a4", "b5", "c4", "d5", "e4"]
                    .iter()
                    .map(|s| sq(s))
                    .find(|&s| pos.pieces(Color::White, PieceKind::Knight).contains(s))
                    .expect("classified by knight square");
                let mut line = pawn_capture_path(pos, target)
                    .ok_or_else(|| off_book(record, format!("no pawn reaches {target} in two moves")))?;
                let mut p = *pos;
                for m in &line {
                    p.make(*m);
                }
                let mut rest = vec![];
                if line.len() == 1 {
                    rest.push("h7h6");
                }
                rest.push("b8c6");
                line.extend(fixed_line(record, &p, &rest)?);
                Ok(line)
            }
            OpeningClass::B1 => fixed_line(record, pos, &["e7e5", "d8f6", "b8c6"]),
            OpeningClass::B2 => fixed_line(record, pos, &["g8f6", "f6g4", "b8c6"]),
            OpeningClass::B3 => fixed_line(record, pos, &["g7g6", "b8c6", "g8f6"]),
            OpeningClass::C3 => fixed_line(record, pos, &["d7d5", "d8d6", "b8c6"]),
            _ => fixed_line(record, pos, &["e7e6", "d8f6", "b8c6"]),
        }
    }
}

/// Shortest way for one Black pawn to capture on `target` within two of its
/// own moves; ties go to the lowest file.
fn pawn_capture_path(pos: &Position, target: Square) -> Option<Vec<Move>> {
    let base = pos.single_agent(Color::Black, 2);
    let pawns: Vec<Square> = {
        let mut v: Vec<Square> = pos.pieces(Color::Black, PieceKind::Pawn).iter().collect();
        v.sort_by_key(|s| (s.file(), std::cmp::Reverse(s.rank())));
        v
    };
    for len in 1..=2 {
        for &from in &pawns {
            if let Some(path) = pawn_path(&base, from, target, len) {
                return Some(path);
            }
        }
    }
    None
}

fn pawn_path(p: &Position, at: Square, target: Square, len: u32) -> Option<Vec<Move>> {
    for mv in rules::legal_moves(p).into_iter().filter(|m| m.from == at) {
        if len == 1 {
            if mv.to == target && mv.kind.is_capture() {
                return Some(vec![mv]);
            }
            continue;
        }
        let mut q = *p;
        q.make(mv);
        if let Some(mut rest) = pawn_path(&q, mv.to, target, len - 1) {
            rest.insert(0, mv);
            return Some(rest);
        }
    }
    None
}

/// Wraps a script and swaps one of its prescribed plies for another, to
/// check that verification notices.
pub struct MutatedScript {
    pub base: StrategyScript,
    /// Which of the script side's turns to alter (0-based).
    pub turn: usize,
    pub ply: usize,
    /// Replacement in move text; resolved against the position at that ply.
    pub replacement: String,
}

impl Script for MutatedScript {
    fn id(&self) -> StrategyId {
        self.base.id
    }

    fn side(&self) -> Color {
        self.base.side
    }

    fn decide(&self, ctx: &mut ScriptContext, record: &GameRecord, pos: &Position) -> Result<Vec<Move>, ScriptError> {
        let line = self.base.decide(ctx, record, pos)?;
        if record.turns_by(self.base.side) != self.turn || self.ply >= line.len() {
            return Ok(line);
        }
        let mut p = *pos;
        for m in &line[..self.ply] {
            p.make(*m);
        }
        let (from, to, promo) = crate::notation::split_move_text(&self.replacement).expect("well-formed mutation");
        let mv = rules::resolve_move(&p, from, to, promo)
            .map_err(|_| off_book(record, format!("mutated move {} is not playable", self.replacement)))?;
        // Keep the rest of the prescription where it is still playable and
        // top the turn up with canonical first moves, so the mutant always
        // plays a complete turn.
        let mut out = line[..self.ply].to_vec();
        out.push(mv);
        let mut q = p;
        q.make(mv);
        let in_turn = |q: &Position, n: usize| {
            !q.is_terminal() && q.side_to_move() == self.base.side && n < pos.moves_remaining() as usize
        };
        for m in &line[self.ply + 1..] {
            if in_turn(&q, out.len()) && rules::legal_moves(&q).contains(m) {
                q.make(*m);
                out.push(*m);
            }
        }
        while in_turn(&q, out.len()) {
            let Some(&m) = rules::legal_moves(&q).first() else {
                break;
            };
            q.make(m);
            out.push(m);
        }
        Ok(out)
    }
}
