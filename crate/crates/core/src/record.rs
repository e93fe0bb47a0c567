//! Game history: an initial position and the turns played from it.

use thiserror::Error;

use crate::position::Position;
use crate::rules::{self, IllegalMove};
use crate::types::{Color, Move, TurnConfig};

/// One side's batch of consecutive plies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Turn {
    pub color: Color,
    pub moves: Vec<Move>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub turn_config: TurnConfig,
    pub initial_position: Position,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("turn {turn}: {color} is not the side to move")]
    WrongSide { turn: usize, color: Color },
    #[error("turn {turn}, ply {ply}: {source}")]
    Illegal {
        turn: usize,
        ply: usize,
        #[source]
        source: IllegalMove,
    },
    #[error("turn {turn} has more plies than the side could play")]
    TurnTooLong { turn: usize },
    #[error("turn {turn} stops before its side's allowance without ending the game")]
    TurnIncomplete { turn: usize },
    #[error("turn {turn} is empty")]
    EmptyTurn { turn: usize },
    #[error("record config {record} differs from the initial position's {position}")]
    ConfigMismatch { record: TurnConfig, position: TurnConfig },
}

impl ReplayError {
    /// Index of the offending turn, when there is one.
    pub fn turn(&self) -> Option<usize> {
        match self {
            ReplayError::WrongSide { turn, .. }
            | ReplayError::Illegal { turn, .. }
            | ReplayError::TurnTooLong { turn }
            | ReplayError::TurnIncomplete { turn }
            | ReplayError::EmptyTurn { turn } => Some(*turn),
            ReplayError::ConfigMismatch { .. } => None,
        }
    }
}

impl GameRecord {
    pub fn new(initial_position: Position) -> GameRecord {
        GameRecord {
            turn_config: initial_position.config(),
            initial_position,
            turns: Vec::new(),
        }
    }

    /// Replays every turn and returns the final position. The last turn may
    /// be unfinished (a game in progress); earlier turns must be complete.
    pub fn replay(&self) -> Result<Position, ReplayError> {
        if self.turn_config != self.initial_position.config() {
            return Err(ReplayError::ConfigMismatch {
                record: self.turn_config,
                position: self.initial_position.config(),
            });
        }
        let mut pos = self.initial_position;
        let last = self.turns.len().saturating_sub(1);
        for (t, turn) in self.turns.iter().enumerate() {
            pos = Self::replay_turn(&pos, t, turn, t == last)?;
        }
        Ok(pos)
    }

    fn replay_turn(start: &Position, t: usize, turn: &Turn, may_be_partial: bool) -> Result<Position, ReplayError> {
        if turn.moves.is_empty() {
            return Err(ReplayError::EmptyTurn { turn: t });
        }
        if start.is_terminal() || start.side_to_move() != turn.color {
            return Err(ReplayError::WrongSide {
                turn: t,
                color: turn.color,
            });
        }
        let mut pos = *start;
        for (ply, mv) in turn.moves.iter().enumerate() {
            if ply > 0 && (pos.is_terminal() || pos.side_to_move() != turn.color) {
                return Err(ReplayError::TurnTooLong { turn: t });
            }
            pos = rules::apply_move(&pos, *mv).map_err(|source| ReplayError::Illegal { turn: t, ply, source })?;
        }
        let finished = pos.is_terminal() || pos.side_to_move() != turn.color;
        if !finished && !may_be_partial {
            return Err(ReplayError::TurnIncomplete { turn: t });
        }
        Ok(pos)
    }

    /// Appends a complete or partial turn without validation.
    pub fn push_turn(&mut self, color: Color, moves: Vec<Move>) {
        self.turns.push(Turn { color, moves });
    }

    /// Appends one ply played by `color`, extending the last turn if it
    /// belongs to the same side and is still open in `before`.
    pub fn push_ply(&mut self, before: &Position, mv: Move) {
        let color = before.side_to_move();
        let continues = match self.turns.last() {
            Some(last) => last.color == color && before.moves_remaining() < before.config().allowance(color) as u32,
            None => false,
        };
        if continues {
            self.turns.last_mut().expect("checked above").moves.push(mv);
        } else {
            self.turns.push(Turn { color, moves: vec![mv] });
        }
    }

    /// Number of turns `color` has started.
    pub fn turns_by(&self, color: Color) -> usize {
        self.turns.iter().filter(|t| t.color == color).count()
    }

    pub fn ply_count(&self) -> usize {
        self.turns.iter().map(|t| t.moves.len()).sum()
    }

    /// The first `n` turns of this record.
    pub fn truncated(&self, n: usize) -> GameRecord {
        GameRecord {
            turns: self.turns[..n.min(self.turns.len())].to_vec(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{sq, MoveKind};

    fn m(s: &str) -> Move {
        Move::new(sq(&s[..2]), sq(&s[2..4]), MoveKind::Normal)
    }

    #[test]
    fn knight_rush_replays_to_white_win() {
        let mut r = GameRecord::new(Position::initial(TurnConfig::of(4, 1)));
        r.push_turn(Color::White, vec![m("b1a3"), m("a3b5"), m("b5c7"), m("c7e8")]);
        assert_eq!(r.replay().unwrap().winner(), Some(Color::White));
    }

    #[test]
    fn replay_errors_name_the_turn() {
        let mut r = GameRecord::new(Position::initial(TurnConfig::of(2, 1)));
        r.push_turn(Color::White, vec![m("b1a3")]);
        r.push_turn(Color::Black, vec![m("e7e5")]);
        assert_eq!(r.replay(), Err(ReplayError::TurnIncomplete { turn: 0 }));

        let mut r = GameRecord::new(Position::initial(TurnConfig::of(2, 1)));
        r.push_turn(Color::White, vec![m("b1a3"), m("a3b5")]);
        r.push_turn(Color::Black, vec![m("e7e4")]);
        let err = r.replay().unwrap_err();
        assert_eq!(err.turn(), Some(1));

        let mut r = GameRecord::new(Position::initial(TurnConfig::of(2, 1)));
        r.push_turn(Color::Black, vec![m("e7e5")]);
        assert_eq!(
            r.replay(),
            Err(ReplayError::WrongSide {
                turn: 0,
                color: Color::Black
            })
        );
    }

    #[test]
    fn push_ply_groups_turns() {
        let start = Position::initial(TurnConfig::of(2, 1));
        let mut r = GameRecord::new(start);
        let mut pos = start;
        for s in ["b1a3", "a3b5", "e7e6", "b5c7"] {
            let mv = rules::resolve_move(&pos, sq(&s[..2]), sq(&s[2..]), None).unwrap();
            r.push_ply(&pos, mv);
            pos = rules::apply_move(&pos, mv).unwrap();
        }
        assert_eq!(r.turns.len(), 3);
        assert_eq!(r.turns[0].moves.len(), 2);
        assert_eq!(r.turns[2].moves.len(), 1);
        assert_eq!(r.replay().unwrap(), pos);
        assert_eq!(r.turns_by(Color::White), 2);
        assert_eq!(r.ply_count(), 4);
    }
}
