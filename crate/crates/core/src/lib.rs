//! Multimove Chess (i,j): White plays `i` consecutive moves per turn, Black
//! plays `j`, and the game is won by capturing the enemy king.
//!
//! The crate is layered bottom-up:
//!
//! - [`types`], [`bitboard`], [`position`], [`movegen`], [`rules`]: the rules
//!   engine (no check, king capture ends the game, multimove turn accounting);
//! - [`reference`]: an independent naive generator used for cross-checking;
//! - [`record`], [`notation`]: game records, extended FEN and move text;
//! - [`oracle`], [`solver`]: the single-agent capture oracle and the bounded
//!   AND-OR forced-win solver;
//! - [`strategies`], [`verifier`]: the scripted winning strategies for every
//!   decided `(i, j)` cell and their exhaustive adversarial verification.

pub mod bitboard;
pub mod budget;
pub mod movegen;
pub mod notation;
pub mod oracle;
pub mod position;
pub mod record;
pub mod reference;
pub mod rules;
pub mod solver;
pub mod strategies;
pub mod types;
pub mod verifier;

pub use bitboard::SquareSet;
pub use budget::Budget;
pub use notation::{board_diagram, parse_moves, parse_record, parse_xfen, serialize_record, to_xfen, XFenError};
pub use oracle::{can_capture_king_within, reach_squares_within, CaptureOracle, CaptureWitness, OracleError};
pub use position::{CastlingRights, KeyMap, KeySet, Position, PositionBuilder, PositionError, PositionKey, UndoToken};
pub use record::{GameRecord, ReplayError, Turn};
pub use rules::{
    apply_move, attacked_squares, initial_position, legal_moves, undo_move, winner_of, IllegalMove, IllegalReason,
};
pub use solver::{
    replay_strategy_tree, solve_forced_win, solve_forced_win_with, SolveOptions, SolveResult, SolveStatus, StrategyTree,
};
pub use strategies::{
    classify_opening, next_turn, strategy_for, OpeningClass, Script, ScriptError, StrategyId, StrategyScript,
};
pub use types::{sq, Color, EpRule, Move, MoveKind, Piece, PieceKind, Square, TurnConfig};
pub use verifier::{
    explore_open_cell, sensitivity_rerun, verify_lemma, verify_script, verify_theorem, Counterexample, FailureKind,
    VerificationCertificate, VerifyError, VerifyOptions, VerifyStatus,
};
