//! Message schema. One JSON object per line in each direction; requests carry
//! an `op` tag and responses a `type` tag. Unknown fields are rejected.

use serde::{Deserialize, Serialize};

use mmchess_core::{Color, EpRule};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotPolicy {
    /// The scripted strategy covering the cell.
    Lemma,
    /// The forced-win solver, with a per-turn time cap.
    Solver,
    Random,
}

impl BotPolicy {
    pub fn name(self) -> &'static str {
        match self {
            BotPolicy::Lemma => "lemma",
            BotPolicy::Solver => "solver",
            BotPolicy::Random => "random",
        }
    }
}

impl std::str::FromStr for BotPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lemma" => Ok(BotPolicy::Lemma),
            "solver" => Ok(BotPolicy::Solver),
            "random" => Ok(BotPolicy::Random),
            _ => Err(format!("unknown bot policy `{s}` (expected lemma, solver or random)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    NewGame {
        white: u32,
        black: u32,
        human_side: Color,
        bot_policy: BotPolicy,
        #[serde(default)]
        ep_rule: Option<EpRule>,
        /// Seed for the random policy and fallbacks.
        #[serde(default)]
        seed: Option<u64>,
    },
    GetState {
        session: String,
    },
    SubmitMove {
        session: String,
        #[serde(rename = "move")]
        move_text: String,
    },
    BotTurn {
        session: String,
    },
    ListStrategies {},
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    InProgress,
    Won,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Waiting for `submit_move`.
    Human,
    /// Waiting for `bot_turn`.
    Bot,
    Over,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnView {
    pub color: Color,
    pub moves: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameState {
    pub session: String,
    pub white: u32,
    pub black: u32,
    pub xfen: String,
    pub side_to_move: Color,
    pub moves_remaining: u32,
    pub legal_moves: Vec<String>,
    pub history: Vec<TurnView>,
    pub status: GameStatus,
    pub winner: Option<Color>,
    pub phase: Phase,
    pub human_side: Color,
    pub bot_policy: BotPolicy,
    /// Strategy the bot follows, when the lemma policy applies.
    pub strategy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WinEvent {
    pub winner: Color,
    /// The capturing move.
    #[serde(rename = "move")]
    pub move_text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyInfo {
    pub id: String,
    pub side: Color,
    pub covers: String,
    pub summary: String,
    pub verified_on: Vec<(u32, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    InvalidConfig,
    NotFound,
    NotYourTurn,
    IllegalMove,
    GameOver,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Response {
    GameCreated {
        state: GameState,
        /// Set when the requested policy cannot be honoured for this cell.
        warning: Option<String>,
    },
    State {
        state: GameState,
    },
    MoveApplied {
        #[serde(rename = "move")]
        move_text: String,
        state: GameState,
        event: Option<WinEvent>,
    },
    BotMoved {
        moves: Vec<String>,
        state: GameState,
        event: Option<WinEvent>,
        /// Policy that actually produced the turn.
        policy_used: BotPolicy,
        /// Why the configured policy was not used, if it was not.
        fallback: Option<String>,
        time_cap_ms: u64,
        elapsed_ms: u64,
    },
    Strategies {
        protocol_version: u32,
        strategies: Vec<StrategyInfo>,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl Response {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Response {
        Response::Error {
            code,
            message: message.into(),
        }
    }

    pub fn state(&self) -> Option<&GameState> {
        match self {
            Response::GameCreated { state, .. }
            | Response::State { state }
            | Response::MoveApplied { state, .. }
            | Response::BotMoved { state, .. } => Some(state),
            _ => None,
        }
    }
}
