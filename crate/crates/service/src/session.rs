use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use thiserror::Error;

use mmchess_core::notation::{moves_to_text, parse_move, MoveTextError};
use mmchess_core::solver::{random_turn, StrategyNode};
use mmchess_core::strategies::ScriptContext;
use mmchess_core::{
    movegen, solve_forced_win_with, strategy_for, to_xfen, Budget, Color, EpRule, GameRecord, Move, Position, Script,
    SolveOptions, SolveStatus, StrategyId, StrategyScript, TurnConfig,
};

use crate::protocol::*;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("it is {0}'s turn")]
    NotYourTurn(Color),
    #[error("{0}")]
    IllegalMove(#[from] MoveTextError),
    #[error("the game is over")]
    GameOver,
    #[error("session record no longer replays to the served position: {0}")]
    Diverged(String),
}

impl ServiceError {
    pub fn code(&self) -> ErrorCode {
        match self {
            ServiceError::InvalidConfig(_) => ErrorCode::InvalidConfig,
            ServiceError::NotFound(_) => ErrorCode::NotFound,
            ServiceError::NotYourTurn(_) => ErrorCode::NotYourTurn,
            ServiceError::IllegalMove(_) => ErrorCode::IllegalMove,
            ServiceError::GameOver => ErrorCode::GameOver,
            ServiceError::Diverged(_) => ErrorCode::Internal,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Wall-clock cap for one solver-policy bot turn.
    pub bot_time_cap: Duration,
    /// Largest turn bound the solver policy tries.
    pub solver_max_turns: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bot_time_cap: Duration::from_secs(2),
            solver_max_turns: 2,
        }
    }
}

struct Session {
    id: String,
    record: GameRecord,
    pos: Position,
    human: Color,
    policy: BotPolicy,
    script: Option<StrategyScript>,
    ctx: ScriptContext,
    rng: StdRng,
}

impl Session {
    fn bot(&self) -> Color {
        self.human.opponent()
    }

    fn state(&self) -> GameState {
        let cfg = self.pos.config();
        let over = self.pos.is_terminal();
        GameState {
            session: self.id.clone(),
            white: cfg.white_moves_per_turn(),
            black: cfg.black_moves_per_turn(),
            xfen: to_xfen(&self.pos),
            side_to_move: self.pos.side_to_move(),
            moves_remaining: self.pos.moves_remaining(),
            legal_moves: if over {
                Vec::new()
            } else {
                movegen::legal_moves(&self.pos).iter().map(|m| m.to_string()).collect()
            },
            history: self
                .record
                .turns
                .iter()
                .map(|t| TurnView {
                    color: t.color,
                    moves: t.moves.iter().map(|m| m.to_string()).collect(),
                })
                .collect(),
            status: if over { GameStatus::Won } else { GameStatus::InProgress },
            winner: self.pos.winner(),
            phase: if over {
                Phase::Over
            } else if self.pos.side_to_move() == self.human {
                Phase::Human
            } else {
                Phase::Bot
            },
            human_side: self.human,
            bot_policy: self.policy,
            strategy: self.script.as_ref().map(|s| s.id.to_string()),
        }
    }

    /// The record must always reproduce the served position.
    fn check_replay(&self) -> Result<(), ServiceError> {
        match self.record.replay() {
            Ok(p) if p.key() == self.pos.key() => Ok(()),
            Ok(_) => Err(ServiceError::Diverged("positions differ".into())),
            Err(e) => Err(ServiceError::Diverged(e.to_string())),
        }
    }

    fn play(&mut self, mv: Move) -> Option<WinEvent> {
        let before = self.pos;
        self.pos.make(mv);
        self.record.push_ply(&before, mv);
        self.pos.winner().map(|winner| WinEvent {
            winner,
            move_text: mv.to_string(),
        })
    }
}

/// Owns all sessions. Requests on different sessions run concurrently;
/// mutations of one session are serialized by its lock.
pub struct Service {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    next_id: AtomicU64,
}

impl Default for Service {
    fn default() -> Self {
        Service::new(ServiceConfig::default())
    }
}

impl Service {
    pub fn new(config: ServiceConfig) -> Service {
        Service {
            config,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    /// Parses one request line and returns one response line (no newline).
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => Response::error(ErrorCode::BadRequest, e.to_string()),
        };
        serde_json::to_string(&resp).expect("responses serialize")
    }

    pub fn handle(&self, req: Request) -> Response {
        let r = match req {
            Request::NewGame {
                white,
                black,
                human_side,
                bot_policy,
                ep_rule,
                seed,
            } => self.new_game(white, black, human_side, bot_policy, ep_rule.unwrap_or_default(), seed),
            Request::GetState { session } => self.get_state(&session),
            Request::SubmitMove { session, move_text } => self.submit_move(&session, &move_text),
            Request::BotTurn { session } => self.bot_turn(&session),
            Request::ListStrategies {} => Ok(list_strategies()),
        };
        r.unwrap_or_else(|e| Response::error(e.code(), e.to_string()))
    }

    fn session(&self, id: &str) -> Result<Arc<RwLock<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn new_game(
        &self,
        white: u32,
        black: u32,
        human: Color,
        policy: BotPolicy,
        ep_rule: EpRule,
        seed: Option<u64>,
    ) -> Result<Response, ServiceError> {
        let config = TurnConfig::new(white, black).map_err(|e| ServiceError::InvalidConfig(e.to_string()))?;
        let n = self.next_id.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{n}");
        let bot = human.opponent();
        let covering = strategy_for(config).filter(|s| s.side == bot);
        let warning = match (policy, &covering) {
            (BotPolicy::Lemma, None) => Some(match strategy_for(config) {
                None => format!("no strategy is known for {config}; the bot plays random legal moves"),
                Some(s) => format!(
                    "the strategy for {config} plays {}; the bot plays random legal moves as {bot}",
                    s.side
                ),
            }),
            _ => None,
        };
        let pos = Position::initial_with_rule(config, ep_rule);
        let session = Session {
            id: id.clone(),
            record: GameRecord::new(pos),
            pos,
            human,
            policy,
            script: if policy == BotPolicy::Lemma { covering } else { None },
            ctx: ScriptContext::default(),
            rng: StdRng::seed_from_u64(seed.unwrap_or(n)),
        };
        let state = session.state();
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, Arc::new(RwLock::new(session)));
        Ok(Response::GameCreated { state, warning })
    }

    pub fn get_state(&self, id: &str) -> Result<Response, ServiceError> {
        let s = self.session(id)?;
        let s = s.read().expect("session lock");
        s.check_replay()?;
        Ok(Response::State { state: s.state() })
    }

    pub fn submit_move(&self, id: &str, text: &str) -> Result<Response, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.write().expect("session lock");
        if s.pos.is_terminal() {
            return Err(ServiceError::GameOver);
        }
        if s.pos.side_to_move() != s.human {
            return Err(ServiceError::NotYourTurn(s.pos.side_to_move()));
        }
        let mv = parse_move(text, &s.pos)?;
        let event = s.play(mv);
        s.check_replay()?;
        Ok(Response::MoveApplied {
            move_text: mv.to_string(),
            state: s.state(),
            event,
        })
    }

    pub fn bot_turn(&self, id: &str) -> Result<Response, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.write().expect("session lock");
        if s.pos.is_terminal() {
            return Err(ServiceError::GameOver);
        }
        if s.pos.side_to_move() != s.bot() {
            return Err(ServiceError::NotYourTurn(s.pos.side_to_move()));
        }
        let started = Instant::now();
        let (line, policy_used, fallback) = self.choose(&mut s);
        let mut event = None;
        for &mv in &line {
            event = event.or(s.play(mv));
        }
        s.check_replay()?;
        Ok(Response::BotMoved {
            moves: line.iter().map(|m| m.to_string()).collect(),
            state: s.state(),
            event,
            policy_used,
            fallback,
            time_cap_ms: self.config.bot_time_cap.as_millis() as u64,
            elapsed_ms: started.elapsed().as_millis() as u64,
        })
    }

    /// A full turn for the bot and the policy that produced it.
    fn choose(&self, s: &mut Session) -> (Vec<Move>, BotPolicy, Option<String>) {
        let fallback = |s: &mut Session, why: String| {
            let line = random_turn(&s.pos, &mut s.rng);
            (line, BotPolicy::Random, Some(why))
        };
        match s.policy {
            BotPolicy::Random => (random_turn(&s.pos, &mut s.rng), BotPolicy::Random, None),
            BotPolicy::Lemma => {
                let Some(script) = s.script else {
                    return fallback(s, "no strategy covers this cell for the bot's side".into());
                };
                let Session { ctx, record, pos, .. } = s;
                match script.decide(ctx, record, pos) {
                    Ok(line) if is_full_turn(&s.pos, &line) => (line, BotPolicy::Lemma, None),
                    Ok(line) => {
                        let why = format!("strategy prescribed an unplayable turn: {}", moves_to_text(&line));
                        fallback(s, why)
                    }
                    Err(e) => fallback(s, format!("strategy is off book: {e}")),
                }
            }
            BotPolicy::Solver => {
                let started = Instant::now();
                let config = s.pos.config();
                let mut last = SolveStatus::Unknown;
                for t in 1..=self.config.solver_max_turns {
                    let left = self.config.bot_time_cap.saturating_sub(started.elapsed());
                    if left.is_zero() {
                        break;
                    }
                    let opts = SolveOptions {
                        budget: Budget::time(left),
                        extract_tree: true,
                        ..SolveOptions::default()
                    };
                    let Ok(r) = solve_forced_win_with(config, &s.pos, s.bot(), t, &opts) else {
                        break;
                    };
                    last = r.status;
                    if let Some(tree) = r.strategy_tree.filter(|_| r.status == SolveStatus::ProvenWin) {
                        if let StrategyNode::Prover { plies, .. } = tree.root {
                            return (plies, BotPolicy::Solver, None);
                        }
                    }
                    if r.status == SolveStatus::Unknown {
                        break;
                    }
                }
                let why = format!(
                    "solver found no forced win within {} turns ({last}, cap {} ms)",
                    self.config.solver_max_turns,
                    self.config.bot_time_cap.as_millis()
                );
                fallback(s, why)
            }
        }
    }
}

fn is_full_turn(pos: &Position, line: &[Move]) -> bool {
    let side = pos.side_to_move();
    let mut p = *pos;
    for (n, &mv) in line.iter().enumerate() {
        let same_turn = n == 0 || (p.side_to_move() == side && p.moves_remaining() < pos.moves_remaining());
        if p.is_terminal() || !same_turn || !movegen::legal_moves(&p).contains(&mv) {
            return false;
        }
        p.make(mv);
    }
    !line.is_empty() && (p.is_terminal() || p.side_to_move() != side || line.len() >= pos.moves_remaining() as usize)
}

pub fn list_strategies() -> Response {
    let ids = (2..=10).filter_map(StrategyId::from_number);
    Response::Strategies {
        protocol_version: PROTOCOL_VERSION,
        strategies: ids
            .map(|id| StrategyInfo {
                id: id.to_string(),
                side: id.side(),
                covers: id.coverage().to_string(),
                summary: id.summary().to_string(),
                verified_on: id
                    .verification_configs()
                    .iter()
                    .map(|c| (c.white_moves_per_turn(), c.black_moves_per_turn()))
                    .collect(),
            })
            .collect(),
    }
}
