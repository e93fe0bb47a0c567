//! Bounded AND-OR forced-win search over multimove turns.
//!
//! Every ply of the prover is an OR choice and every ply of the opponent is
//! an AND obligation. The prover's last allowed turn is answered exactly by
//! the capture oracle (the opponent cannot move inside that turn). Results
//! are cached by exact position and the number of prover turns left.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::{Budget, Meter};
use crate::movegen;
use crate::notation::{moves_to_text, to_xfen};
use crate::oracle::CaptureOracle;
use crate::position::{Position, PositionKey};
use crate::record::GameRecord;
use crate::types::{Color, Move, TurnConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    ProvenWin,
    ProvenNotWinWithinBound,
    Unknown,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::ProvenWin => "ProvenWin",
            SolveStatus::ProvenNotWinWithinBound => "ProvenNotWinWithinBound",
            SolveStatus::Unknown => "Unknown",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub table_hits: u64,
    pub oracle_calls: u64,
    pub oracle_nodes: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub prover: Color,
    /// Prover turns searched.
    pub depth_bound: u32,
    pub strategy_tree: Option<StrategyTree>,
    pub stats: SolveStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("position is already decided")]
    TerminalPosition,
    #[error("turn bound must be at least 1")]
    ZeroTurns,
    #[error("config {requested} does not match the position's {actual}")]
    ConfigMismatch { requested: TurnConfig, actual: TurnConfig },
}

/// Snapshot passed to the progress callback.
#[derive(Clone, Copy, Debug)]
pub struct Progress {
    pub nodes: u64,
    pub elapsed: Duration,
    pub nodes_per_sec: f64,
    pub depth_bound: u32,
}

pub type ProgressFn = Arc<dyn Fn(&Progress) + Send + Sync>;

#[derive(Clone)]
pub struct SolveOptions {
    pub budget: Budget,
    /// Worker threads for the root OR node; 1 searches sequentially.
    pub threads: usize,
    /// Entries kept in the transposition table before it is flushed.
    pub table_capacity: usize,
    pub progress: Option<ProgressFn>,
    /// Build the strategy tree on a win.
    pub extract_tree: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: Budget::UNLIMITED,
            threads: 1,
            table_capacity: 4_000_000,
            progress: None,
            extract_tree: true,
        }
    }
}

impl std::fmt::Debug for SolveOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveOptions")
            .field("budget", &self.budget)
            .field("threads", &self.threads)
            .field("table_capacity", &self.table_capacity)
            .field("extract_tree", &self.extract_tree)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Strategy trees

/// What the prover does from one position on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyNode {
    Won,
    /// The prover plays `plies` (a full turn, or the rest of one).
    Prover {
        plies: Vec<Move>,
        next: Box<StrategyNode>,
    },
    /// One entry per distinct position the opponent's turn can produce.
    Opponent {
        replies: Vec<Reply>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    /// A representative move order; others reaching `result` share the entry.
    pub moves: Vec<Move>,
    pub result: Position,
    pub next: StrategyNode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTree {
    pub start: Position,
    pub prover: Color,
    pub root: StrategyNode,
}

impl StrategyNode {
    fn count(&self, nodes: &mut usize, leaves: &mut usize) {
        *nodes += 1;
        match self {
            StrategyNode::Won => *leaves += 1,
            StrategyNode::Prover { next, .. } => next.count(nodes, leaves),
            StrategyNode::Opponent { replies } => {
                for r in replies {
                    r.next.count(nodes, leaves);
                }
            }
        }
    }

    /// Removes the reply at `index` from the first opponent node found
    /// depth-first. Only useful for audit tests.
    pub fn prune_first_reply(&mut self, index: usize) -> bool {
        match self {
            StrategyNode::Won => false,
            StrategyNode::Prover { next, .. } => next.prune_first_reply(index),
            StrategyNode::Opponent { replies } => {
                if index < replies.len() {
                    replies.remove(index);
                    true
                } else {
                    false
                }
            }
        }
    }
}

impl StrategyTree {
    /// (nodes, winning leaves)
    pub fn size(&self) -> (usize, usize) {
        let (mut n, mut l) = (0, 0);
        self.root.count(&mut n, &mut l);
        (n, l)
    }

    /// Indented text dump, one prover turn or opponent reply per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "strategy for {} from {}", self.prover, to_xfen(&self.start));
        fn walk(node: &StrategyNode, depth: usize, prover: Color, s: &mut String) {
            let pad = "  ".repeat(depth);
            match node {
                StrategyNode::Won => {}
                StrategyNode::Prover { plies, next } => {
                    let won = matches!(**next, StrategyNode::Won);
                    let _ = writeln!(
                        s,
                        "{pad}{} {}{}",
                        prover.letter(),
                        moves_to_text(plies),
                        if won { " #" } else { "" }
                    );
                    walk(next, depth, prover, s);
                }
                StrategyNode::Opponent { replies } => {
                    for r in replies {
                        let _ = writeln!(s, "{pad}{} {}", prover.opponent().letter(), moves_to_text(&r.moves));
                        walk(&r.next, depth + 1, prover, s);
                    }
                }
            }
        }
        walk(&self.root, 0, self.prover, &mut s);
        s
    }
}

/// Plays full turns for the opponent during an audit.
pub trait Adversary {
    fn choose_turn(&mut self, pos: &Position) -> Vec<Move>;
}

impl<F: FnMut(&Position) -> Vec<Move>> Adversary for F {
    fn choose_turn(&mut self, pos: &Position) -> Vec<Move> {
        self(pos)
    }
}

/// Uniformly random legal plies until the turn ends.
pub struct RandomAdversary {
    rng: StdRng,
}

impl RandomAdversary {
    pub fn new(seed: u64) -> RandomAdversary {
        RandomAdversary {
            rng: StdRng::seed_from_u64(seed),
        }
    }
}

impl Adversary for RandomAdversary {
    fn choose_turn(&mut self, pos: &Position) -> Vec<Move> {
        random_turn(pos, &mut self.rng)
    }
}

/// A random full turn for the side to move.
pub fn random_turn(pos: &Position, rng: &mut impl rand::Rng) -> Vec<Move> {
    let side = pos.side_to_move();
    let mut p = *pos;
    let mut out = Vec::new();
    while !p.is_terminal() && p.side_to_move() == side {
        let moves = movegen::legal_moves(&p);
        let Some(&mv) = moves.choose(rng) else { break };
        let before = p.moves_remaining();
        p.make(mv);
        out.push(mv);
        if p.side_to_move() == side && p.moves_remaining() != before - 1 {
            break;
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("no branch for the opponent reply `{reply}` after {plies} plies")]
    MissingBranch {
        reply: String,
        plies: usize,
        record: Box<GameRecord>,
    },
    #[error("strategy move {mv} is illegal after {plies} plies")]
    IllegalStrategyMove { mv: Move, plies: usize },
    #[error("adversary turn `{0}` is not a legal full turn")]
    BadAdversaryTurn(String),
    #[error("strategy ended without a win")]
    NotWon { record: Box<GameRecord> },
}

/// Plays `tree` against `adversary` and returns the game; the game must end
/// with the prover capturing the king.
pub fn replay_strategy_tree(tree: &StrategyTree, adversary: &mut dyn Adversary) -> Result<GameRecord, AuditError> {
    let mut record = GameRecord::new(tree.start);
    let mut pos = tree.start;
    let mut node = &tree.root;
    loop {
        match node {
            StrategyNode::Won => break,
            StrategyNode::Prover { plies, next } => {
                for &mv in plies {
                    if !movegen::legal_moves(&pos).contains(&mv) || pos.side_to_move() != tree.prover {
                        return Err(AuditError::IllegalStrategyMove {
                            mv,
                            plies: record.ply_count(),
                        });
                    }
                    record.push_ply(&pos, mv);
                    pos.make(mv);
                }
                node = next;
            }
            StrategyNode::Opponent { replies } => {
                let turn = adversary.choose_turn(&pos);
                let text = moves_to_text(&turn);
                let side = pos.side_to_move();
                if turn.is_empty() || side == tree.prover {
                    return Err(AuditError::BadAdversaryTurn(text));
                }
                for &mv in &turn {
                    if pos.side_to_move() != side || !movegen::legal_moves(&pos).contains(&mv) {
                        return Err(AuditError::BadAdversaryTurn(text));
                    }
                    record.push_ply(&pos, mv);
                    pos.make(mv);
                }
                if pos.side_to_move() == side && !pos.is_terminal() {
                    return Err(AuditError::BadAdversaryTurn(text));
                }
                match replies.iter().find(|r| r.result == pos) {
                    Some(r) => node = &r.next,
                    None => {
                        return Err(AuditError::MissingBranch {
                            reply: text,
                            plies: record.ply_count(),
                            record: Box::new(record),
                        })
                    }
                }
            }
        }
    }
    if pos.winner() != Some(tree.prover) {
        return Err(AuditError::NotWon {
            record: Box::new(record),
        });
    }
    Ok(record)
}

// ---------------------------------------------------------------------------
// Search

#[derive(Debug)]
struct Aborted;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    SameTurn,
    Passed,
    Decided,
}

/// How a ply by the side to move in the parent changed the turn structure.
#[inline]
fn step(mover: Color, before_remaining: u32, after: &Position) -> Step {
    if after.is_terminal() {
        Step::Decided
    } else if after.side_to_move() == mover && before_remaining > 1 && after.moves_remaining() == before_remaining - 1 {
        Step::SameTurn
    } else {
        Step::Passed
    }
}

type Table = std::collections::HashMap<(PositionKey, u32), bool, crate::position::ZobristBuild>;

struct Search<'a> {
    prover: Color,
    table: Table,
    oracle: CaptureOracle,
    meter: Meter,
    table_hits: u64,
    opts: &'a SolveOptions,
    depth_bound: u32,
    next_report: u64,
}

impl<'a> Search<'a> {
    fn new(prover: Color, opts: &'a SolveOptions, budget: Budget, depth_bound: u32) -> Search<'a> {
        Search {
            prover,
            table: Table::default(),
            oracle: CaptureOracle::new(),
            meter: Meter::new(budget),
            table_hits: 0,
            opts,
            depth_bound,
            next_report: 1 << 16,
        }
    }

    fn stats(&self) -> SolveStats {
        SolveStats {
            nodes: self.meter.nodes,
            table_hits: self.table_hits,
            oracle_calls: self.oracle.queries,
            oracle_nodes: self.oracle.nodes,
            elapsed_ms: self.meter.elapsed().as_millis() as u64,
        }
    }

    fn tick(&mut self, n: u64) -> Result<(), Aborted> {
        if !self.meter.spend(n) {
            return Err(Aborted);
        }
        if self.meter.nodes >= self.next_report {
            self.next_report = self.meter.nodes + (1 << 18);
            if let Some(cb) = &self.opts.progress {
                let elapsed = self.meter.elapsed();
                cb(&Progress {
                    nodes: self.meter.nodes,
                    elapsed,
                    nodes_per_sec: self.meter.nodes as f64 / elapsed.as_secs_f64().max(1e-9),
                    depth_bound: self.depth_bound,
                });
            }
        }
        Ok(())
    }

    fn lookup(&mut self, pos: &Position, turns: u32) -> Option<bool> {
        let r = self.table.get(&(pos.key(), turns)).copied();
        if r.is_some() {
            self.table_hits += 1;
        }
        r
    }

    fn store(&mut self, pos: &Position, turns: u32, value: bool) {
        if self.table.len() >= self.opts.table_capacity {
            self.table.clear();
        }
        self.table.insert((pos.key(), turns), value);
    }

    fn capture_now(&mut self, pos: &Position) -> Result<bool, Aborted> {
        let before = self.oracle.nodes;
        let found = self
            .oracle
            .exists(pos, self.prover, pos.moves_remaining())
            .expect("oracle on a live position");
        self.tick(self.oracle.nodes - before)?;
        Ok(found)
    }

    fn start_of_turn(&self, pos: &Position) -> bool {
        pos.moves_remaining() == pos.config().allowance(self.prover) as u32
    }

    fn root(&mut self, pos: &Position, turns: u32) -> Result<bool, Aborted> {
        if pos.side_to_move() == self.prover {
            self.or_node(pos, turns)
        } else {
            self.and_node(pos, turns)
        }
    }

    /// Prover to move with `turns` prover turns left, this one included.
    fn or_node(&mut self, pos: &Position, turns: u32) -> Result<bool, Aborted> {
        self.tick(1)?;
        if turns == 1 || self.start_of_turn(pos) {
            if self.capture_now(pos)? {
                return Ok(true);
            }
            if turns == 1 {
                return Ok(false);
            }
        }
        if let Some(v) = self.lookup(pos, turns) {
            return Ok(v);
        }
        let mut result = false;
        for mv in movegen::legal_moves(pos) {
            let mut child = *pos;
            child.make(mv);
            if self.child_value(&child, self.prover, pos.moves_remaining(), turns)? {
                result = true;
                break;
            }
        }
        self.store(pos, turns, result);
        Ok(result)
    }

    /// Opponent to move; `turns` prover turns remain after this turn.
    fn and_node(&mut self, pos: &Position, turns: u32) -> Result<bool, Aborted> {
        self.tick(1)?;
        if let Some(v) = self.lookup(pos, turns) {
            return Ok(v);
        }
        let opp = self.prover.opponent();
        let mut result = true;
        for mv in movegen::legal_moves(pos) {
            let mut child = *pos;
            child.make(mv);
            if !self.child_value(&child, opp, pos.moves_remaining(), turns)? {
                result = false;
                break;
            }
        }
        self.store(pos, turns, result);
        Ok(result)
    }

    /// Value of `child`, reached by a ply of `mover` in a node with `turns`.
    fn child_value(
        &mut self,
        child: &Position,
        mover: Color,
        before_remaining: u32,
        turns: u32,
    ) -> Result<bool, Aborted> {
        match step(mover, before_remaining, child) {
            Step::Decided => Ok(child.winner() == Some(self.prover)),
            Step::SameTurn if mover == self.prover => self.or_node(child, turns),
            Step::SameTurn => self.and_node(child, turns),
            Step::Passed => {
                let turns = turns_after_pass(self.prover, mover, child, turns);
                if turns == 0 {
                    Ok(false)
                } else if child.side_to_move() == self.prover {
                    self.or_node(child, turns)
                } else {
                    self.and_node(child, turns)
                }
            }
        }
    }

    // -- strategy extraction (only called on proven nodes) --

    fn extract_prover(&mut self, pos: &Position, turns: u32) -> Result<StrategyNode, Aborted> {
        if turns == 1 || self.start_of_turn(pos) {
            if let Some(w) = self
                .oracle
                .witness(pos, self.prover, pos.moves_remaining())
                .expect("oracle on a live position")
            {
                return Ok(StrategyNode::Prover {
                    plies: w.moves,
                    next: Box::new(StrategyNode::Won),
                });
            }
        }
        let mut plies = Vec::new();
        let mut cur = *pos;
        loop {
            let mut chosen = None;
            for mv in movegen::legal_moves(&cur) {
                let mut child = cur;
                child.make(mv);
                if self.child_value(&child, self.prover, cur.moves_remaining(), turns)? {
                    chosen = Some((mv, child));
                    break;
                }
            }
            let (mv, child) = chosen.expect("a proven node has a winning move");
            plies.push(mv);
            match step(self.prover, cur.moves_remaining(), &child) {
                Step::Decided => {
                    return Ok(StrategyNode::Prover {
                        plies,
                        next: Box::new(StrategyNode::Won),
                    })
                }
                Step::SameTurn => cur = child,
                Step::Passed => {
                    let t = turns_after_pass(self.prover, self.prover, &child, turns);
                    let next = if child.side_to_move() == self.prover {
                        self.extract_prover(&child, t)?
                    } else {
                        self.extract_opponent(&child, t)?
                    };
                    return Ok(StrategyNode::Prover {
                        plies,
                        next: Box::new(next),
                    });
                }
            }
        }
    }

    fn extract_opponent(&mut self, pos: &Position, turns: u32) -> Result<StrategyNode, Aborted> {
        let mut replies = Vec::new();
        let mut seen = crate::position::KeySet::default();
        let mut prefix = Vec::new();
        self.enumerate_replies(pos, turns, &mut prefix, &mut replies, &mut seen)?;
        Ok(StrategyNode::Opponent { replies })
    }

    fn enumerate_replies(
        &mut self,
        cur: &Position,
        turns: u32,
        prefix: &mut Vec<Move>,
        replies: &mut Vec<Reply>,
        seen: &mut crate::position::KeySet,
    ) -> Result<(), Aborted> {
        let opp = self.prover.opponent();
        for mv in movegen::legal_moves(cur) {
            let mut child = *cur;
            child.make(mv);
            prefix.push(mv);
            match step(opp, cur.moves_remaining(), &child) {
                Step::SameTurn => self.enumerate_replies(&child, turns, prefix, replies, seen)?,
                how => {
                    if seen.insert(child.key()) {
                        let next = if how == Step::Decided {
                            debug_assert!(false, "opponent decided a proven position");
                            StrategyNode::Won
                        } else {
                            let t = turns_after_pass(self.prover, opp, &child, turns);
                            if child.side_to_move() == self.prover {
                                self.extract_prover(&child, t)?
                            } else {
                                self.extract_opponent(&child, t)?
                            }
                        };
                        replies.push(Reply {
                            moves: prefix.clone(),
                            result: child,
                            next,
                        });
                    }
                }
            }
            prefix.pop();
        }
        Ok(())
    }
}

/// Prover turns left once a turn has passed. A prover turn is used up when
/// the prover's own turn ends, or when the prover has to skip a whole turn.
fn turns_after_pass(prover: Color, mover: Color, child: &Position, turns: u32) -> u32 {
    let prover_turn_used = if mover == prover {
        true
    } else {
        child.side_to_move() != prover
    };
    if prover_turn_used {
        turns.saturating_sub(1)
    } else {
        turns
    }
}

/// Decides whether `prover` can force a king capture within
/// `max_prover_turns` of its own turns from `position`.
pub fn solve_forced_win(
    config: TurnConfig,
    position: &Position,
    prover: Color,
    max_prover_turns: u32,
) -> Result<SolveResult, SolveError> {
    solve_forced_win_with(config, position, prover, max_prover_turns, &SolveOptions::default())
}

pub fn solve_forced_win_with(
    config: TurnConfig,
    position: &Position,
    prover: Color,
    max_prover_turns: u32,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    if position.is_terminal() {
        return Err(SolveError::TerminalPosition);
    }
    if max_prover_turns == 0 {
        return Err(SolveError::ZeroTurns);
    }
    if position.config() != config {
        return Err(SolveError::ConfigMismatch {
            requested: config,
            actual: position.config(),
        });
    }
    let turns = max_prover_turns;
    let mut search = Search::new(prover, opts, opts.budget, turns);
    let (value, mut stats) = if opts.threads > 1 && position.side_to_move() == prover && turns > 1 {
        parallel_root(position, prover, turns, opts, &mut search)
    } else {
        let v = search.root(position, turns);
        (v, search.stats())
    };
    let status = match value {
        Ok(true) => SolveStatus::ProvenWin,
        Ok(false) => SolveStatus::ProvenNotWinWithinBound,
        Err(Aborted) => SolveStatus::Unknown,
    };
    let strategy_tree = if status == SolveStatus::ProvenWin && opts.extract_tree {
        // Extraction re-proves subtrees as needed; it is not budgeted because
        // the win is already established.
        search.meter = Meter::new(Budget::UNLIMITED);
        let root = if position.side_to_move() == prover {
            search.extract_prover(position, turns)
        } else {
            search.extract_opponent(position, turns)
        }
        .expect("unbudgeted extraction");
        stats.oracle_calls += search.oracle.queries;
        Some(StrategyTree {
            start: *position,
            prover,
            root,
        })
    } else {
        None
    };
    Ok(SolveResult {
        status,
        prover,
        depth_bound: turns,
        strategy_tree,
        stats,
    })
}

/// Root OR node split across threads: each root move gets its own search and
/// the first winning move in canonical order decides, so the answer does not
/// depend on scheduling.
fn parallel_root(
    position: &Position,
    prover: Color,
    turns: u32,
    opts: &SolveOptions,
    main: &mut Search<'_>,
) -> (Result<bool, Aborted>, SolveStats) {
    use std::sync::atomic::{AtomicU64, Ordering};
    let start = std::time::Instant::now();
    match main.or_shortcut(position, turns) {
        Ok(true) => return (Ok(true), main.stats()),
        Err(e) => return (Err(e), main.stats()),
        Ok(false) => {}
    }
    let nodes = AtomicU64::new(0);
    let hits = AtomicU64::new(0);
    let calls = AtomicU64::new(0);
    let onodes = AtomicU64::new(0);
    let moves = movegen::legal_moves(position);
    let eval = |mv: &Move| -> Result<bool, Aborted> {
        let mut s = Search::new(prover, opts, opts.budget, turns);
        let mut child = *position;
        child.make(*mv);
        let r = s.child_value(&child, prover, position.moves_remaining(), turns);
        let st = s.stats();
        nodes.fetch_add(st.nodes, Ordering::Relaxed);
        hits.fetch_add(st.table_hits, Ordering::Relaxed);
        calls.fetch_add(st.oracle_calls, Ordering::Relaxed);
        onodes.fetch_add(st.oracle_nodes, Ordering::Relaxed);
        r
    };
    let found = match rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build() {
        Ok(pool) => pool.install(|| moves.par_iter().map(eval).find_first(|r| !matches!(r, Ok(false)))),
        Err(_) => moves.iter().map(eval).find(|r| !matches!(r, Ok(false))),
    };
    let value = found.unwrap_or(Ok(false));
    let base = main.stats();
    let stats = SolveStats {
        nodes: base.nodes + nodes.into_inner(),
        table_hits: base.table_hits + hits.into_inner(),
        oracle_calls: base.oracle_calls + calls.into_inner(),
        oracle_nodes: base.oracle_nodes + onodes.into_inner(),
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    (value, stats)
}

impl Search<'_> {
    /// The root's immediate-capture check, done once before splitting.
    fn or_shortcut(&mut self, pos: &Position, turns: u32) -> Result<bool, Aborted> {
        if turns == 1 || self.start_of_turn(pos) {
            return self.capture_now(pos);
        }
        Ok(false)
    }
}

/// Convenience used by tests and the service: the line the tree prescribes
/// against `adversary`, starting from `tree.start`.
pub fn audit_against_random(tree: &StrategyTree, seeds: impl IntoIterator<Item = u64>) -> Result<usize, AuditError> {
    let mut n = 0;
    for seed in seeds {
        replay_strategy_tree(tree, &mut RandomAdversary::new(seed))?;
        n += 1;
    }
    Ok(n)
}
