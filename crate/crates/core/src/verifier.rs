//! Exhaustive adversarial verification of the scripted strategies.
//!
//! The script's turns are deterministic; every legal turn of the opponent is
//! enumerated. Opponent turns are deduplicated by resulting position within
//! each parent (move orders that commute collapse), and the certificate
//! reports both the raw and the deduplicated counts.
//!
//! Counts in a certificate:
//!
//! - `branches_examined`: complete lines, i.e. distinct paths from the start
//!   to a win. One opponent turn with `n` distinct outcomes followed by a win
//!   gives `n`; a strategy that wins before the opponent moves gives 1.
//! - `opponent_states`: distinct opponent turn outcomes summed over all
//!   opponent decision points.
//! - `raw_sequences`: the same, before deduplication (saturating).
//!
//! Top-level branches (the distinct outcomes of the first opponent turn) are
//! independent units: they can run in parallel, are merged by index, and are
//! checkpointed one by one so an interrupted run can resume.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::Budget;
use crate::movegen;
use crate::notation::serialize_record;
use crate::position::{KeyMap, Position};
use crate::record::GameRecord;
use crate::solver::{solve_forced_win_with, SolveOptions, SolveResult, SolveStats, SolveStatus};
use crate::strategies::{
    classify_opening, strategy_for, Script, ScriptContext, ScriptError, StrategyId, StrategyScript,
};
use crate::types::{Color, EpRule, Move, PieceKind, TurnConfig};

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerifyStatus {
    Verified,
    Counterexample,
    ResourceLimit,
}

impl VerifyStatus {
    pub fn name(self) -> &'static str {
        match self {
            VerifyStatus::Verified => "Verified",
            VerifyStatus::Counterexample => "Counterexample",
            VerifyStatus::ResourceLimit => "ResourceLimit",
        }
    }
}

impl std::fmt::Display for VerifyStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The opponent captured the script side's king.
    OpponentWin,
    /// The script had no prescription.
    OffBook,
    /// The script prescribed an unplayable or malformed turn.
    BadScriptTurn,
    /// The script side used up its turn allowance without winning.
    TurnCapExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub kind: FailureKind,
    pub reason: String,
    pub config: TurnConfig,
    /// The game up to the failure, in record format.
    pub record: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    pub positions: u64,
    pub script_calls: u64,
    pub oracle_calls: u64,
    pub oracle_nodes: u64,
}

impl NodeStats {
    fn add(&mut self, o: &NodeStats) {
        self.positions += o.positions;
        self.script_calls += o.script_calls;
        self.oracle_calls += o.oracle_calls;
        self.oracle_nodes += o.oracle_nodes;
    }
}

/// Counts for a subtree of the enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub leaves: u64,
    pub opponent_states: u64,
    pub raw_sequences: u64,
    pub max_turns: u32,
    pub max_plies: u32,
    pub case_tags: BTreeMap<String, u64>,
    pub wins_by_turn: BTreeMap<u32, u64>,
    pub stats: NodeStats,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.leaves += o.leaves;
        self.opponent_states += o.opponent_states;
        self.raw_sequences = self.raw_sequences.saturating_add(o.raw_sequences);
        self.max_turns = self.max_turns.max(o.max_turns);
        self.max_plies = self.max_plies.max(o.max_plies);
        for (k, v) in &o.case_tags {
            *self.case_tags.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &o.wins_by_turn {
            *self.wins_by_turn.entry(*k).or_default() += v;
        }
        self.stats.add(&o.stats);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub config: TurnConfig,
    pub status: VerifyStatus,
    pub top_level_branches: u64,
    pub completed_branches: u64,
    pub tally: Tally,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationCertificate {
    pub schema_version: u32,
    pub lemma: StrategyId,
    pub side: Color,
    pub configs: Vec<TurnConfig>,
    pub ep_rule: EpRule,
    pub status: VerifyStatus,
    /// Largest number of the script side's turns any line needed.
    pub turn_bound: u32,
    /// Turns allowed before a line counts as a failure.
    pub turn_cap: u32,
    pub branches_examined: u64,
    pub opponent_states: u64,
    pub raw_sequences: u64,
    pub max_depth_plies: u32,
    pub counterexample: Option<Counterexample>,
    pub case_tags: BTreeMap<String, u64>,
    pub wins_by_turn: BTreeMap<u32, u64>,
    pub instances: Vec<InstanceSummary>,
    /// For cells outside the enumerated instances: how they follow.
    pub extension: Option<String>,
    pub node_stats: NodeStats,
    pub wall_time_ms: u64,
}

impl VerificationCertificate {
    /// Copy with timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> VerificationCertificate {
        VerificationCertificate {
            wall_time_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<VerificationCertificate, VerifyError> {
        let cert: VerificationCertificate =
            serde_json::from_str(text).map_err(|e| VerifyError::BadCertificate(e.to_string()))?;
        if cert.schema_version != CERTIFICATE_SCHEMA_VERSION {
            return Err(VerifyError::BadCertificate(format!(
                "schema version {} (expected {CERTIFICATE_SCHEMA_VERSION})",
                cert.schema_version
            )));
        }
        Ok(cert)
    }

    /// `lemma6.json`, or `lemma6.ep-loose.json` under the loose rule.
    pub fn file_name(&self) -> String {
        match self.ep_rule {
            EpRule::Strict => format!("{}.json", self.lemma),
            EpRule::Loose => format!("{}.{}.json", self.lemma, self.ep_rule.name()),
        }
    }

    pub fn write_to_dir(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_json() + "\n")?;
        Ok(path)
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let cells: Vec<String> = self.configs.iter().map(|c| c.to_string()).collect();
        format!(
            "{} {} on {} [{}]: turn_bound={} branches={} states={} raw={} max_plies={} time={}ms",
            self.lemma,
            self.status,
            cells.join(" "),
            self.ep_rule.name(),
            self.turn_bound,
            self.branches_examined,
            self.opponent_states,
            self.raw_sequences,
            self.max_depth_plies,
            self.wall_time_ms
        )
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0} is an open cell; no strategy is known")]
    Unsupported(TurnConfig),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] io::Error),
    #[error("bad certificate: {0}")]
    BadCertificate(String),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub budget: Budget,
    pub threads: usize,
    pub turn_cap: u32,
    pub ep_rule: EpRule,
    /// Directory for per-instance checkpoint files; `None` disables them.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: Budget::UNLIMITED,
            threads: 1,
            turn_cap: 6,
            ep_rule: EpRule::Strict,
            checkpoint_dir: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Budget shared by parallel branch workers

struct SharedBudget {
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    nodes: AtomicU64,
    tripped: AtomicBool,
}

impl SharedBudget {
    fn new(budget: Budget) -> SharedBudget {
        SharedBudget {
            deadline: budget.max_time.map(|d| Instant::now() + d),
            max_nodes: budget.max_nodes,
            nodes: AtomicU64::new(0),
            tripped: AtomicBool::new(false),
        }
    }

    fn spend(&self, n: u64) -> bool {
        let total = self.nodes.fetch_add(n, Ordering::Relaxed) + n;
        if self.max_nodes.is_some_and(|m| total > m) || self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.tripped.store(true, Ordering::Relaxed);
        }
        !self.tripped.load(Ordering::Relaxed)
    }

    fn tripped(&self) -> bool {
        self.tripped.load(Ordering::Relaxed)
    }
}

// ---------------------------------------------------------------------------
// Enumeration

enum Stop {
    Fail(Box<Counterexample>),
    Budget,
}

struct Walker<'a> {
    script: &'a dyn Script,
    side: Color,
    config: TurnConfig,
    turn_cap: u32,
    ctx: ScriptContext,
    budget: &'a SharedBudget,
    pending: u64,
    positions: u64,
    script_calls: u64,
    oracle_nodes_flushed: u64,
}

/// One full turn of the side to move, up to transposition.
struct TurnOutcomes {
    /// Distinct results in discovery (canonical) order, each with the first
    /// move sequence that produced it.
    results: Vec<(Vec<Move>, Position)>,
    raw: u64,
}

impl<'a> Walker<'a> {
    fn new(script: &'a dyn Script, config: TurnConfig, turn_cap: u32, budget: &'a SharedBudget) -> Walker<'a> {
        Walker {
            script,
            side: script.side(),
            config,
            turn_cap,
            ctx: ScriptContext::default(),
            budget,
            pending: 0,
            positions: 0,
            script_calls: 0,
            oracle_nodes_flushed: 0,
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.positions += 1;
        self.pending += 1;
        if self.pending >= 256 {
            self.flush()?;
        } else if self.budget.tripped() {
            return Err(Stop::Budget);
        }
        Ok(())
    }

    /// Charges unreported nodes to the shared budget.
    fn flush(&mut self) -> Result<(), Stop> {
        let oracle = std::mem::take(&mut self.ctx.oracle.nodes);
        self.oracle_nodes_flushed += oracle;
        let n = std::mem::take(&mut self.pending) + oracle;
        if self.budget.spend(n) {
            Ok(())
        } else {
            Err(Stop::Budget)
        }
    }

    fn stats(&self) -> NodeStats {
        NodeStats {
            positions: self.positions,
            script_calls: self.script_calls,
            oracle_calls: self.ctx.oracle.queries,
            oracle_nodes: self.oracle_nodes_flushed + self.ctx.oracle.nodes,
        }
    }

    fn fail(&self, kind: FailureKind, reason: String, record: &GameRecord) -> Stop {
        Stop::Fail(Box::new(Counterexample {
            kind,
            reason,
            config: self.config,
            record: serialize_record(record),
        }))
    }

    /// All full turns for the side to move in `pos`.
    fn outcomes(&mut self, pos: &Position) -> Result<TurnOutcomes, Stop> {
        let mut out = TurnOutcomes {
            results: Vec::new(),
            raw: 0,
        };
        let mut index: KeyMap<()> = KeyMap::default();
        let mut memo: KeyMap<u64> = KeyMap::default();
        let mut prefix = Vec::new();
        out.raw = self.expand(pos, &mut prefix, &mut index, &mut memo, &mut out.results)?;
        Ok(out)
    }

    fn expand(
        &mut self,
        pos: &Position,
        prefix: &mut Vec<Move>,
        index: &mut KeyMap<()>,
        memo: &mut KeyMap<u64>,
        results: &mut Vec<(Vec<Move>, Position)>,
    ) -> Result<u64, Stop> {
        if let Some(&n) = memo.get(&pos.key()) {
            return Ok(n);
        }
        self.tick()?;
        let mover = pos.side_to_move();
        let mut raw = 0u64;
        for mv in movegen::legal_moves(pos) {
            let mut child = *pos;
            child.make(mv);
            prefix.push(mv);
            let same_turn = !child.is_terminal()
                && child.side_to_move() == mover
                && pos.moves_remaining() > 1
                && child.moves_remaining() == pos.moves_remaining() - 1;
            if same_turn {
                raw = raw.saturating_add(self.expand(&child, prefix, index, memo, results)?);
            } else {
                raw = raw.saturating_add(1);
                if index.insert(child.key(), ()).is_none() {
                    results.push((prefix.clone(), child));
                }
            }
            prefix.pop();
        }
        memo.insert(pos.key(), raw);
        Ok(raw)
    }

    /// The script side starts a turn at `pos` (the result of `record`).
    fn script_turn(&mut self, record: &mut GameRecord, pos: &Position, plies: u32) -> Result<Tally, Stop> {
        self.tick()?;
        let turn = record.turns_by(self.side) as u32;
        if turn >= self.turn_cap {
            return Err(self.fail(
                FailureKind::TurnCapExceeded,
                format!("no win within {} turns", self.turn_cap),
                record,
            ));
        }
        self.script_calls += 1;
        let line = match self.script.decide(&mut self.ctx, record, pos) {
            Ok(line) => line,
            Err(ScriptError::OffBook { reason, .. }) => return Err(self.fail(FailureKind::OffBook, reason, record)),
            Err(e) => return Err(self.fail(FailureKind::BadScriptTurn, e.to_string(), record)),
        };
        let mut p = *pos;
        for (n, &mv) in line.iter().enumerate() {
            let own_turn = !p.is_terminal()
                && p.side_to_move() == self.side
                && (n == 0 || p.moves_remaining() < pos.moves_remaining());
            if !own_turn || !movegen::legal_moves(&p).contains(&mv) {
                return Err(self.fail(
                    FailureKind::BadScriptTurn,
                    format!("prescribed ply {n} ({mv}) is not playable"),
                    record,
                ));
            }
            p.make(mv);
        }
        let still_ours =
            !p.is_terminal() && p.side_to_move() == self.side && line.len() < pos.moves_remaining() as usize;
        if line.is_empty() || still_ours {
            return Err(self.fail(
                FailureKind::BadScriptTurn,
                format!("prescribed turn has {} plies and does not end the turn", line.len()),
                record,
            ));
        }
        record.push_turn(self.side, line.clone());
        let plies = plies + line.len() as u32;
        let result = if p.winner() == Some(self.side) {
            let mut t = Tally {
                leaves: 1,
                max_turns: turn + 1,
                max_plies: plies,
                ..Tally::default()
            };
            t.wins_by_turn.insert(turn + 1, 1);
            if let Some(tag) = case_tag(self.script.id(), record) {
                t.case_tags.insert(tag, 1);
            }
            Ok(t)
        } else if p.side_to_move() == self.side {
            self.script_turn(record, &p, plies)
        } else {
            self.opponent_turn(record, &p, plies)
        };
        record.turns.pop();
        result
    }

    fn opponent_turn(&mut self, record: &mut GameRecord, pos: &Position, plies: u32) -> Result<Tally, Stop> {
        let outcomes = self.outcomes(pos)?;
        let mut tally = Tally {
            opponent_states: outcomes.results.len() as u64,
            raw_sequences: outcomes.raw,
            ..Tally::default()
        };
        for (moves, result) in &outcomes.results {
            let sub = self.after_opponent(record, moves, result, plies)?;
            tally.merge(&sub);
        }
        Ok(tally)
    }

    fn after_opponent(
        &mut self,
        record: &mut GameRecord,
        moves: &[Move],
        result: &Position,
        plies: u32,
    ) -> Result<Tally, Stop> {
        record.push_turn(self.side.opponent(), moves.to_vec());
        let plies = plies + moves.len() as u32;
        let r = if result.winner() == Some(self.side.opponent()) {
            Err(self.fail(
                FailureKind::OpponentWin,
                "the opponent captured the king".into(),
                record,
            ))
        } else if result.side_to_move() == self.side {
            self.script_turn(record, result, plies)
        } else {
            self.opponent_turn(record, result, plies)
        };
        record.turns.pop();
        r
    }
}

/// Which prose sub-case a finished line belongs to, for strategies whose
/// argument is split into cases.
fn case_tag(id: StrategyId, record: &GameRecord) -> Option<String> {
    match id {
        StrategyId::L7 => classify_opening(id, record).ok().map(|c| c.label().to_string()),
        StrategyId::L9 => {
            let class = classify_opening(id, record).ok()?;
            if class != crate::strategies::OpeningClass::Standard {
                return Some(class.label().to_string());
            }
            // White's answer to the standard opening, judged after its second turn.
            let after = record.truncated(3).replay().ok()?;
            if record.turns.len() < 4 {
                return Some("Standard/first-turn".into());
            }
            let c6 = crate::types::sq("c6");
            let sub = match after.piece_at(c6) {
                Some(p) if p.color == Color::White => match p.kind {
                    PieceKind::Knight => "D",
                    PieceKind::Bishop => "E",
                    PieceKind::Rook => "F",
                    PieceKind::Queen => "G",
                    PieceKind::Pawn => "H",
                    PieceKind::King => "king-on-c6",
                },
                _ => match after.king_square(Color::White).map(|s| s.to_string()).as_deref() {
                    Some("d1") => "I",
                    Some("e4") => "J",
                    Some("f1") => "K",
                    Some("g2") => "L",
                    Some("e1") => "king-stays",
                    _ => "king-elsewhere",
                },
            };
            Some(format!("Standard/{sub}"))
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

/// First line of a checkpoint file. Each completed top-level branch then
/// appends one [`CheckpointEntry`] line, so saving stays linear in the
/// number of branches.
#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    schema_version: u32,
    lemma: StrategyId,
    config: TurnConfig,
    ep_rule: EpRule,
    turn_cap: u32,
}

#[derive(Serialize, Deserialize)]
struct CheckpointEntry {
    branch: usize,
    tally: Tally,
}

fn checkpoint_path(dir: &Path, id: StrategyId, config: TurnConfig, rule: EpRule) -> PathBuf {
    dir.join(format!(
        "{}-{}x{}-{}.checkpoint.jsonl",
        id,
        config.white_moves_per_turn(),
        config.black_moves_per_turn(),
        rule.name()
    ))
}

fn checkpoint_header(id: StrategyId, config: TurnConfig, opts: &VerifyOptions) -> CheckpointHeader {
    CheckpointHeader {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        lemma: id,
        config,
        ep_rule: opts.ep_rule,
        turn_cap: opts.turn_cap,
    }
}

/// Completed branches recorded for this exact run, or `None` if there is no
/// usable checkpoint. A torn last line (interrupted write) is ignored.
fn load_checkpoint(
    path: &Path,
    id: StrategyId,
    config: TurnConfig,
    opts: &VerifyOptions,
) -> Option<BTreeMap<usize, Tally>> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let h: CheckpointHeader = serde_json::from_str(lines.next()?).ok()?;
    let want = checkpoint_header(id, config, opts);
    if (h.schema_version, h.lemma, h.config, h.ep_rule, h.turn_cap)
        != (
            want.schema_version,
            want.lemma,
            want.config,
            want.ep_rule,
            want.turn_cap,
        )
    {
        return None;
    }
    Some(
        lines
            .filter_map(|l| serde_json::from_str::<CheckpointEntry>(l).ok())
            .map(|e| (e.branch, e.tally))
            .collect(),
    )
}

/// Opens the checkpoint for appending, starting a fresh file unless `resume`.
/// Best effort: a lost checkpoint only costs recomputation.
fn open_checkpoint(
    path: &Path,
    id: StrategyId,
    config: TurnConfig,
    opts: &VerifyOptions,
    resume: bool,
) -> Option<fs::File> {
    use std::io::Write as _;
    if let Some(parent) = path.parent() {
        let _ = fs::create_dir_all(parent);
    }
    if resume {
        let torn = fs::read(path).ok()?.last().is_some_and(|&b| b != b'\n');
        let mut f = fs::OpenOptions::new().append(true).open(path).ok()?;
        if torn {
            f.write_all(b"\n").ok()?;
        }
        return Some(f);
    }
    let mut f = fs::File::create(path).ok()?;
    let mut line = serde_json::to_string(&checkpoint_header(id, config, opts)).expect("header serializes");
    line.push('\n');
    f.write_all(line.as_bytes()).ok()?;
    Some(f)
}

fn append_checkpoint(file: &mut Option<fs::File>, branch: usize, tally: &Tally) {
    use std::io::Write as _;
    if let Some(f) = file {
        let mut line = serde_json::to_string(&CheckpointEntry {
            branch,
            tally: tally.clone(),
        })
        .expect("entry serializes");
        line.push('\n');
        if f.write_all(line.as_bytes()).is_err() {
            *file = None;
        }
    }
}

/// Number of top-level branches already recorded in a checkpoint file, if
/// one exists for this run.
pub fn checkpoint_progress(dir: &Path, id: StrategyId, config: TurnConfig, opts: &VerifyOptions) -> Option<usize> {
    let path = checkpoint_path(dir, id, config, opts.ep_rule);
    load_checkpoint(&path, id, config, opts).map(|m| m.len())
}

// ---------------------------------------------------------------------------
// Drivers

/// Verifies `script` on one cell.
pub fn verify_instance(
    script: &dyn Script,
    config: TurnConfig,
    opts: &VerifyOptions,
) -> Result<InstanceSummary, VerifyError> {
    verify_instance_inner(script, config, opts).map(|(s, _)| s)
}

fn verify_instance_inner(
    script: &dyn Script,
    config: TurnConfig,
    opts: &VerifyOptions,
) -> Result<(InstanceSummary, Option<Counterexample>), VerifyError> {
    let budget = SharedBudget::new(opts.budget);
    let start = Position::initial_with_rule(config, opts.ep_rule);
    let side = script.side();
    let id = script.id();

    let ckpt_path = opts
        .checkpoint_dir
        .as_ref()
        .map(|d| checkpoint_path(d, id, config, opts.ep_rule));
    let early_limit = || {
        if let Some(p) = &ckpt_path {
            if load_checkpoint(p, id, config, opts).is_none() {
                open_checkpoint(p, id, config, opts, false);
            }
        }
        Ok((resource_limit(config, 0, 0, Tally::default()), None))
    };

    // Play the script's opening turns (if it moves first) up to the first
    // opponent decision point; its outcomes are the top-level branches.
    let mut head = Walker::new(script, config, opts.turn_cap, &budget);
    let mut record = GameRecord::new(start);
    let mut pos = start;
    let mut head_tally = Tally::default();
    let mut plies = 0u32;
    while !pos.is_terminal() && pos.side_to_move() == side {
        match head.decide_head(&mut record, &pos) {
            Ok((p, n)) => {
                pos = p;
                plies += n;
            }
            Err(Stop::Fail(cx)) => {
                return Ok((
                    InstanceSummary {
                        config,
                        status: VerifyStatus::Counterexample,
                        top_level_branches: 0,
                        completed_branches: 0,
                        tally: Tally::default(),
                    },
                    Some(*cx),
                ))
            }
            Err(Stop::Budget) => return early_limit(),
        }
    }
    if pos.winner() == Some(side) {
        let turns = record.turns_by(side) as u32;
        head_tally.leaves = 1;
        head_tally.max_turns = turns;
        head_tally.max_plies = plies;
        head_tally.wins_by_turn.insert(turns, 1);
        head_tally.stats = head.stats();
        return Ok((
            InstanceSummary {
                config,
                status: VerifyStatus::Verified,
                top_level_branches: 1,
                completed_branches: 1,
                tally: head_tally,
            },
            None,
        ));
    }

    let outcomes = match head.outcomes(&pos).and_then(|o| head.flush().map(|_| o)) {
        Ok(o) => o,
        Err(_) => return early_limit(),
    };
    head_tally.opponent_states = outcomes.results.len() as u64;
    head_tally.raw_sequences = outcomes.raw;
    head_tally.stats = head.stats();
    let total = outcomes.results.len();

    let (done, file) = match &ckpt_path {
        Some(p) => match load_checkpoint(p, id, config, opts) {
            Some(done) => (done, open_checkpoint(p, id, config, opts, true)),
            None => (BTreeMap::new(), open_checkpoint(p, id, config, opts, false)),
        },
        None => (BTreeMap::new(), None),
    };
    let completed = Mutex::new((done, file));
    let first_failure = AtomicUsize::new(usize::MAX);

    let run = |i: usize| -> Option<Result<Tally, Stop>> {
        if let Some(t) = completed.lock().expect("checkpoint lock").0.get(&i) {
            return Some(Ok(t.clone()));
        }
        if i > first_failure.load(Ordering::Relaxed) || budget.tripped() {
            return None;
        }
        let (moves, result) = &outcomes.results[i];
        let mut w = Walker::new(script, config, opts.turn_cap, &budget);
        let mut rec = record.clone();
        let r = w.after_opponent(&mut rec, moves, result, plies);
        let r = w.flush().and(r).map(|mut t| {
            t.stats.add(&w.stats());
            t
        });
        match &r {
            Ok(t) => {
                let mut guard = completed.lock().expect("checkpoint lock");
                let (done, file) = &mut *guard;
                if done.insert(i, t.clone()).is_none() {
                    append_checkpoint(file, i, t);
                }
            }
            Err(Stop::Fail(_)) => {
                first_failure.fetch_min(i, Ordering::Relaxed);
            }
            Err(Stop::Budget) => {}
        }
        Some(r)
    };

    let results: Vec<Option<Result<Tally, Stop>>> = if opts.threads > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build() {
            Ok(pool) => pool.install(|| (0..total).into_par_iter().map(run).collect()),
            Err(_) => (0..total).map(run).collect(),
        }
    } else {
        (0..total).map(run).collect()
    };

    let mut tally = head_tally;
    let mut finished = 0u64;
    let mut limited = false;
    for r in results {
        match r {
            Some(Ok(t)) => {
                tally.merge(&t);
                finished += 1;
            }
            Some(Err(Stop::Fail(cx))) => {
                // Lowest index wins; later branches are not reported.
                let summary = InstanceSummary {
                    config,
                    status: VerifyStatus::Counterexample,
                    top_level_branches: total as u64,
                    completed_branches: finished,
                    tally,
                };
                return Ok((summary, Some(*cx)));
            }
            Some(Err(Stop::Budget)) | None => limited = true,
        }
    }
    if limited {
        return Ok((resource_limit(config, total as u64, finished, tally), None));
    }
    if let Some(p) = &ckpt_path {
        drop(completed);
        let _ = fs::remove_file(p);
        if let Some(dir) = p.parent() {
            // Only succeeds once no other run has a checkpoint there.
            let _ = fs::remove_dir(dir);
        }
    }
    Ok((
        InstanceSummary {
            config,
            status: VerifyStatus::Verified,
            top_level_branches: total as u64,
            completed_branches: finished,
            tally,
        },
        None,
    ))
}

fn resource_limit(config: TurnConfig, total: u64, done: u64, tally: Tally) -> InstanceSummary {
    InstanceSummary {
        config,
        status: VerifyStatus::ResourceLimit,
        top_level_branches: total,
        completed_branches: done,
        tally,
    }
}

impl Walker<'_> {
    /// One script turn at the head of the tree, before any branching.
    fn decide_head(&mut self, record: &mut GameRecord, pos: &Position) -> Result<(Position, u32), Stop> {
        self.tick()?;
        self.script_calls += 1;
        let line = match self.script.decide(&mut self.ctx, record, pos) {
            Ok(l) => l,
            Err(ScriptError::OffBook { reason, .. }) => return Err(self.fail(FailureKind::OffBook, reason, record)),
            Err(e) => return Err(self.fail(FailureKind::BadScriptTurn, e.to_string(), record)),
        };
        let mut p = *pos;
        for (n, &mv) in line.iter().enumerate() {
            if p.is_terminal() || p.side_to_move() != self.side || !movegen::legal_moves(&p).contains(&mv) {
                return Err(self.fail(
                    FailureKind::BadScriptTurn,
                    format!("prescribed ply {n} ({mv}) is not playable"),
                    record,
                ));
            }
            p.make(mv);
        }
        if line.is_empty()
            || (!p.is_terminal() && p.side_to_move() == self.side && line.len() < pos.moves_remaining() as usize)
        {
            return Err(self.fail(
                FailureKind::BadScriptTurn,
                "prescribed turn does not end the turn".into(),
                record,
            ));
        }
        let n = line.len() as u32;
        record.push_turn(self.side, line);
        Ok((p, n))
    }
}

/// Combines per-instance results into one certificate.
fn certificate(
    id: StrategyId,
    opts: &VerifyOptions,
    instances: Vec<InstanceSummary>,
    counterexample: Option<Counterexample>,
    extension: Option<String>,
    started: Instant,
) -> VerificationCertificate {
    let mut tally = Tally::default();
    for inst in &instances {
        tally.merge(&inst.tally);
    }
    let status = if counterexample.is_some() {
        VerifyStatus::Counterexample
    } else if instances.iter().any(|i| i.status == VerifyStatus::ResourceLimit) {
        VerifyStatus::ResourceLimit
    } else {
        VerifyStatus::Verified
    };
    VerificationCertificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        lemma: id,
        side: id.side(),
        configs: instances.iter().map(|i| i.config).collect(),
        ep_rule: opts.ep_rule,
        status,
        turn_bound: tally.max_turns,
        turn_cap: opts.turn_cap,
        branches_examined: tally.leaves,
        opponent_states: tally.opponent_states,
        raw_sequences: tally.raw_sequences,
        max_depth_plies: tally.max_plies,
        counterexample,
        case_tags: tally.case_tags,
        wins_by_turn: tally.wins_by_turn,
        node_stats: tally.stats,
        instances,
        extension,
        wall_time_ms: started.elapsed().as_millis() as u64,
    }
}

/// Verifies an arbitrary script (possibly mutated) on the given cells.
pub fn verify_script(
    script: &dyn Script,
    configs: &[TurnConfig],
    opts: &VerifyOptions,
) -> Result<VerificationCertificate, VerifyError> {
    let started = Instant::now();
    let mut instances = Vec::new();
    let mut cx = None;
    let mut remaining = opts.budget;
    for &config in configs {
        let mut o = opts.clone();
        o.budget = remaining;
        let (summary, failure) = verify_instance_inner(script, config, &o)?;
        let stop = summary.status != VerifyStatus::Verified;
        instances.push(summary);
        if failure.is_some() {
            cx = failure;
        }
        if stop {
            break;
        }
        if let Some(t) = remaining.max_time {
            remaining.max_time = Some(t.saturating_sub(started.elapsed()));
        }
    }
    Ok(certificate(script.id(), opts, instances, cx, None, started))
}

/// Exhaustively verifies one strategy on its verification cells.
pub fn verify_lemma(id: StrategyId, opts: &VerifyOptions) -> Result<VerificationCertificate, VerifyError> {
    let mut cert = verify_script(&StrategyScript::new(id), &id.verification_configs(), opts)?;
    cert.extension = family_note(id, None);
    Ok(cert)
}

fn family_note(id: StrategyId, cell: Option<TurnConfig>) -> Option<String> {
    let (family, boundary, why) = match id {
        StrategyId::L6 => (
            "i > 4",
            "i = 4",
            "the winning line is four moves long and ends the game, so extra White moves are never played and Black never moves",
        ),
        StrategyId::L10 => (
            "j > 4",
            "j = 4",
            "Black's capture line is at most four moves long and ends the game, so extra Black moves are never played",
        ),
        _ => return None,
    };
    let subject = match cell {
        Some(c) => format!("{c} follows from the {boundary} instance"),
        None => format!("cells with {family} follow from {boundary}"),
    };
    Some(format!("{subject}: {why} (argued, not enumerated)"))
}

/// Verifies the strategy that covers `config`. Families are checked at
/// their boundary instance and the certificate records how the cell follows.
pub fn verify_theorem(config: TurnConfig, opts: &VerifyOptions) -> Result<VerificationCertificate, VerifyError> {
    let script = strategy_for(config).ok_or(VerifyError::Unsupported(config))?;
    let (i, j) = (config.white_moves_per_turn(), config.black_moves_per_turn());
    let instance = match script.id {
        StrategyId::L6 => TurnConfig::of(4, j),
        StrategyId::L10 => TurnConfig::of(i, 4),
        _ => config,
    };
    let mut cert = verify_script(&script, &[instance], opts)?;
    if instance != config {
        cert.extension = family_note(script.id, Some(config));
    }
    Ok(cert)
}

/// Result of probing an open cell at increasing turn bounds.
#[derive(Clone, Debug)]
pub struct ExploreReport {
    pub config: TurnConfig,
    pub prover: Color,
    /// (turn bound, status, stats) per attempt, in order.
    pub attempts: Vec<(u32, SolveStatus, SolveStats)>,
    pub result: SolveResult,
}

/// Runs the forced-win solver for White on `config` with T = 1, 2, … up to
/// `max_turns`, stopping at the first win or when the budget runs out. The
/// honest expectation at desk scale is `Unknown` or
/// `ProvenNotWinWithinBound`.
pub fn explore_open_cell(config: TurnConfig, budget: Budget, max_turns: u32) -> ExploreReport {
    let started = Instant::now();
    let pos = Position::initial(config);
    let prover = Color::White;
    let mut attempts = Vec::new();
    let mut last = None;
    for t in 1..=max_turns.max(1) {
        let mut b = budget;
        if let Some(d) = b.max_time {
            let left = d.saturating_sub(started.elapsed());
            if left.is_zero() {
                break;
            }
            b.max_time = Some(left);
        }
        let opts = SolveOptions {
            budget: b,
            extract_tree: true,
            ..SolveOptions::default()
        };
        let r = solve_forced_win_with(config, &pos, prover, t, &opts).expect("start position is live");
        attempts.push((t, r.status, r.stats));
        let stop = r.status != SolveStatus::ProvenNotWinWithinBound;
        last = Some(r);
        if stop {
            break;
        }
    }
    let result = last.unwrap_or(SolveResult {
        status: SolveStatus::Unknown,
        prover,
        depth_bound: 0,
        strategy_tree: None,
        stats: SolveStats::default(),
    });
    ExploreReport {
        config,
        prover,
        attempts,
        result,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub lemma: StrategyId,
    pub strict: VerificationCertificate,
    pub loose: VerificationCertificate,
    pub status_differs: bool,
}

/// Verifies `id` under both en-passant rules.
pub fn sensitivity_rerun(id: StrategyId, opts: &VerifyOptions) -> Result<SensitivityReport, VerifyError> {
    let strict = verify_lemma(
        id,
        &VerifyOptions {
            ep_rule: EpRule::Strict,
            ..opts.clone()
        },
    )?;
    let loose = verify_lemma(
        id,
        &VerifyOptions {
            ep_rule: EpRule::Loose,
            ..opts.clone()
        },
    )?;
    Ok(SensitivityReport {
        lemma: id,
        status_differs: strict.status != loose.status,
        strict,
        loose,
    })
}

/// Markdown table of sensitivity results.
pub fn sensitivity_markdown(reports: &[SensitivityReport]) -> String {
    let mut s = String::from(
        "| strategy | ep-strict | ep-loose | differs | branches (strict / loose) | turn bound (strict / loose) |\n\
         |---|---|---|---|---|---|\n",
    );
    for r in reports {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} / {} | {} / {} |\n",
            r.lemma,
            r.strict.status,
            r.loose.status,
            if r.status_differs { "yes" } else { "no" },
            r.strict.branches_examined,
            r.loose.branches_examined,
            r.strict.turn_bound,
            r.loose.turn_bound
        ));
    }
    s
}

/// Elapsed-time helper for callers formatting budgets.
pub fn format_duration(d: Duration) -> String {
    if d.as_secs() >= 1 {
        format!("{:.1}s", d.as_secs_f64())
    } else {
        format!("{}ms", d.as_millis())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::parse_record;
    use crate::strategies::MutatedScript;

    #[test]
    fn knight_rush_is_one_branch() {
        let c = verify_lemma(StrategyId::L6, &VerifyOptions::default()).unwrap();
        assert_eq!(c.status, VerifyStatus::Verified);
        assert_eq!(c.turn_bound, 1);
        assert_eq!(c.branches_examined, 1);
        assert!(c.extension.is_some());
    }

    #[test]
    fn two_one_counts_black_replies() {
        let c = verify_lemma(StrategyId::L2, &VerifyOptions::default()).unwrap();
        assert_eq!(c.status, VerifyStatus::Verified);
        assert_eq!(c.turn_bound, 2);
        assert_eq!(c.branches_examined, c.opponent_states);
        assert_eq!(c.raw_sequences, c.opponent_states);
    }

    #[test]
    fn mutated_script_fails_with_replayable_record() {
        let m = MutatedScript {
            base: StrategyScript::new(StrategyId::L2),
            turn: 0,
            ply: 1,
            replacement: "a3c4".into(),
        };
        let c = verify_script(&m, &[TurnConfig::of(2, 1)], &VerifyOptions::default()).unwrap();
        assert_eq!(c.status, VerifyStatus::Counterexample);
        let cx = c.counterexample.unwrap();
        parse_record(&cx.record).unwrap();
    }

    #[test]
    fn budget_trips_to_resource_limit() {
        let opts = VerifyOptions {
            budget: Budget::nodes(10),
            ..VerifyOptions::default()
        };
        let c = verify_lemma(StrategyId::L4, &opts).unwrap();
        assert_eq!(c.status, VerifyStatus::ResourceLimit);
    }

    #[test]
    fn open_cells_unsupported() {
        assert!(matches!(
            verify_theorem(TurnConfig::of(2, 2), &VerifyOptions::default()),
            Err(VerifyError::Unsupported(_))
        ));
    }

    #[test]
    fn certificate_json_roundtrip() {
        let c = verify_lemma(StrategyId::L6, &VerifyOptions::default()).unwrap();
        let back = VerificationCertificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.file_name(), "lemma6.json");
    }
}
