//! `mmchess`: verification runs, solving, perft auditing, terminal play and
//! the local engine service.

mod play;

use std::io::{self, IsTerminal, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use mmchess_core::reference::naive_perft;
use mmchess_core::verifier::{checkpoint_progress, sensitivity_markdown, SensitivityReport};
use mmchess_core::{
    movegen, parse_xfen, solve_forced_win_with, Budget, Color, EpRule, Position, SolveOptions, SolveStatus, StrategyId,
    TurnConfig, VerificationCertificate, VerifyError, VerifyOptions, VerifyStatus,
};
use mmchess_service::{BotPolicy, Service, ServiceConfig};

/// Exit codes. Stable; documented in the README.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const COUNTEREXAMPLE: u8 = 3;
    pub const RESOURCE_LIMIT: u8 = 4;
    pub const UNSUPPORTED: u8 = 5;
    pub const IO: u8 = 6;
}

#[derive(Parser)]
#[command(
    name = "mmchess",
    version,
    about = "Multimove Chess (i,j): verifier, solver and engine tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively verify scripted strategies and write certificates.
    Verify(VerifyArgs),
    /// Search for a forced win within a turn bound.
    Solve(SolveArgs),
    /// Count move-generator leaves (single plies) per depth.
    Perft(PerftArgs),
    /// Play against a bot in the terminal.
    Play(PlayArgs),
    /// Run the line-delimited JSON engine service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct BudgetArgs {
    /// Wall-clock budget, e.g. `90s`, `10m`, `1ms`.
    #[arg(long, value_parser = humantime::parse_duration)]
    budget: Option<Duration>,
    /// Node budget.
    #[arg(long)]
    nodes: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "MMCHESS_THREADS", default_value_t = 1)]
    threads: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.nodes,
            max_time: self.budget,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EpVariant {
    Strict,
    Loose,
    /// Run under both rules and write a sensitivity report.
    Both,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["lemma", "all", "cell"])))]
struct VerifyArgs {
    /// Strategy number (2-10); repeatable.
    #[arg(long, value_parser = parse_lemma)]
    lemma: Vec<StrategyId>,
    /// Every strategy.
    #[arg(long)]
    all: bool,
    /// The strategy covering cell (I, J).
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    cell: Vec<u32>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum, default_value = "strict")]
    ep_variant: EpVariant,
    /// Certificate directory; checkpoints go in `<out>/checkpoints`.
    #[arg(long, default_value = "certificates")]
    out: PathBuf,
    /// Script-side turns allowed before a line counts as a failure.
    #[arg(long, default_value_t = 6)]
    turn_cap: u32,
}

fn parse_lemma(s: &str) -> Result<StrategyId, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    white: u32,
    #[arg(long)]
    black: u32,
    /// The side trying to force a win.
    #[arg(long, default_value = "white")]
    side: Color,
    /// Bound on the prover's turns.
    #[arg(long)]
    turns: u32,
    /// Start from this XFen instead of the initial position.
    #[arg(long)]
    xfen: Option<String>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Where to write the strategy tree on a win.
    #[arg(long, default_value = "strategy-tree.txt")]
    tree_out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PerftMode {
    /// King-capture rules: no check, plies counted individually.
    Variant,
}

#[derive(Args)]
struct PerftArgs {
    /// Position; the initial position of (--white, --black) if omitted.
    #[arg(long)]
    xfen: Option<String>,
    #[arg(long, default_value_t = 1)]
    white: u32,
    #[arg(long, default_value_t = 1)]
    black: u32,
    #[arg(long)]
    depth: u32,
    #[arg(long, value_enum, default_value = "variant")]
    mode: PerftMode,
    /// Also count with the naive generator and compare.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub white: u32,
    #[arg(long)]
    pub black: u32,
    #[arg(long, default_value = "lemma")]
    pub bot: BotPolicy,
    /// The human's side.
    #[arg(long, default_value = "white")]
    pub side: Color,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    addr: String,
    /// Time cap for one solver-policy bot turn.
    #[arg(long, value_parser = humantime::parse_duration, default_value = "2s")]
    bot_time_cap: Duration,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match cli.command {
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Solve(a) => cmd_solve(a, &mut out),
        Command::Perft(a) => cmd_perft(a, &mut out),
        Command::Play(a) => play::run(a, &mut io::stdin().lock(), &mut out, !io::stdin().is_terminal()),
        Command::Serve(a) => cmd_serve(a, &mut out),
    };
    let _ = out.flush();
    ExitCode::from(code)
}

fn fail(out: &mut dyn Write, code: u8, msg: impl std::fmt::Display) -> u8 {
    let _ = out.flush();
    eprintln!("error: {msg}");
    code
}

fn config(white: u32, black: u32) -> Result<TurnConfig, String> {
    TurnConfig::new(white, black).map_err(|e| e.to_string())
}

fn elapsed_line(out: &mut dyn Write, start: Instant) -> io::Result<()> {
    writeln!(
        out,
        "elapsed: {}",
        mmchess_core::verifier::format_duration(start.elapsed())
    )
}

// ---------------------------------------------------------------------------
// verify

enum Job {
    Lemma(StrategyId),
    Cell(TurnConfig),
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> u8 {
    let start = Instant::now();
    let mut jobs: Vec<Job> = a.lemma.iter().map(|&id| Job::Lemma(id)).collect();
    if a.all {
        jobs = (2..=10).filter_map(StrategyId::from_number).map(Job::Lemma).collect();
    }
    if a.cell.len() == 2 {
        match config(a.cell[0], a.cell[1]) {
            Ok(c) => jobs.push(Job::Cell(c)),
            Err(e) => return fail(out, exit::USAGE, e),
        }
    }
    let rules: &[EpRule] = match a.ep_variant {
        EpVariant::Strict => &[EpRule::Strict],
        EpVariant::Loose => &[EpRule::Loose],
        EpVariant::Both => &[EpRule::Strict, EpRule::Loose],
    };
    let checkpoints = a.out.join("checkpoints");
    let mut worst = exit::OK;
    let raise = |code: u8, worst: &mut u8| {
        let rank = |c: u8| match c {
            exit::COUNTEREXAMPLE => 4,
            exit::IO => 3,
            exit::RESOURCE_LIMIT => 2,
            exit::UNSUPPORTED => 1,
            _ => 0,
        };
        if rank(code) > rank(*worst) {
            *worst = code;
        }
    };
    let mut reports: Vec<SensitivityReport> = Vec::new();
    for job in &jobs {
        let mut pair: Vec<VerificationCertificate> = Vec::new();
        for &rule in rules {
            let opts = VerifyOptions {
                budget: a.budget.budget(),
                threads: a.budget.threads.max(1),
                turn_cap: a.turn_cap,
                ep_rule: rule,
                checkpoint_dir: Some(checkpoints.clone()),
            };
            let result = match job {
                Job::Lemma(id) => {
                    report_resume(out, *id, &id.verification_configs(), &checkpoints, &opts);
                    mmchess_core::verify_lemma(*id, &opts)
                }
                Job::Cell(c) => {
                    if let Some(s) = mmchess_core::strategy_for(*c) {
                        report_resume(out, s.id, &[*c], &checkpoints, &opts);
                    }
                    mmchess_core::verify_theorem(*c, &opts)
                }
            };
            let cert = match result {
                Ok(c) => c,
                Err(VerifyError::Unsupported(c)) => {
                    let _ = writeln!(
                        out,
                        "{c}: open problem; no strategy is known for this cell (try `solve` for bounded search)"
                    );
                    raise(exit::UNSUPPORTED, &mut worst);
                    continue;
                }
                Err(e) => {
                    raise(fail(out, exit::IO, e), &mut worst);
                    continue;
                }
            };
            let _ = print_certificate(out, &cert);
            match cert.write_to_dir(&a.out) {
                Ok(p) => {
                    let _ = writeln!(out, "  certificate: {}", p.display());
                }
                Err(e) => raise(fail(out, exit::IO, format!("writing certificate: {e}")), &mut worst),
            }
            raise(
                match cert.status {
                    VerifyStatus::Verified => exit::OK,
                    VerifyStatus::Counterexample => exit::COUNTEREXAMPLE,
                    VerifyStatus::ResourceLimit => exit::RESOURCE_LIMIT,
                },
                &mut worst,
            );
            pair.push(cert);
        }
        if let [strict, loose] = &pair[..] {
            reports.push(SensitivityReport {
                lemma: strict.lemma,
                status_differs: strict.status != loose.status,
                strict: strict.clone(),
                loose: loose.clone(),
            });
        }
    }
    if !reports.is_empty() {
        let path = a.out.join("sensitivity.md");
        let body = format!("# En-passant sensitivity\n\n{}", sensitivity_markdown(&reports));
        match std::fs::write(&path, body) {
            Ok(()) => {
                let _ = writeln!(out, "sensitivity report: {}", path.display());
            }
            Err(e) => raise(
                fail(out, exit::IO, format!("writing {}: {e}", path.display())),
                &mut worst,
            ),
        }
    }
    let _ = elapsed_line(out, start);
    worst
}

fn report_resume(out: &mut dyn Write, id: StrategyId, cells: &[TurnConfig], dir: &Path, opts: &VerifyOptions) {
    for &c in cells {
        if let Some(n) = checkpoint_progress(dir, id, c, opts) {
            let _ = writeln!(
                out,
                "{id} {c} {}: resuming, {n} top-level branches already done",
                opts.ep_rule
            );
        }
    }
}

fn print_certificate(out: &mut dyn Write, c: &VerificationCertificate) -> io::Result<()> {
    let cells: Vec<String> = c.configs.iter().map(|c| c.to_string()).collect();
    writeln!(out, "{} {} {}: {}", c.lemma, cells.join(" "), c.ep_rule, c.status)?;
    writeln!(
        out,
        "  turn bound {}, lines {}, opponent states {} (raw {}), deepest line {} plies",
        c.turn_bound, c.branches_examined, c.opponent_states, c.raw_sequences, c.max_depth_plies
    )?;
    if c.status == VerifyStatus::ResourceLimit {
        for i in &c.instances {
            writeln!(
                out,
                "  {}: {} of {} top-level branches done; rerun the same command to resume",
                i.config, i.completed_branches, i.top_level_branches
            )?;
        }
    }
    if !c.case_tags.is_empty() {
        let tags: Vec<String> = c.case_tags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "  cases: {}", tags.join(" "))?;
    }
    if let Some(e) = &c.extension {
        writeln!(out, "  extension: {e}")?;
    }
    if let Some(cx) = &c.counterexample {
        writeln!(out, "  counterexample ({:?}) on {}: {}", cx.kind, cx.config, cx.reason)?;
        for line in cx.record.lines() {
            writeln!(out, "    {line}")?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solve

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> u8 {
    let start = Instant::now();
    let cfg = match config(a.white, a.black) {
        Ok(c) => c,
        Err(e) => return fail(out, exit::USAGE, e),
    };
    let pos = match &a.xfen {
        Some(x) => match parse_xfen(x) {
            Ok(p) if p.config() == cfg => p,
            Ok(p) => {
                return fail(
                    out,
                    exit::USAGE,
                    format!("XFen is for {} but --white/--black give {cfg}", p.config()),
                )
            }
            Err(e) => return fail(out, exit::IO, format!("bad XFen: {e}")),
        },
        None => Position::initial(cfg),
    };
    let opts = SolveOptions {
        budget: a.budget.budget(),
        threads: a.budget.threads.max(1),
        extract_tree: true,
        ..SolveOptions::default()
    };
    let r = match solve_forced_win_with(cfg, &pos, a.side, a.turns, &opts) {
        Ok(r) => r,
        Err(e) => return fail(out, exit::USAGE, e),
    };
    let _ = writeln!(out, "{cfg} {} within {} turns: {}", a.side, a.turns, r.status);
    let _ = writeln!(
        out,
        "  nodes {}, table hits {}, oracle calls {} ({} nodes)",
        r.stats.nodes, r.stats.table_hits, r.stats.oracle_calls, r.stats.oracle_nodes
    );
    if let Some(tree) = &r.strategy_tree {
        let (nodes, leaves) = tree.size();
        if let Err(e) = std::fs::write(&a.tree_out, tree.to_text()) {
            return fail(out, exit::IO, format!("writing {}: {e}", a.tree_out.display()));
        }
        let _ = writeln!(
            out,
            "  strategy tree: {nodes} nodes, {leaves} winning lines, written to {}",
            a.tree_out.display()
        );
    }
    let _ = elapsed_line(out, start);
    match r.status {
        SolveStatus::Unknown => exit::RESOURCE_LIMIT,
        _ => exit::OK,
    }
}

// ---------------------------------------------------------------------------
// perft

fn cmd_perft(a: PerftArgs, out: &mut dyn Write) -> u8 {
    let PerftMode::Variant = a.mode;
    let pos = match &a.xfen {
        Some(x) => match parse_xfen(x) {
            Ok(p) => p,
            Err(e) => return fail(out, exit::IO, format!("bad XFen: {e}")),
        },
        None => match config(a.white, a.black) {
            Ok(c) => Position::initial(c),
            Err(e) => return fail(out, exit::USAGE, e),
        },
    };
    let mut code = exit::OK;
    for d in 1..=a.depth {
        let n = movegen::perft(&pos, d);
        if a.audit {
            let naive = naive_perft(&pos, d);
            let verdict = if naive == n { "ok" } else { "MISMATCH" };
            let _ = writeln!(out, "depth {d}: {n} (naive {naive}) {verdict}");
            if naive != n {
                code = exit::COUNTEREXAMPLE;
            }
        } else {
            let _ = writeln!(out, "depth {d}: {n}");
        }
    }
    code
}

// ---------------------------------------------------------------------------
// serve

fn cmd_serve(a: ServeArgs, out: &mut dyn Write) -> u8 {
    let listener = match TcpListener::bind(&a.addr) {
        Ok(l) => l,
        Err(e) => return fail(out, exit::IO, format!("binding {}: {e}", a.addr)),
    };
    let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or(a.addr);
    let _ = writeln!(out, "listening on {addr}");
    let _ = out.flush();
    let service = Arc::new(Service::new(ServiceConfig {
        bot_time_cap: a.bot_time_cap,
        ..ServiceConfig::default()
    }));
    match mmchess_service::serve(listener, service) {
        Ok(()) => exit::OK,
        Err(e) => fail(out, exit::IO, e),
    }
}
