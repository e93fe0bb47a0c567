//! Release acceptance: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the test harness so the lines always show.

mod common;

use std::time::{Duration, Instant};

use common::*;
use mmchess_core::strategies::MutatedScript;
use mmchess_core::verifier::sensitivity_markdown;
use mmchess_core::{
    can_capture_king_within, explore_open_cell, parse_record, reach_squares_within, sensitivity_rerun,
    solve_forced_win, sq, to_xfen, verify_lemma, verify_script, Budget, Color, FailureKind, Position, SolveStatus,
    SquareSet, StrategyId, StrategyScript, TurnConfig, VerifyOptions, VerifyStatus,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("lemma certificates", lemma_certificates),
        ("deep lemmas", deep_lemmas),
        ("oracle facts", oracle_facts),
        ("independent rediscovery", rediscovery),
        ("open cells stay open", open_cells),
        ("engine property suite", engine_properties),
        ("en-passant sensitivity report", sensitivity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn verify_within(id: StrategyId, limit: Duration) -> Result<String, String> {
    let started = Instant::now();
    let cert = verify_lemma(id, &VerifyOptions::default()).map_err(|e| format!("{id}: {e}"))?;
    let took = started.elapsed();
    if cert.status != VerifyStatus::Verified {
        return Err(cert.summary_line());
    }
    if took > limit {
        return Err(format!("{id} took {took:?}, limit {limit:?}"));
    }
    Ok(format!("{id} {} lines T={}", cert.branches_examined, cert.turn_bound))
}

fn lemma_certificates() -> Outcome {
    let secs = Duration::from_secs;
    let limits = [
        (StrategyId::L2, secs(1)),
        (StrategyId::L3, secs(1)),
        (StrategyId::L6, secs(1)),
        (StrategyId::L4, secs(10)),
        (StrategyId::L5, secs(600)),
        (StrategyId::L8, secs(600)),
        (StrategyId::L10, secs(1800)),
    ];
    let mut parts = Vec::new();
    for (id, limit) in limits {
        parts.push(verify_within(id, limit)?);
    }
    Ok(parts.join(", "))
}

fn deep_lemmas() -> Outcome {
    let mut parts = Vec::new();
    for id in [StrategyId::L7, StrategyId::L9] {
        let opts = VerifyOptions {
            budget: Budget::time(Duration::from_secs(7200)),
            ..VerifyOptions::default()
        };
        let cert = verify_lemma(id, &opts).map_err(|e| e.to_string())?;
        if cert.status != VerifyStatus::Verified {
            return Err(cert.summary_line());
        }
        parts.push(format!("{id} Verified with turn bound {}", cert.turn_bound));
    }
    Ok(parts.join(", "))
}

fn oracle_facts() -> Outcome {
    let start = Position::initial(TurnConfig::of(1, 1));
    if let Some(w) = can_capture_king_within(&start, 3).map_err(|e| e.to_string())? {
        return Err(format!("capture in 3 claimed: {w:?}"));
    }
    let w = can_capture_king_within(&start, 4)
        .map_err(|e| e.to_string())?
        .ok_or("no capture within 4")?;
    let line = mmchess_core::notation::moves_to_text(&w.moves);

    // After any White first move and b8c6 g8f6 a7a6, the two knights reach
    // all of c1-g3 within three moves each.
    let mut box_squares = SquareSet::EMPTY;
    for rank in 0..3 {
        for file in 2..7 {
            box_squares.insert(mmchess_core::Square::new(file, rank));
        }
    }
    let config = TurnConfig::of(1, 3);
    let initial = Position::initial(config);
    let mut openings = 0;
    for first in mmchess_core::legal_moves(&initial) {
        let mut p = mmchess_core::apply_move(&initial, first).unwrap();
        for text in ["b8c6", "g8f6", "a7a6"] {
            let mv = mmchess_core::notation::parse_move(text, &p).map_err(|e| e.to_string())?;
            p = mmchess_core::apply_move(&p, mv).map_err(|e| e.to_string())?;
        }
        let reach = reach_squares_within(&p, sq("c6"), 3).unwrap() | reach_squares_within(&p, sq("f6"), 3).unwrap();
        let missing = box_squares & !reach;
        if !missing.is_empty() {
            return Err(format!("after {first}: {missing:?} not covered"));
        }
        openings += 1;
    }
    Ok(format!(
        "none within 3, witness {line} at 4; knight box of {} squares covered after all {openings} White openings",
        box_squares.len()
    ))
}

fn rediscovery() -> Outcome {
    let mut parts = Vec::new();
    for (i, j, t) in [(2, 1, 2), (4, 1, 1)] {
        let started = Instant::now();
        let start = Position::initial(TurnConfig::of(i, j));
        let r = solve_forced_win(start.config(), &start, Color::White, t).map_err(|e| e.to_string())?;
        let took = started.elapsed();
        if r.status != SolveStatus::ProvenWin {
            return Err(format!("({i},{j}) T={t}: {}", r.status));
        }
        if took > Duration::from_secs(300) {
            return Err(format!("({i},{j}) took {took:?}"));
        }
        let tree = r.strategy_tree.ok_or("no strategy tree")?;
        mmchess_core::solver::audit_against_random(&tree, 0..20).map_err(|e| e.to_string())?;
        parts.push(format!("({i},{j}) ProvenWin at T={t}"));
    }
    Ok(parts.join(", "))
}

fn open_cells() -> Outcome {
    let mut parts = Vec::new();
    for (i, j, max_turns) in [(2, 2, 3), (1, 1, 4)] {
        let report = explore_open_cell(TurnConfig::of(i, j), Budget::time(Duration::from_secs(120)), max_turns);
        if report.attempts.iter().any(|a| a.1 == SolveStatus::ProvenWin) {
            return Err(format!("({i},{j}) claimed a win"));
        }
        let last = report.attempts.last().ok_or("no attempt ran")?;
        parts.push(format!("({i},{j}) {} at T={}", last.1, last.0));
    }
    Ok(parts.join(", "))
}

fn engine_properties() -> Outcome {
    let n = 1000u64;
    for seed in 0..n {
        let pos = mixed(seed);
        let ctx = |e: String| format!("seed {seed} {}: {e}", to_xfen(&pos));
        check_make_unmake(&pos).map_err(ctx)?;
        check_generators_agree(&pos).map_err(ctx)?;
        check_mirror(&pos).map_err(ctx)?;
        check_xfen_roundtrip(&pos).map_err(ctx)?;
        check_record_roundtrip(&playout(seed).1).map_err(ctx)?;
    }
    let mutations = [
        (StrategyId::L2, 0, 0, "b1c3"),
        (StrategyId::L2, 0, 1, "a3c4"),
        (StrategyId::L3, 0, 1, "a3c4"),
        (StrategyId::L4, 1, 1, "h2h3"),
        (StrategyId::L5, 0, 2, "g1e2"),
        (StrategyId::L6, 0, 3, "c7a8"),
        (StrategyId::L7, 0, 1, "a7a6"),
        (StrategyId::L8, 0, 0, "b8a6"),
        (StrategyId::L9, 0, 2, "h7h6"),
        (StrategyId::L10, 0, 0, "a7a6"),
    ];
    for (id, turn, ply, rep) in mutations {
        let m = MutatedScript {
            base: StrategyScript::new(id),
            turn,
            ply,
            replacement: rep.into(),
        };
        let cert =
            verify_script(&m, &id.verification_configs(), &VerifyOptions::default()).map_err(|e| e.to_string())?;
        if cert.status != VerifyStatus::Counterexample {
            return Err(format!("{id} with {rep} still {}", cert.status));
        }
        let cx = cert.counterexample.ok_or("missing counterexample")?;
        let end = parse_record(&cx.record)
            .map_err(|e| e.to_string())?
            .replay()
            .map_err(|e| e.to_string())?;
        let replays = match cx.kind {
            FailureKind::OpponentWin => end.winner() == Some(id.side().opponent()),
            _ => !end.is_terminal(),
        };
        if !replays {
            return Err(format!("{id} with {rep}: counterexample does not replay to its claim"));
        }
    }
    Ok(format!(
        "{n} positions: undo, naive generator, mirror, XFen and record round trips exact; {} mutated scripts all refuted",
        mutations.len()
    ))
}

fn sensitivity() -> Outcome {
    let mut reports = Vec::new();
    for n in 2..=10 {
        let id = StrategyId::from_number(n).unwrap();
        reports.push(sensitivity_rerun(id, &VerifyOptions::default()).map_err(|e| e.to_string())?);
    }
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("sensitivity.md");
    std::fs::write(&path, sensitivity_markdown(&reports)).map_err(|e| e.to_string())?;
    let written = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    for r in &reports {
        if !written.contains(&format!("| {} | {} | {} |", r.lemma, r.strict.status, r.loose.status)) {
            return Err(format!("{} missing from the report", r.lemma));
        }
    }
    let differing: Vec<String> = reports
        .iter()
        .filter(|r| r.status_differs)
        .map(|r| r.lemma.to_string())
        .collect();
    Ok(format!(
        "{} strategies under both rules, written to {}; status differs for: {}",
        reports.len(),
        path.display(),
        if differing.is_empty() {
            "none".to_string()
        } else {
            differing.join(", ")
        }
    ))
}
