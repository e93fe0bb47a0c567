use std::collections::HashSet;

use mmchess_core::notation::{parse_moves, parse_record};
use mmchess_core::reference::naive_moves;
use mmchess_core::strategies::MutatedScript;
use mmchess_core::verifier::{FailureKind, VerificationCertificate};
use mmchess_core::*;

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

fn play(pos: &mut Position, text: &str) {
    for m in parse_moves(text, pos).unwrap() {
        pos.make(m);
    }
}

/// Fixed-line strategies against a one-move opponent, counted with the
/// naive generator: every Black reply, then the fixed second turn must take
/// the king.
fn naive_fixed_line_count(config: TurnConfig, first: &str, second: &str) -> u64 {
    let mut start = Position::initial(config);
    play(&mut start, first);
    let mut leaves = 0;
    for reply in naive_moves(&start) {
        let mut p = start;
        p.make(reply);
        assert!(!p.is_terminal());
        play(&mut p, second);
        assert_eq!(p.winner(), Some(Color::White), "after {reply}");
        leaves += 1;
    }
    leaves
}

#[test]
fn fixed_lines_match_naive_count() {
    for (id, cfg, first, second) in [
        (StrategyId::L2, TurnConfig::of(2, 1), "b1a3 a3b5", "b5c7 c7e8"),
        (StrategyId::L3, TurnConfig::of(3, 1), "b1a3 a3b5 h2h3", "b5c7 c7e8"),
    ] {
        let cert = verify_lemma(id, &opts()).unwrap();
        assert_eq!(cert.status, VerifyStatus::Verified);
        let naive = naive_fixed_line_count(cfg, first, second);
        assert_eq!(cert.branches_examined, naive, "{id}");
        assert_eq!(cert.raw_sequences, naive, "{id}");
        assert_eq!(cert.turn_bound, 2);
    }
    let cert = verify_lemma(StrategyId::L6, &opts()).unwrap();
    let mut p = Position::initial(TurnConfig::of(4, 1));
    play(&mut p, "b1a3 a3b5 b5c7 c7e8");
    assert_eq!(p.winner(), Some(Color::White));
    assert_eq!(
        (cert.branches_examined, cert.opponent_states, cert.turn_bound),
        (1, 0, 1)
    );
}

#[test]
fn raw_and_distinct_counts_match_naive_enumeration() {
    // Black's two-move turns after the (3,2) opening, counted with the naive
    // generator and deduplicated by XFen text.
    let mut start = Position::initial(TurnConfig::of(3, 2));
    play(&mut start, "b1c3 e2e3 d1f3");
    let mut raw = 0u64;
    let mut distinct = HashSet::new();
    for a in naive_moves(&start) {
        let mut p = start;
        p.make(a);
        for b in naive_moves(&p) {
            let mut q = p;
            q.make(b);
            raw += 1;
            distinct.insert(to_xfen(&q));
        }
    }
    let cert = verify_lemma(StrategyId::L4, &opts()).unwrap();
    assert_eq!(cert.raw_sequences, raw);
    assert_eq!(cert.opponent_states, distinct.len() as u64);
    assert_eq!(cert.branches_examined, distinct.len() as u64);
}

#[test]
fn every_strategy_verifies_on_its_cells() {
    for id in [
        StrategyId::L2,
        StrategyId::L3,
        StrategyId::L4,
        StrategyId::L5,
        StrategyId::L6,
        StrategyId::L7,
        StrategyId::L8,
    ] {
        let cert = verify_lemma(id, &opts()).unwrap();
        assert_eq!(cert.status, VerifyStatus::Verified, "{}", cert.summary_line());
        assert!(cert.counterexample.is_none());
        assert!(cert.turn_bound >= 1 && cert.turn_bound <= 3);
    }
}

#[test]
fn case_split_for_one_two_covers_all_classes() {
    let cert = verify_lemma(StrategyId::L7, &opts()).unwrap();
    let keys: Vec<&str> = cert.case_tags.keys().map(String::as_str).collect();
    assert_eq!(keys, ["A", "B", "C", "D"]);
    assert_eq!(cert.case_tags.values().sum::<u64>(), cert.branches_examined);
    assert_eq!(cert.turn_bound, 3);
}

fn mutated(id: StrategyId, turn: usize, ply: usize, replacement: &str) -> VerificationCertificate {
    let m = MutatedScript {
        base: StrategyScript::new(id),
        turn,
        ply,
        replacement: replacement.into(),
    };
    verify_script(&m, &id.verification_configs(), &opts()).unwrap()
}

#[test]
fn single_ply_mutations_are_caught() {
    // Each swap was confirmed to break its strategy. The three-move opening
    // for (3,2) survives every single swap tried, so that one alters the
    // follow-up turn instead.
    let cases = [
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
    for (id, turn, ply, rep) in cases {
        let cert = mutated(id, turn, ply, rep);
        assert_eq!(
            cert.status,
            VerifyStatus::Counterexample,
            "{id} {rep}: {}",
            cert.summary_line()
        );
        let cx = cert.counterexample.expect("counterexample");
        let record = parse_record(&cx.record).expect("counterexample record replays");
        let end = record.replay().unwrap();
        if cx.kind == FailureKind::OpponentWin {
            assert_eq!(end.winner(), Some(id.side().opponent()));
        } else {
            assert!(!end.is_terminal());
        }
    }
}

#[test]
fn counterexample_is_deterministic() {
    let a = mutated(StrategyId::L5, 0, 2, "g1e2");
    let b = mutated(StrategyId::L5, 0, 2, "g1e2");
    assert_eq!(a.without_timing(), b.without_timing());
}

#[test]
fn parallel_matches_sequential() {
    let seq = verify_lemma(StrategyId::L5, &opts()).unwrap();
    let par = verify_lemma(StrategyId::L5, &VerifyOptions { threads: 4, ..opts() }).unwrap();
    assert_eq!(seq.without_timing(), par.without_timing());
    let cx_par = verify_script(
        &MutatedScript {
            base: StrategyScript::new(StrategyId::L5),
            turn: 0,
            ply: 2,
            replacement: "g1e2".into(),
        },
        &[TurnConfig::of(3, 3)],
        &VerifyOptions { threads: 4, ..opts() },
    )
    .unwrap();
    assert_eq!(
        cx_par.counterexample,
        mutated(StrategyId::L5, 0, 2, "g1e2").counterexample
    );
}

#[test]
fn interrupted_run_resumes_to_same_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("checkpoints");
    let fresh = verify_lemma(StrategyId::L5, &opts()).unwrap();
    let limited = VerifyOptions {
        budget: Budget::nodes(1500),
        checkpoint_dir: Some(dir.clone()),
        ..opts()
    };
    let first = verify_lemma(StrategyId::L5, &limited).unwrap();
    assert_eq!(first.status, VerifyStatus::ResourceLimit);
    let inst = &first.instances[0];
    assert!(inst.completed_branches > 0 && inst.completed_branches < inst.top_level_branches);
    // A write torn by the interruption is skipped on resume.
    let file = std::fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path();
    let mut text = std::fs::read_to_string(&file).unwrap();
    text.push_str("{\"branch\":99999,\"tal");
    std::fs::write(&file, text).unwrap();
    let resumed = verify_lemma(
        StrategyId::L5,
        &VerifyOptions {
            checkpoint_dir: Some(dir.clone()),
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(resumed.without_timing(), fresh.without_timing());
    // The finished run cleans up after itself.
    assert!(!dir.exists());
}

#[test]
fn theorem_cells_map_to_boundary_instances() {
    let c = verify_theorem(TurnConfig::of(7, 3), &opts()).unwrap();
    assert_eq!(c.lemma, StrategyId::L6);
    assert_eq!(c.configs, vec![TurnConfig::of(4, 3)]);
    assert_eq!(c.status, VerifyStatus::Verified);
    assert!(c.extension.is_some());
    let c = verify_theorem(TurnConfig::of(2, 1), &opts()).unwrap();
    assert_eq!(c.configs, vec![TurnConfig::of(2, 1)]);
    assert!(c.extension.is_none());
    for open in [TurnConfig::of(1, 1), TurnConfig::of(2, 2)] {
        assert!(matches!(
            verify_theorem(open, &opts()),
            Err(VerifyError::Unsupported(_))
        ));
    }
}

#[test]
fn open_cell_bound_one_is_not_a_win() {
    let r = verifier::explore_open_cell(TurnConfig::of(2, 2), Budget::UNLIMITED, 1);
    assert_eq!(r.result.status, SolveStatus::ProvenNotWinWithinBound);
    assert_eq!(r.attempts.len(), 1);
    let r = verifier::explore_open_cell(TurnConfig::of(1, 1), Budget::nodes(1), 5);
    assert_eq!(r.result.status, SolveStatus::Unknown);
}

#[test]
fn certificates_write_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let cert = verify_lemma(StrategyId::L2, &opts()).unwrap();
    let path = cert.write_to_dir(dir.path()).unwrap();
    assert!(path.ends_with("lemma2.json"));
    let back = VerificationCertificate::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, cert);
    let loose = verify_lemma(
        StrategyId::L2,
        &VerifyOptions {
            ep_rule: EpRule::Loose,
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(loose.file_name(), "lemma2.ep-loose.json");
}

/// Counts produced by the first full runs, frozen so that any change to the
/// enumeration shows up as a diff. (lines, opponent states, raw sequences,
/// turn bound)
#[test]
fn certificate_counts_are_frozen() {
    let frozen: [(StrategyId, u64, u64, u64, u32); 9] = [
        (StrategyId::L2, 19, 19, 19, 2),
        (StrategyId::L3, 19, 19, 19, 2),
        (StrategyId::L4, 380, 380, 445, 2),
        (StrategyId::L5, 4646, 4646, 11033, 2),
        (StrategyId::L6, 1, 0, 0, 1),
        (StrategyId::L7, 483, 505, 505, 3),
        (StrategyId::L8, 445, 465, 465, 2),
        (StrategyId::L9, 192_997, 193_377, 258_671, 2),
        (StrategyId::L10, 5059, 5059, 11513, 1),
    ];
    for (id, lines, states, raw, bound) in frozen {
        let c = verify_lemma(id, &opts()).unwrap();
        assert_eq!(c.status, VerifyStatus::Verified, "{id}");
        assert_eq!(
            (c.branches_examined, c.opponent_states, c.raw_sequences, c.turn_bound),
            (lines, states, raw, bound),
            "{id}"
        );
    }
}
