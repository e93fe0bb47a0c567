use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::time::Duration;

use mmchess_core::Color;
use mmchess_service::protocol::{GameState, WinEvent};
use mmchess_service::*;

fn new_game(svc: &Service, white: u32, black: u32, human: Color, policy: BotPolicy, seed: u64) -> Response {
    svc.handle(Request::NewGame {
        white,
        black,
        human_side: human,
        bot_policy: policy,
        ep_rule: None,
        seed: Some(seed),
    })
}

fn state(resp: &Response) -> &GameState {
    resp.state().unwrap_or_else(|| panic!("expected a state, got {resp:?}"))
}

fn error_code(resp: &Response) -> ErrorCode {
    match resp {
        Response::Error { code, .. } => *code,
        other => panic!("expected an error, got {other:?}"),
    }
}

fn submit(svc: &Service, session: &str, mv: &str) -> Response {
    svc.handle(Request::SubmitMove {
        session: session.into(),
        move_text: mv.into(),
    })
}

fn bot(svc: &Service, session: &str) -> Response {
    svc.handle(Request::BotTurn {
        session: session.into(),
    })
}

#[test]
fn new_game_assigns_covering_strategy() {
    let svc = Service::default();
    let r = new_game(&svc, 3, 1, Color::Black, BotPolicy::Lemma, 1);
    let Response::GameCreated { state, warning } = &r else {
        panic!("{r:?}")
    };
    assert_eq!(state.strategy.as_deref(), Some("lemma3"));
    assert!(warning.is_none());
    assert_eq!(state.phase, Phase::Bot);
}

#[test]
fn open_cell_lemma_bot_warns_and_falls_back() {
    let svc = Service::default();
    let r = new_game(&svc, 2, 2, Color::Black, BotPolicy::Lemma, 1);
    let Response::GameCreated { state, warning } = &r else {
        panic!("{r:?}")
    };
    assert!(warning.as_deref().unwrap().contains("no strategy"));
    let b = bot(&svc, &state.session);
    let Response::BotMoved {
        policy_used,
        fallback,
        moves,
        ..
    } = &b
    else {
        panic!("{b:?}")
    };
    assert_eq!(*policy_used, BotPolicy::Random);
    assert!(fallback.is_some());
    assert_eq!(moves.len(), 2);
}

#[test]
fn invalid_config_rejected() {
    let svc = Service::default();
    assert_eq!(
        error_code(&new_game(&svc, 0, 1, Color::White, BotPolicy::Random, 1)),
        ErrorCode::InvalidConfig
    );
}

#[test]
fn fresh_state_and_errors() {
    let svc = Service::default();
    let id = state(&new_game(&svc, 2, 1, Color::White, BotPolicy::Random, 1))
        .session
        .clone();
    let s = svc.handle(Request::GetState { session: id.clone() });
    let s = state(&s);
    assert_eq!(s.legal_moves.len(), 20);
    assert_eq!(s.moves_remaining, 2);
    assert_eq!(s.phase, Phase::Human);
    assert_eq!(
        error_code(&svc.handle(Request::GetState { session: "nope".into() })),
        ErrorCode::NotFound
    );
    assert_eq!(error_code(&bot(&svc, &id)), ErrorCode::NotYourTurn);
    assert_eq!(error_code(&submit(&svc, &id, "e2e5")), ErrorCode::IllegalMove);

    let r = submit(&svc, &id, "e2e4");
    let s = state(&r);
    assert_eq!(s.moves_remaining, 1);
    assert_eq!(s.side_to_move, Color::White);
    // The bot waits until the human's turn is complete.
    assert_eq!(error_code(&bot(&svc, &id)), ErrorCode::NotYourTurn);
    let r = submit(&svc, &id, "d2d4");
    assert_eq!(state(&r).phase, Phase::Bot);
    assert_eq!(error_code(&submit(&svc, &id, "e4e5")), ErrorCode::NotYourTurn);
}

#[test]
fn king_capture_ends_game_mid_turn() {
    let svc = Service::default();
    let id = state(&new_game(&svc, 5, 1, Color::White, BotPolicy::Random, 1))
        .session
        .clone();
    for mv in ["b1a3", "a3b5", "b5c7"] {
        assert!(matches!(
            submit(&svc, &id, mv),
            Response::MoveApplied { event: None, .. }
        ));
    }
    let r = submit(&svc, &id, "c7e8");
    let Response::MoveApplied { event, state, .. } = &r else {
        panic!("{r:?}")
    };
    assert_eq!(
        event,
        &Some(WinEvent {
            winner: Color::White,
            move_text: "c7e8".into()
        })
    );
    assert_eq!(state.status, GameStatus::Won);
    assert_eq!(state.phase, Phase::Over);
    assert!(state.legal_moves.is_empty());
    assert_eq!(error_code(&bot(&svc, &id)), ErrorCode::GameOver);
    assert_eq!(error_code(&submit(&svc, &id, "a2a3")), ErrorCode::GameOver);
}

#[test]
fn lemma_bot_opens_with_knight() {
    let svc = Service::default();
    let id = state(&new_game(&svc, 2, 1, Color::Black, BotPolicy::Lemma, 1))
        .session
        .clone();
    let r = bot(&svc, &id);
    let Response::BotMoved { moves, policy_used, .. } = &r else {
        panic!("{r:?}")
    };
    assert_eq!(moves, &["b1a3", "a3b5"]);
    assert_eq!(*policy_used, BotPolicy::Lemma);
}

/// A human playing Black in (3,1) loses by White's second turn whatever it
/// plays.
#[test]
fn lemma_bot_beats_random_humans() {
    let svc = Service::default();
    for seed in 0..40u64 {
        let id = state(&new_game(&svc, 3, 1, Color::Black, BotPolicy::Lemma, seed))
            .session
            .clone();
        bot(&svc, &id);
        let s = svc.handle(Request::GetState { session: id.clone() });
        let legal = &state(&s).legal_moves;
        let pick = &legal[(seed as usize * 7) % legal.len()];
        submit(&svc, &id, pick);
        let r = bot(&svc, &id);
        let Response::BotMoved {
            event,
            state,
            policy_used,
            ..
        } = &r
        else {
            panic!("{r:?}")
        };
        assert_eq!(*policy_used, BotPolicy::Lemma);
        assert_eq!(event.as_ref().map(|e| e.winner), Some(Color::White), "seed {seed}");
        assert_eq!(state.history.len(), 3);
    }
}

#[test]
fn solver_bot_wins_or_falls_back_with_flag() {
    let svc = Service::default();
    let id = state(&new_game(&svc, 4, 1, Color::Black, BotPolicy::Solver, 1))
        .session
        .clone();
    let r = bot(&svc, &id);
    let Response::BotMoved { policy_used, event, .. } = &r else {
        panic!("{r:?}")
    };
    assert_eq!(*policy_used, BotPolicy::Solver);
    assert!(event.is_some());

    let id = state(&new_game(&svc, 1, 1, Color::Black, BotPolicy::Solver, 1))
        .session
        .clone();
    let r = bot(&svc, &id);
    let Response::BotMoved {
        policy_used,
        fallback,
        moves,
        ..
    } = &r
    else {
        panic!("{r:?}")
    };
    assert_eq!(*policy_used, BotPolicy::Random);
    assert!(fallback.as_deref().unwrap().contains("solver"));
    assert_eq!(moves.len(), 1);
}

#[test]
fn strategies_listed() {
    let Response::Strategies {
        strategies,
        protocol_version,
    } = Service::default().handle(Request::ListStrategies {})
    else {
        panic!()
    };
    assert_eq!(protocol_version, PROTOCOL_VERSION);
    let ids: Vec<&str> = strategies.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(
        ids,
        ["lemma2", "lemma3", "lemma4", "lemma5", "lemma6", "lemma7", "lemma8", "lemma9", "lemma10"]
    );
}

#[test]
fn malformed_requests_rejected() {
    let svc = Service::default();
    for line in [
        "not json",
        r#"{"op":"get_state"}"#,
        r#"{"op":"list_strategies","extra":1}"#,
        r#"{"op":"launch"}"#,
        r#"{"op":"new_game","white":1,"black":1,"human_side":"red","bot_policy":"random"}"#,
    ] {
        let resp: Response = serde_json::from_str(&svc.handle_line(line)).unwrap();
        assert_eq!(error_code(&resp), ErrorCode::BadRequest, "{line}");
    }
}

/// Every response the service emits parses back under the strict schema,
/// and the documented examples parse too.
#[test]
fn responses_match_schema() {
    let svc = Service::default();
    let mut lines = vec![
        r#"{"op":"list_strategies"}"#.to_string(),
        r#"{"op":"new_game","white":2,"black":1,"human_side":"black","bot_policy":"lemma","seed":3}"#.to_string(),
        r#"{"op":"bot_turn","session":"s1"}"#.to_string(),
        r#"{"op":"submit_move","session":"s1","move":"a7a6"}"#.to_string(),
        r#"{"op":"get_state","session":"s1"}"#.to_string(),
        r#"{"op":"bot_turn","session":"s1"}"#.to_string(),
        r#"{"op":"bot_turn","session":"s1"}"#.to_string(),
    ];
    let docs = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/protocol.md")).unwrap();
    let mut documented_responses = 0;
    for l in docs.lines().map(str::trim) {
        if l.starts_with(r#"{"op""#) {
            serde_json::from_str::<Request>(l).unwrap_or_else(|e| panic!("documented request {l}: {e}"));
            lines.push(l.to_string());
        } else if l.starts_with(r#"{"type""#) {
            serde_json::from_str::<Response>(l).unwrap_or_else(|e| panic!("documented response {l}: {e}"));
            documented_responses += 1;
        }
    }
    assert!(documented_responses >= 5);
    for line in &lines {
        let out = svc.handle_line(line);
        let parsed: Response = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{out}: {e}"));
        assert_eq!(serde_json::to_string(&parsed).unwrap(), out);
    }
}

#[test]
fn tcp_round_trip() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let svc = Arc::new(Service::default());
    std::thread::spawn(move || serve(listener, svc));
    let stream = TcpStream::connect(addr).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut w = stream;
    let mut ask = |line: &str| -> Response {
        writeln!(w, "{line}").unwrap();
        let mut out = String::new();
        reader.read_line(&mut out).unwrap();
        serde_json::from_str(&out).unwrap()
    };
    let r = ask(r#"{"op":"new_game","white":4,"black":1,"human_side":"black","bot_policy":"lemma"}"#);
    let id = state(&r).session.clone();
    let r = ask(&format!(r#"{{"op":"bot_turn","session":"{id}"}}"#));
    let Response::BotMoved { moves, event, .. } = r else {
        panic!()
    };
    assert_eq!(moves, ["b1a3", "a3b5", "b5c7", "c7e8"]);
    assert_eq!(event.unwrap().winner, Color::White);
    assert_eq!(error_code(&ask("{}")), ErrorCode::BadRequest);
}

#[test]
fn concurrent_sessions_stay_consistent() {
    let svc = Arc::new(Service::default());
    let handles: Vec<_> = (0..8u64)
        .map(|seed| {
            let svc = Arc::clone(&svc);
            std::thread::spawn(move || {
                let id = state(&new_game(&svc, 1, 2, Color::White, BotPolicy::Random, seed))
                    .session
                    .clone();
                for _ in 0..10 {
                    let s = svc.handle(Request::GetState { session: id.clone() });
                    let s = state(&s).clone();
                    if s.phase == Phase::Over {
                        break;
                    }
                    if s.phase == Phase::Human {
                        let mv = s.legal_moves[seed as usize % s.legal_moves.len()].clone();
                        assert!(matches!(submit(&svc, &id, &mv), Response::MoveApplied { .. }));
                    } else {
                        assert!(matches!(bot(&svc, &id), Response::BotMoved { .. }));
                    }
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
}
