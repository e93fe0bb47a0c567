//! Terminal play against a bot, driven through the same service the browser
//! client uses.

use std::io::{BufRead, Write};

use mmchess_core::{board_diagram, parse_xfen};
use mmchess_service::protocol::{GameState, WinEvent};
use mmchess_service::{Phase, Request, Response, Service};

use crate::{exit, PlayArgs};

/// `echo` repeats each input line after its prompt, so transcripts of piped
/// sessions read like interactive ones.
pub fn run(a: PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write, echo: bool) -> u8 {
    match play(a, input, out, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::IO
        }
    }
}

fn play(a: PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write, echo: bool) -> std::io::Result<u8> {
    let svc = Service::default();
    let created = svc.handle(Request::NewGame {
        white: a.white,
        black: a.black,
        human_side: a.side,
        bot_policy: a.bot,
        ep_rule: None,
        seed: Some(a.seed),
    });
    let (mut state, warning) = match created {
        Response::GameCreated { state, warning } => (state, warning),
        Response::Error { message, .. } => {
            eprintln!("error: {message}");
            return Ok(exit::USAGE);
        }
        other => unreachable!("unexpected response {other:?}"),
    };
    writeln!(
        out,
        "Multimove Chess ({},{}): you play {}, the bot plays {} ({}{})",
        a.white,
        a.black,
        a.side,
        a.side.opponent(),
        a.bot.name(),
        state.strategy.as_deref().map(|s| format!(", {s}")).unwrap_or_default()
    )?;
    if let Some(w) = warning {
        writeln!(out, "notice: {w}")?;
    }
    writeln!(
        out,
        "Enter moves like e2e4 or e7e8q; `moves` lists legal moves, `quit` leaves."
    )?;
    let mut shown = String::new();
    loop {
        if state.xfen != shown {
            show(out, &state)?;
            shown = state.xfen.clone();
        }
        match state.phase {
            Phase::Over => return Ok(exit::OK),
            Phase::Bot => {
                let r = svc.handle(Request::BotTurn {
                    session: state.session.clone(),
                });
                match r {
                    Response::BotMoved {
                        moves,
                        state: s,
                        event,
                        fallback,
                        ..
                    } => {
                        if let Some(f) = fallback {
                            writeln!(out, "notice: {f}")?;
                        }
                        writeln!(out, "bot plays: {}", moves.join(" "))?;
                        announce(out, &event)?;
                        state = s;
                    }
                    Response::Error { message, .. } => {
                        eprintln!("error: {message}");
                        return Ok(exit::IO);
                    }
                    other => unreachable!("unexpected response {other:?}"),
                }
            }
            Phase::Human => {
                write!(out, "{} ({} left)> ", state.side_to_move, state.moves_remaining)?;
                out.flush()?;
                let mut line = String::new();
                if input.read_line(&mut line)? == 0 {
                    writeln!(out)?;
                    writeln!(out, "input closed")?;
                    return Ok(exit::OK);
                }
                let text = line.trim();
                if echo {
                    writeln!(out, "{text}")?;
                }
                match text {
                    "" => continue,
                    "quit" | "exit" => return Ok(exit::OK),
                    "moves" => {
                        writeln!(out, "{}", state.legal_moves.join(" "))?;
                        continue;
                    }
                    _ => {}
                }
                match svc.handle(Request::SubmitMove {
                    session: state.session.clone(),
                    move_text: text.to_string(),
                }) {
                    Response::MoveApplied { state: s, event, .. } => {
                        announce(out, &event)?;
                        state = s;
                    }
                    Response::Error { message, .. } => writeln!(out, "rejected: {message}")?,
                    other => unreachable!("unexpected response {other:?}"),
                }
            }
        }
    }
}

fn show(out: &mut dyn Write, s: &GameState) -> std::io::Result<()> {
    let pos = parse_xfen(&s.xfen).expect("service emits valid XFen");
    writeln!(out)?;
    write!(out, "{}", board_diagram(&pos))?;
    if s.phase != Phase::Over {
        writeln!(
            out,
            "{} to move, {} left in the turn",
            s.side_to_move, s.moves_remaining
        )?;
    }
    Ok(())
}

fn announce(out: &mut dyn Write, event: &Option<WinEvent>) -> std::io::Result<()> {
    if let Some(e) = event {
        writeln!(
            out,
            "{} captures the king with {}: {} wins",
            e.winner, e.move_text, e.winner
        )?;
    }
    Ok(())
}
