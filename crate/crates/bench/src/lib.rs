//! Fixed inputs shared by the benchmarks.

use mmchess_core::{parse_xfen, Position, TurnConfig};

/// A middlegame with both sides developed, for move generation timing.
pub const MIDDLEGAME: &str = "r1bqk2r/pppp1ppp/2n2n2/2b1p3/2B1P3/2N2N2/PPPP1PPP/R1BQK2R w KQkq - 0 1 1 1 1";

pub fn start(i: u32, j: u32) -> Position {
    Position::initial(TurnConfig::of(i, j))
}

pub fn middlegame() -> Position {
    parse_xfen(MIDDLEGAME).expect("fixture parses")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_parse() {
        let p = super::middlegame();
        assert_eq!(
            mmchess_core::legal_moves(&p).len(),
            mmchess_core::reference::naive_moves(&p).len()
        );
        assert!(!p.is_terminal());
    }
}
