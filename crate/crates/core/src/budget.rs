//! Node and wall-clock limits shared by the solver and the verifier.

use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        max_nodes: None,
        max_time: None,
    };

    pub fn nodes(n: u64) -> Budget {
        Budget {
            max_nodes: Some(n),
            max_time: None,
        }
    }

    pub fn time(d: Duration) -> Budget {
        Budget {
            max_nodes: None,
            max_time: Some(d),
        }
    }

    pub fn with_time(mut self, d: Duration) -> Budget {
        self.max_time = Some(d);
        self
    }
}

/// Tracks consumption against a [`Budget`]. The clock is read only every few
/// thousand nodes.
#[derive(Clone, Debug)]
pub struct Meter {
    budget: Budget,
    start: Instant,
    deadline: Option<Instant>,
    pub nodes: u64,
    next_check: u64,
    tripped: bool,
}

const CHECK_EVERY: u64 = 4096;

impl Meter {
    pub fn new(budget: Budget) -> Meter {
        let start = Instant::now();
        Meter {
            budget,
            start,
            deadline: budget.max_time.map(|d| start + d),
            nodes: 0,
            next_check: CHECK_EVERY,
            tripped: false,
        }
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    /// Counts `n` nodes; returns false once the budget is exhausted.
    #[inline]
    pub fn spend(&mut self, n: u64) -> bool {
        self.nodes += n;
        if self.nodes >= self.next_check {
            self.next_check = self.nodes + CHECK_EVERY;
            self.check();
        }
        if let Some(max) = self.budget.max_nodes {
            if self.nodes > max {
                self.tripped = true;
            }
        }
        !self.tripped
    }

    /// Forces a clock check.
    pub fn check(&mut self) -> bool {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                self.tripped = true;
            }
        }
        !self.tripped
    }

    pub fn tripped(&self) -> bool {
        self.tripped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_limit_trips() {
        let mut m = Meter::new(Budget::nodes(10));
        assert!(m.spend(10));
        assert!(!m.spend(1));
        assert!(m.tripped());
    }

    #[test]
    fn zero_time_trips_on_check() {
        let mut m = Meter::new(Budget::time(Duration::ZERO));
        assert!(!m.check());
    }
}
