//! Planning budgets: wall-clock seconds for benchmarks, sample counts for
//! deterministic runs.
//!
//! Wall-clock runs are not reproducible, so every test that needs
//! byte-identical output uses the sample budget. In that mode the "time" a
//! trace reports is the number of sample draws consumed so far, a
//! deterministic virtual clock.

use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Wall-clock limit in seconds.
    TimeS(f64),
    /// Maximum number of configuration draws (accepted or rejected).
    Samples(u64),
}

/// Tracks budget consumption for one planning session.
#[derive(Debug)]
pub struct Clock {
    budget: Budget,
    started: Instant,
    attempts: u64,
    accepted: u64,
}

impl Clock {
    pub fn new(budget: Budget) -> Self {
        Clock {
            budget,
            started: Instant::now(),
            attempts: 0,
            accepted: 0,
        }
    }

    pub fn expired(&self) -> bool {
        match self.budget {
            Budget::TimeS(limit) => self.started.elapsed().as_secs_f64() > limit,
            Budget::Samples(limit) => self.attempts >= limit,
        }
    }

    pub fn note_attempt(&mut self) {
        self.attempts += 1;
    }

    pub fn note_accepted(&mut self) {
        self.accepted += 1;
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// Trace timestamp: elapsed seconds, or consumed draws in budget mode.
    pub fn now(&self) -> f64 {
        match self.budget {
            Budget::TimeS(_) => self.started.elapsed().as_secs_f64(),
            Budget::Samples(_) => self.attempts as f64,
        }
    }

    /// Total budget extent in the same unit as [`Clock::now`].
    pub fn horizon(&self) -> f64 {
        match self.budget {
            Budget::TimeS(limit) => limit,
            Budget::Samples(limit) => limit as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_budget_expires_by_attempts() {
        let mut clock = Clock::new(Budget::Samples(3));
        assert!(!clock.expired());
        clock.note_attempt();
        clock.note_attempt();
        assert!(!clock.expired());
        clock.note_attempt();
        assert!(clock.expired());
        assert_eq!(clock.now(), 3.0);
    }

    #[test]
    fn budget_serde_shape() {
        assert_eq!(
            serde_json::to_string(&Budget::TimeS(5.0)).unwrap(),
            "{\"time_s\":5.0}"
        );
        assert_eq!(
            serde_json::to_string(&Budget::Samples(100)).unwrap(),
            "{\"samples\":100}"
        );
    }
}
