//! PASS/FAIL bookkeeping for the acceptance suite in `tests/acceptance.rs`.

use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub name: &'static str,
    pub outcome: Outcome,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.outcome.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} criterion {} ({:.2}s): {}", self.name, self.seconds, self.outcome.detail)
    }
}

#[derive(Debug, Default)]
pub struct Suite {
    results: Vec<CriterionResult>,
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs one criterion, timing it, and prints its line immediately.
    pub fn run(&mut self, name: &'static str, check: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = check();
        let result = CriterionResult { name, outcome, seconds: start.elapsed().as_secs_f64() };
        println!("{result}");
        self.results.push(result);
    }

    pub fn results(&self) -> &[CriterionResult] {
        &self.results
    }

    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| !r.outcome.passed).count()
    }

    pub fn summary(&self) -> String {
        let failed: Vec<_> = self.results.iter().filter(|r| !r.outcome.passed).map(|r| r.name).collect();
        let mut s = format!("{} of {} acceptance checks passed", self.results.len() - failed.len(), self.results.len());
        if !failed.is_empty() {
            s.push_str(&format!("; failing: {}", failed.join(", ")));
        }
        s
    }
}
