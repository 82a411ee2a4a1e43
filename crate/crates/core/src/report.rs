use serde::{Deserialize, Serialize};

/// Outcome of one verifier clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseResult {
    pub clause: String,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub pass: bool,
    pub detail: String,
}

/// Clause-by-clause verification report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub pass: bool,
    pub clauses: Vec<ClauseResult>,
}

impl Report {
    pub fn new() -> Self {
        Report {
            pass: true,
            clauses: Vec::new(),
        }
    }

    pub fn check(
        &mut self,
        clause: &str,
        m: Option<usize>,
        k: Option<usize>,
        pass: bool,
        detail: impl Into<String>,
    ) -> bool {
        self.pass &= pass;
        self.clauses.push(ClauseResult {
            clause: clause.to_string(),
            m,
            k,
            pass,
            detail: detail.into(),
        });
        pass
    }

    pub fn fail(&mut self, clause: &str, detail: impl Into<String>) {
        self.check(clause, None, None, false, detail);
    }

    pub fn passed(&self) -> bool {
        self.pass && self.clauses.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseResult> {
        self.clauses.iter().filter(|c| !c.pass)
    }

    /// Names of failed clauses, deduplicated, in first-failure order.
    pub fn failed_clauses(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in self.failures() {
            if !out.contains(&c.clause.as_str()) {
                out.push(&c.clause);
            }
        }
        out
    }
}
