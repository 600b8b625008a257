//! Verification reports: named checks with pass/fail/skipped status and a
//! witness rendering for every failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Pass,
            witness: None,
            reason: None,
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            witness: Some(witness.into()),
            reason: None,
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            witness: None,
            reason: Some(reason.into()),
        }
    }

    /// Pass when `ok`, otherwise fail with the lazily rendered witness.
    pub fn expect(name: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            Self::pass(name)
        } else {
            Self::fail(name, witness())
        }
    }

    /// Converts an error raised while running a check into a failure.
    pub fn from_result(name: impl Into<String>, r: Result<Check, impl std::fmt::Display>) -> Self {
        let name = name.into();
        match r {
            Ok(c) => c,
            Err(e) => Self::fail(name, format!("error: {e}")),
        }
    }

    /// Attaches a free-form note, shown alongside passing checks too.
    pub fn with_reason(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Folds a batch of checks into one: passes iff none failed, keeping the
/// first failure's witness.
pub fn summarize(name: impl Into<String>, checks: &[Check]) -> Check {
    match checks.iter().find(|c| c.failed()) {
        Some(c) => Check::fail(
            name,
            format!("{}: {}", c.name, c.witness.as_deref().unwrap_or("")),
        ),
        None => Check::pass(name),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub version: String,
}

impl Report {
    pub fn new(suite: impl Into<String>, params: BTreeMap<String, String>) -> Self {
        Self {
            suite: suite.into(),
            params,
            checks: Vec::new(),
            summary: Summary::default(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn push(&mut self, check: Check) {
        match check.status {
            Status::Pass => self.summary.pass += 1,
            Status::Fail => self.summary.fail += 1,
            Status::Skipped => self.summary.skipped += 1,
        }
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} (v{})\n", self.suite, self.version);
        for (k, v) in &self.params {
            let _ = writeln!(out, "- `{k}` = `{v}`");
        }
        let _ = writeln!(out, "\n| check | status | detail |\n|---|---|---|");
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "**fail**",
                Status::Skipped => "skipped",
            };
            let detail = c
                .witness
                .as_deref()
                .or(c.reason.as_deref())
                .unwrap_or("")
                .replace('|', "\\|");
            let _ = writeln!(out, "| {} | {} | {} |", c.name, status, detail);
        }
        let _ = writeln!(
            out,
            "\n{} passed, {} failed, {} skipped",
            self.summary.pass, self.summary.fail, self.summary.skipped
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_and_json_shape() {
        let mut r = Report::new("demo", BTreeMap::from([("omega".into(), "1".into())]));
        r.push(Check::pass("a"));
        r.push(Check::fail("b", "x1"));
        r.push(Check::skipped("c", "not applicable"));
        assert_eq!(r.summary, Summary { pass: 1, fail: 1, skipped: 1 });
        assert!(!r.all_passed());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["checks"][1]["witness"], "x1");
        assert_eq!(v["checks"][0].get("witness"), None);
        assert_eq!(v["summary"]["fail"], 1);
        assert!(r.to_markdown().contains("| b | **fail** | x1 |"));
    }

    #[test]
    fn summarize_keeps_first_failure() {
        let c = summarize("all", &[Check::pass("a"), Check::fail("b", "w"), Check::fail("c", "v")]);
        assert_eq!(c.witness.as_deref(), Some("b: w"));
    }
}
