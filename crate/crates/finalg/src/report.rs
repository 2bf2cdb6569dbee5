//! Machine-parseable command reports.
//!
//! Every CLI command produces a [`Report`]: a schema-versioned JSON
//! document listing the command, its inputs, per-operation results, and
//! any inconclusive flags. Reports are deterministic — repeated runs
//! with the same inputs and configuration serialize byte-identically
//! (timing is only included when explicitly requested).

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;

/// Report schema version; bump on any breaking field change.
pub const REPORT_SCHEMA: &str = "finalg/1";

/// Exit code conventions shared by all commands.
pub mod exit {
    /// Success / Ok / satisfiable / property holds.
    pub const OK: i32 = 0;
    /// NoSolution / unsatisfiable / property fails.
    pub const NO: i32 = 1;
    /// At least one inner result was inconclusive.
    pub const INCONCLUSIVE: i32 = 2;
    /// Input error (parse failure, missing file, bad flags).
    pub const INPUT_ERROR: i32 = 3;
}

/// The result document of one command invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    /// Input files and flags, keyed by name.
    pub inputs: BTreeMap<String, Value>,
    /// Per-operation results, keyed by operation name.
    pub results: BTreeMap<String, Value>,
    /// Names of operations whose result is inconclusive (budget or cap
    /// exhausted). Nonempty ⇒ exit code 2.
    pub inconclusive: Vec<String>,
    /// Wall-clock milliseconds; only populated behind the timing flag
    /// so that default reports stay byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema: REPORT_SCHEMA.to_string(),
            command: command.into(),
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            inconclusive: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        self.inputs
            .insert(key.into(), serde_json::to_value(value).expect("serializable input"));
        self
    }

    pub fn result(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        self.results
            .insert(key.into(), serde_json::to_value(value).expect("serializable result"));
        self
    }

    /// Flags an operation as inconclusive. Never collapses to a
    /// boolean: the flag always surfaces in the report and exit code.
    pub fn mark_inconclusive(&mut self, operation: impl Into<String>) -> &mut Self {
        let op = operation.into();
        if !self.inconclusive.contains(&op) {
            self.inconclusive.push(op);
        }
        self
    }

    pub fn is_inconclusive(&self) -> bool {
        !self.inconclusive.is_empty()
    }

    /// Canonical JSON rendering (keys sorted by the BTreeMap layout).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Human-readable rendering: one `key: value` line per result.
impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.command)?;
        for (key, value) in &self.results {
            match value {
                Value::String(s) if s.contains('\n') => {
                    writeln!(f, "  {key}:")?;
                    for line in s.lines() {
                        writeln!(f, "    {line}")?;
                    }
                }
                other => writeln!(f, "  {key}: {}", compact(other))?,
            }
        }
        if !self.inconclusive.is_empty() {
            writeln!(f, "  inconclusive: {}", self.inconclusive.join(", "))?;
        }
        if let Some(ms) = self.timing_ms {
            writeln!(f, "  timing_ms: {ms}")?;
        }
        Ok(())
    }
}

fn compact(value: &Value) -> String {
    match value {
        Value::String(s) if !s.contains('\n') => s.clone(),
        other => serde_json::to_string(other).expect("value serializes"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_are_deterministic() {
        let build = || {
            let mut r = Report::new("analyze");
            r.input("algebra", "min.alg");
            r.result("has_wnu_all", true);
            r.result("congruence_count", 2);
            r
        };
        assert_eq!(build().to_json(), build().to_json());
        assert!(!build().to_json().contains("timing"));

        let mut r = build();
        r.mark_inconclusive("is_p_affine");
        r.mark_inconclusive("is_p_affine");
        assert_eq!(r.inconclusive, vec!["is_p_affine"]);
        assert!(r.is_inconclusive());

        let text = r.to_string();
        assert!(text.contains("has_wnu_all: true"));
        assert!(text.contains("inconclusive: is_p_affine"));
    }
}
