use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Query {
    pub command: String,
    pub files: Vec<String>,
    pub options: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    /// `None` for computations without a yes/no answer.
    pub holds: Option<bool>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub version: &'static str,
    pub query: Query,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brackets: Option<Value>,
    pub result: Value,
    pub notes: Vec<String>,
    pub seed: u64,
    pub timing_ms: f64,
    pub exit_code: i32,
}

impl Report {
    pub fn new(query: Query, seed: u64) -> Self {
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            query,
            verdict: Verdict {
                holds: None,
                summary: String::new(),
            },
            witnesses: Vec::new(),
            brackets: None,
            result: Value::Null,
            notes: Vec::new(),
            seed,
            timing_ms: 0.0,
            exit_code: 0,
        }
    }

    /// Sets a yes/no verdict; the exit code follows it.
    pub fn decide(&mut self, holds: bool, summary: impl Into<String>) {
        self.verdict = Verdict {
            holds: Some(holds),
            summary: summary.into(),
        };
        self.exit_code = if holds { 0 } else { 1 };
    }

    /// Sets the summary of a computation that always succeeds.
    pub fn computed(&mut self, summary: impl Into<String>) {
        self.verdict = Verdict {
            holds: None,
            summary: summary.into(),
        };
        self.exit_code = 0;
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let head = match self.verdict.holds {
            Some(true) => "HOLDS",
            Some(false) => "FAILS",
            None => "RESULT",
        };
        out.push_str(&format!("{head}: {}\n", self.verdict.summary));
        if let Some(b) = &self.brackets {
            out.push_str(&format!("brackets: {b}\n"));
        }
        for w in &self.witnesses {
            out.push_str(&format!("witness: {w}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// A report for a query that could not be answered.
pub fn error_report(query: Query, seed: u64, message: &str) -> Value {
    serde_json::json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "query": query,
        "error": message,
        "seed": seed,
        "exit_code": 2,
    })
}
