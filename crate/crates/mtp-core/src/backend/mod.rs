//! Pluggable model backends behind one interface, plus token accounting.

mod http;
mod mock;
mod replay;

pub use http::{http_backend, HttpBackend, HttpConfig};
pub use mock::{mock_backend, mock_backend_with_rules, MockBackend};
pub use replay::{recording_backend, replay_backend, RecordEntry, RecordingBackend, ReplayBackend};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::ast::Literal;
use crate::prompt::Prompt;

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: Prompt,
    pub model_name: String,
    /// Hyperparameters merged by the caller (by-clause over defaults); passed
    /// through to the provider untouched.
    pub hyperparams: BTreeMap<String, Literal>,
}

impl CompletionRequest {
    /// Canonical single-text form of the prompt, used for recording and
    /// byte-exact replay matching.
    pub fn prompt_text(&self) -> String {
        format!("{}\n\n{}", self.prompt.system, self.prompt.user)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Deterministic token estimator used by the mock backend: whitespace-
/// separated tokens. Keeps accounting reproducible without a tokenizer.
pub fn estimate_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("mock script exhausted after {calls} calls (no response left and no rule matched)")]
    ScriptExhausted { calls: usize },

    #[error("replay mismatch at record {index}: {diff}")]
    ReplayMismatch { index: usize, diff: String },

    #[error("replay file exhausted: program made more than {recorded} calls")]
    ReplayExhausted { recorded: usize },

    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { message: String, attempts: u32 },

    #[error("provider returned status {status}: {body_excerpt}")]
    Provider { status: u16, body_excerpt: String },

    #[error("backend configuration: {message}")]
    Config { message: String },

    #[error("backend io on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("recording file `{path}` line {line}: {message}")]
    RecordFormat { path: String, line: usize, message: String },
}

/// A model backend. Implementations must tolerate concurrent `complete`
/// calls; per-call mutable state (scripts, cursors, files) is synchronized
/// internally.
pub trait ModelBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteUsage {
    pub calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl SiteUsage {
    fn add(&mut self, result: &CompletionResult) {
        self.calls += 1;
        self.prompt_tokens += result.prompt_tokens;
        self.completion_tokens += result.completion_tokens;
    }
}

/// Per-site and total token counts across every backend call, including
/// failed-parse attempts (retries are the cost being accounted for).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenLedger {
    pub sites: BTreeMap<String, SiteUsage>,
    pub total: SiteUsage,
}

impl TokenLedger {
    pub fn record(&mut self, site_id: &str, result: &CompletionResult) {
        self.sites.entry(site_id.to_string()).or_default().add(result);
        self.total.add(result);
    }

    /// Canonical JSON mirror (sorted keys, pretty, trailing newline).
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let value = serde_json::to_value(self).expect("ledger serializes");
        let mut bytes = serde_json::to_vec_pretty(&value).expect("ledger serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Fixed-column plain-text summary for human inspection.
    pub fn render_table(&self) -> String {
        let width = self
            .sites
            .keys()
            .map(|s| s.len())
            .chain(["site".len(), "total".len()])
            .max()
            .unwrap_or(4);
        let mut out = format!("{:<width$}  {:>8}  {:>8}  {:>10}\n", "site", "calls", "prompt", "completion");
        for (site, usage) in &self.sites {
            out.push_str(&format!(
                "{site:<width$}  {:>8}  {:>8}  {:>10}\n",
                usage.calls, usage.prompt_tokens, usage.completion_tokens
            ));
        }
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>8}  {:>10}\n",
            "total", self.total.calls, self.total.prompt_tokens, self.total.completion_tokens
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(p: u64, c: u64) -> CompletionResult {
        CompletionResult { text: String::new(), prompt_tokens: p, completion_tokens: c }
    }

    #[test]
    fn ledger_totals_are_sums_over_sites() {
        let mut ledger = TokenLedger::default();
        ledger.record("a:1:1", &result(10, 2));
        ledger.record("a:1:1", &result(5, 1));
        ledger.record("b:2:2", &result(7, 3));
        assert_eq!(ledger.sites["a:1:1"].calls, 2);
        assert_eq!(ledger.total.calls, 3);
        assert_eq!(ledger.total.prompt_tokens, 22);
        assert_eq!(ledger.total.completion_tokens, 6);
        let summed: u64 = ledger.sites.values().map(|s| s.prompt_tokens).sum();
        assert_eq!(ledger.total.prompt_tokens, summed);
    }

    #[test]
    fn ledger_json_is_byte_stable() {
        let mut ledger = TokenLedger::default();
        ledger.record("z:1:1", &result(1, 1));
        ledger.record("a:1:1", &result(2, 2));
        assert_eq!(ledger.to_json_bytes(), ledger.clone().to_json_bytes());
        let text = String::from_utf8(ledger.to_json_bytes()).unwrap();
        let a = text.find("a:1:1").unwrap();
        let z = text.find("z:1:1").unwrap();
        assert!(a < z, "sites are sorted");
    }

    #[test]
    fn whitespace_estimator_counts_tokens() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("one"), 1);
        assert_eq!(estimate_tokens("  a b\n\tc  "), 3);
    }

    #[test]
    fn table_has_fixed_columns() {
        let mut ledger = TokenLedger::default();
        ledger.record("calc:1:40", &result(12, 3));
        let table = ledger.render_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("site"));
        assert!(lines[2].starts_with("total"));
    }
}
