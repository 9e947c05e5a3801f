//! Record/replay: capture `(request, result)` pairs from any backend to a
//! JSONL file, then replay them with byte-exact prompt matching.
//!
//! Replay mismatches are the debugging artifact here, so matching compares
//! the full prompt text rather than a hash and reports the first divergence.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::Literal;

use super::{BackendError, CompletionRequest, CompletionResult, ModelBackend};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedRequest {
    pub prompt: String,
    pub model: String,
    pub hyperparams: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordEntry {
    pub request: RecordedRequest,
    pub result: CompletionResult,
}

fn literal_json(lit: &Literal) -> serde_json::Value {
    match lit {
        Literal::Int(v) => serde_json::json!(v),
        Literal::Float(v) => serde_json::json!(v),
        Literal::Str(s) => serde_json::json!(s),
        Literal::Bool(b) => serde_json::json!(b),
    }
}

fn recorded_request(request: &CompletionRequest) -> RecordedRequest {
    RecordedRequest {
        prompt: request.prompt_text(),
        model: request.model_name.clone(),
        hyperparams: request.hyperparams.iter().map(|(k, v)| (k.clone(), literal_json(v))).collect(),
    }
}

/// Wraps `inner`, appending one JSON record per completed call.
pub struct RecordingBackend {
    inner: Arc<dyn ModelBackend>,
    file: Mutex<File>,
    path: String,
}

pub fn recording_backend(inner: Arc<dyn ModelBackend>, path: &Path) -> Result<RecordingBackend, BackendError> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| BackendError::Io { path: path.display().to_string(), source })?;
    Ok(RecordingBackend { inner, file: Mutex::new(file), path: path.display().to_string() })
}

impl ModelBackend for RecordingBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        let result = self.inner.complete(request)?;
        let entry = RecordEntry { request: recorded_request(request), result: result.clone() };
        let line = serde_json::to_string(&entry).expect("record entries serialize");
        let mut file = self.file.lock().unwrap();
        writeln!(file, "{line}").map_err(|source| BackendError::Io { path: self.path.clone(), source })?;
        Ok(result)
    }
}

/// Replays a recording in request order; each incoming prompt must match the
/// recorded one byte for byte before the stored result is returned.
pub struct ReplayBackend {
    entries: Vec<RecordEntry>,
    cursor: Mutex<usize>,
}

pub fn replay_backend(path: &Path) -> Result<ReplayBackend, BackendError> {
    let file = File::open(path).map_err(|source| BackendError::Io { path: path.display().to_string(), source })?;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| BackendError::Io { path: path.display().to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: RecordEntry = serde_json::from_str(&line).map_err(|e| BackendError::RecordFormat {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(ReplayBackend { entries, cursor: Mutex::new(0) })
}

impl ReplayBackend {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// First point of divergence between two prompt texts, line by line.
fn diff_summary(expected: &str, got: &str) -> String {
    for (i, (e, g)) in expected.lines().zip(got.lines()).enumerate() {
        if e != g {
            return format!("first differing line {}: recorded `{e}`, got `{g}`", i + 1);
        }
    }
    let (el, gl) = (expected.lines().count(), got.lines().count());
    if el != gl {
        return format!("prompt length differs: recorded {el} lines, got {gl} lines");
    }
    "prompts differ in whitespace only".to_string()
}

impl ModelBackend for ReplayBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        let mut cursor = self.cursor.lock().unwrap();
        let index = *cursor;
        let Some(entry) = self.entries.get(index) else {
            return Err(BackendError::ReplayExhausted { recorded: self.entries.len() });
        };
        *cursor += 1;
        let incoming = request.prompt_text();
        if entry.request.prompt != incoming {
            return Err(BackendError::ReplayMismatch {
                index,
                diff: diff_summary(&entry.request.prompt, &incoming),
            });
        }
        Ok(entry.result.clone())
    }
}
