//! Tree-walking interpreter and the engine driving model calls.
//!
//! A `by`-bodied function or method is tagged at definition time and hits
//! the model only when called; object-init `by` runs immediately while the
//! init expression evaluates. Each model call runs a bounded corrective
//! retry loop: synthesize prompt, complete, parse; on conversion failure a
//! shortened correction prompt is sent until an attempt converts or the
//! budget (1 + `max_retries` attempts) is spent.

mod interp;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::backend::{BackendError, ModelBackend, TokenLedger};
use crate::frontend::ast::{Literal, ModuleAst};
use crate::mtir::MtirMap;
use crate::prompt::PromptError;

/// Exit status contract: 0 success, 1 runtime/type errors (including the
/// terminal `by` failure), 2 frontend/registry errors, 3 backend transport.
pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_FRONTEND: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

#[derive(Debug, Error)]
pub enum RuntimeError {
    /// The retry budget ran out without a convertible output.
    #[error("type error at `{site_id}` after {attempts} attempts: {last_diagnostic}")]
    MtpType { site_id: String, attempts: u32, last_diagnostic: String },

    /// Inputs violated declared types before any model call.
    #[error("argument type error at `{site_id}`: {message}")]
    ArgType { site_id: String, message: String },

    #[error("runtime error: {message}")]
    Exec { message: String },

    #[error(transparent)]
    Prompt(#[from] PromptError),

    #[error(transparent)]
    Backend(#[from] BackendError),
}

impl RuntimeError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RuntimeError::Backend(_) => EXIT_BACKEND,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Execution configuration for one program run.
#[derive(Clone)]
pub struct RunConfig {
    /// Correction attempts allowed after the first (attempts = 1 + this).
    pub max_retries: u32,
    /// Backend bound to each model reference appearing in `by` clauses.
    pub backends: BTreeMap<String, Arc<dyn ModelBackend>>,
    /// Model name sent to the backend when set; falls back to the model
    /// reference itself.
    pub default_model: Option<String>,
    /// Hyperparameter defaults below by-clause values.
    pub default_hyperparams: BTreeMap<String, Literal>,
    /// Ledger sink; shared and internally synchronized.
    pub ledger: Arc<Mutex<TokenLedger>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_retries: 3,
            backends: BTreeMap::new(),
            default_model: None,
            default_hyperparams: BTreeMap::new(),
            ledger: Arc::new(Mutex::new(TokenLedger::default())),
        }
    }
}

impl RunConfig {
    /// Binds every model reference in `mtir` to one backend.
    pub fn with_backend_for_all(mut self, mtir: &MtirMap, backend: Arc<dyn ModelBackend>) -> Self {
        for entry in mtir.entries.values() {
            self.backends.insert(entry.model_ref.clone(), backend.clone());
        }
        self
    }
}

/// Outcome of a run: the accumulated standard output, a ledger snapshot
/// (valid even when the run failed part-way), and the result.
#[derive(Debug)]
pub struct RunReport {
    pub stdout: String,
    pub ledger: TokenLedger,
    pub result: Result<(), RuntimeError>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(()) => EXIT_OK,
            Err(e) => e.exit_code(),
        }
    }
}

/// Executes the top-level statements of the entry module (`modules[0]`).
pub fn run_program(modules: &[ModuleAst], mtir: &MtirMap, config: &RunConfig) -> RunReport {
    let mut machine = interp::Interp::new(modules, mtir, config);
    let result = machine.run_entry();
    let stdout = machine.into_stdout();
    let ledger = config.ledger.lock().unwrap().clone();
    RunReport { stdout, ledger, result }
}
