//! Compiler and runtime for the MTP language.
//!
//! MTP is a small statically-typed language in which a function body, a
//! method body, or the tail of an object initialization can be delegated to
//! a language model with a `by <model>` clause. The crate is organized as a
//! pipeline:
//!
//! * [`frontend`] — lexer, parser, and multi-module loader for `.mtp` files.
//! * [`registry`] — codebase-wide symbol definitions with use-def links.
//! * [`mtir`] — per-call-site IR: signature, model binding, and the closure
//!   of non-primitive type definitions reachable from the signature.
//! * [`value`] — the runtime value universe with structural type checking
//!   and the constructor-expression text format.
//! * [`prompt`] — deterministic prompt synthesis from an IR entry plus
//!   bound runtime values, including corrective follow-up prompts.
//! * [`outparse`] — parsing model output text back into typed values.
//! * [`backend`] — pluggable model backends (mock, record/replay, HTTP)
//!   and token accounting.
//! * [`runtime`] — the tree-walking interpreter and the bounded retry
//!   engine driving model calls.

pub mod backend;
pub mod error;
pub mod frontend;
pub mod mtir;
pub mod outparse;
pub mod prompt;
pub mod registry;
pub mod runtime;
pub mod value;
