//! Frontend diagnostics shared by the lexer, parser, and module loader.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("lex error at {line}:{column}: {message}")]
    Lex { line: u32, column: u32, message: String },

    #[error("parse error at {line}:{column}: expected {expected}, found {found}")]
    Parse { line: u32, column: u32, expected: String, found: String },

    #[error("cannot resolve import `{module}`{}", importer.as_deref().map(|i| format!(" (imported from `{i}`)")).unwrap_or_default())]
    Import { module: String, importer: Option<String> },

    #[error("cyclic import of `{module}` (imported from `{importer}`)")]
    ImportCycle { module: String, importer: String },

    #[error("in module `{module}`: {source}")]
    InModule {
        module: String,
        #[source]
        source: Box<FrontendError>,
    },
}

impl FrontendError {
    /// Wraps a lex/parse error with the module it occurred in.
    pub fn in_module(self, module: &str) -> FrontendError {
        match self {
            e @ (FrontendError::Import { .. } | FrontendError::ImportCycle { .. } | FrontendError::InModule { .. }) => e,
            other => FrontendError::InModule { module: module.to_string(), source: Box::new(other) },
        }
    }
}
