//! Lexing, parsing, and module loading for `.mtp` source programs.

pub mod ast;
mod lexer;
mod loader;
pub mod parser;
mod pretty;
pub mod token;

pub use ast::{parse_type_str, ModuleAst};
pub use lexer::tokenize;
pub use loader::{parse_program, parse_program_with, FsResolver, MapResolver, ModuleResolver};
pub use parser::parse_module;
pub use pretty::{pretty_module, print_expr, print_literal, quote_str};
pub use token::{Span, Token, TokenCategory, TokenKind};
