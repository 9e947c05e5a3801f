//! Token stream produced by the lexer.

use std::fmt;

/// Source position, 1-based line and column.
///
/// Spans compare equal to each other unconditionally so that ASTs can be
/// compared structurally (pretty-print round trips re-parse at different
/// positions).
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Reserved words. Type names (`int`, `list`, `map`, ...) are intentionally
/// *not* keywords: they are recognized contextually in type position, so
/// fields and variables may be named `map`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Import,
    Class,
    Def,
    By,
    Let,
    Print,
    Return,
    If,
    Else,
}

impl Keyword {
    pub fn as_str(&self) -> &'static str {
        match self {
            Keyword::Import => "import",
            Keyword::Class => "class",
            Keyword::Def => "def",
            Keyword::By => "by",
            Keyword::Let => "let",
            Keyword::Print => "print",
            Keyword::Return => "return",
            Keyword::If => "if",
            Keyword::Else => "else",
        }
    }

    pub fn lookup(s: &str) -> Option<Keyword> {
        Some(match s {
            "import" => Keyword::Import,
            "class" => Keyword::Class,
            "def" => Keyword::Def,
            "by" => Keyword::By,
            "let" => Keyword::Let,
            "print" => Keyword::Print,
            "return" => Keyword::Return,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Punct {
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Assign,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
}

impl Punct {
    pub fn as_str(&self) -> &'static str {
        match self {
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::LBrace => "{",
            Punct::RBrace => "}",
            Punct::LBracket => "[",
            Punct::RBracket => "]",
            Punct::Comma => ",",
            Punct::Colon => ":",
            Punct::Dot => ".",
            Punct::Assign => "=",
            Punct::Arrow => "->",
            Punct::Plus => "+",
            Punct::Minus => "-",
            Punct::Star => "*",
            Punct::Slash => "/",
            Punct::EqEq => "==",
            Punct::NotEq => "!=",
            Punct::Lt => "<",
            Punct::LtEq => "<=",
            Punct::Gt => ">",
            Punct::GtEq => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    IntLit(i64),
    FloatLit(f64),
    StrLit(String),
    BoolLit(bool),
    Punct(Punct),
    Eof,
}

/// Coarse classification of a token: keyword, identifier, literal, or
/// punctuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenCategory {
    Keyword,
    Identifier,
    Literal,
    Punctuation,
    EndOfInput,
}

/// One lexed token. `lexeme` is the exact source slice, so the lexemes of a
/// token stream concatenate back to the token-significant source.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn category(&self) -> TokenCategory {
        match self.kind {
            TokenKind::Keyword(_) => TokenCategory::Keyword,
            TokenKind::Ident(_) => TokenCategory::Identifier,
            TokenKind::IntLit(_) | TokenKind::FloatLit(_) | TokenKind::StrLit(_) | TokenKind::BoolLit(_) => {
                TokenCategory::Literal
            }
            TokenKind::Punct(_) => TokenCategory::Punctuation,
            TokenKind::Eof => TokenCategory::EndOfInput,
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.line, self.column)
    }

    /// Short human-readable description for diagnostics.
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Keyword(k) => format!("`{}`", k.as_str()),
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::IntLit(_) => format!("int literal `{}`", self.lexeme),
            TokenKind::FloatLit(_) => format!("float literal `{}`", self.lexeme),
            TokenKind::StrLit(_) => "string literal".to_string(),
            TokenKind::BoolLit(b) => format!("`{b}`"),
            TokenKind::Punct(p) => format!("`{}`", p.as_str()),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}
