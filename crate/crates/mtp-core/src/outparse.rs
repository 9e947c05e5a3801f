//! Parsing model output text into typed values.
//!
//! Only the closed constructor-expression grammar of
//! [`render_value`](crate::value::render_value) is interpreted — literals,
//! lists, maps, and `ClassName(field=value, ...)` — so parsing a model's
//! output can never run anything. Leading and trailing prose (including code
//! fences) is skipped by extracting the first maximal well-formed expression
//! in the text; everything after it is ignored.

use indexmap::IndexMap;

use crate::frontend::ast::{Primitive, TypeExpr};
use crate::frontend::token::{Punct, Token, TokenKind};
use crate::frontend::tokenize;
use crate::value::{check_type, TypeDefs, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailKind {
    Syntax,
    UnknownClass,
    MissingField,
    ExtraField,
    TypeMismatch,
}

impl FailKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailKind::Syntax => "syntax",
            FailKind::UnknownClass => "unknown-class",
            FailKind::MissingField => "missing-field",
            FailKind::ExtraField => "extra-field",
            FailKind::TypeMismatch => "type-mismatch",
        }
    }
}

/// A conversion failure with a stable diagnostic, suitable both for test
/// assertions and for embedding into a correction prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseFailure {
    pub kind: FailKind,
    pub path: String,
    pub diagnostic: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseOutcome {
    Ok(Value),
    Fail(ParseFailure),
}

impl ParseOutcome {
    pub fn ok(self) -> Option<Value> {
        match self {
            ParseOutcome::Ok(v) => Some(v),
            ParseOutcome::Fail(_) => None,
        }
    }

    fn fail(kind: FailKind, path: impl Into<String>, diagnostic: impl Into<String>) -> ParseOutcome {
        ParseOutcome::Fail(ParseFailure { kind, path: path.into(), diagnostic: diagnostic.into() })
    }
}

/// Parses `text` into a value of type `expected`.
///
/// For object-init sites, `provided` holds the developer-supplied attribute
/// values; they are authoritative for the root object — values the model
/// returns for those fields are ignored and replaced. The returned value has
/// already passed [`check_type`], which is the type-safety enforcement
/// point: a malformed or mistyped output always comes back as `Fail` so the
/// caller can build a correction prompt.
pub fn parse_typed_output(
    text: &str,
    expected: &TypeExpr,
    defs: &dyn TypeDefs,
    provided: Option<&IndexMap<String, Value>>,
) -> ParseOutcome {
    let raw = match extract_first_expression(text) {
        Extraction::Found(raw) => raw,
        Extraction::Abort(failure) => return ParseOutcome::Fail(failure),
        Extraction::NotFound => {
            return ParseOutcome::fail(
                FailKind::Syntax,
                "$",
                "no well-formed value expression found in the output",
            );
        }
    };
    let value = match convert(&raw, expected, defs, "$", provided) {
        Ok(v) => v,
        Err(failure) => return ParseOutcome::Fail(failure),
    };
    let report = check_type(&value, expected, defs);
    match report.first() {
        None => ParseOutcome::Ok(value),
        Some(m) => ParseOutcome::fail(
            FailKind::TypeMismatch,
            m.path.clone(),
            format!("expected {} at {}, found {}", m.expected, m.path, m.found),
        ),
    }
}

// ── Expression extraction ──

enum Extraction {
    Found(Value),
    Abort(ParseFailure),
    NotFound,
}

/// Scans for the first position where a complete value expression parses,
/// reading it greedily (maximally) and ignoring any trailing text. A
/// constructor that almost parsed (positional arguments, duplicate field)
/// aborts with its own diagnostic instead of misreading its innards as the
/// answer.
fn extract_first_expression(text: &str) -> Extraction {
    let chars: Vec<char> = text.chars().collect();
    for (i, c) in chars.iter().enumerate() {
        let boundary = i == 0 || !(chars[i - 1].is_alphanumeric() || chars[i - 1] == '_');
        let candidate = match c {
            '"' | '[' | '{' => true,
            '-' => boundary && matches!(chars.get(i + 1), Some(d) if d.is_ascii_digit()),
            d if d.is_ascii_digit() => boundary,
            a if a.is_alphabetic() || *a == '_' => boundary,
            _ => false,
        };
        if !candidate {
            continue;
        }
        let slice: String = chars[i..].iter().collect();
        let tokens = tokenize_prefix(&slice);
        let mut cursor = Cursor { tokens: &tokens, pos: 0 };
        match cursor.parse_value() {
            Ok(value) => return Extraction::Found(value),
            Err(RawError::PositionalArgs(class)) => {
                return Extraction::Abort(ParseFailure {
                    kind: FailKind::Syntax,
                    path: "$".to_string(),
                    diagnostic: format!(
                        "constructor arguments of {class} must be named (field=value); positional arguments are not accepted"
                    ),
                });
            }
            Err(RawError::DuplicateField(class, field)) => {
                return Extraction::Abort(ParseFailure {
                    kind: FailKind::Syntax,
                    path: "$".to_string(),
                    diagnostic: format!("duplicate field `{field}` in {class} constructor"),
                });
            }
            Err(RawError::Malformed) => {}
        }
    }
    Extraction::NotFound
}

/// Lexes as much of `text` as possible, cutting the input at the first
/// illegal character so prose after a valid expression cannot spoil it.
fn tokenize_prefix(text: &str) -> Vec<Token> {
    let mut end = text.len();
    loop {
        match tokenize(&text[..end]) {
            Ok(tokens) => return tokens,
            Err(e) => {
                let offset = match e {
                    crate::error::FrontendError::Lex { line, column, .. } => {
                        line_col_to_byte(&text[..end], line, column)
                    }
                    _ => 0,
                };
                if offset == 0 || offset >= end {
                    return vec![Token { kind: TokenKind::Eof, lexeme: String::new(), line: 1, column: 1 }];
                }
                end = offset;
            }
        }
    }
}

fn line_col_to_byte(text: &str, line: u32, column: u32) -> usize {
    let mut cur_line = 1;
    let mut cur_col = 1;
    for (i, c) in text.char_indices() {
        if cur_line == line && cur_col == column {
            return i;
        }
        if c == '\n' {
            cur_line += 1;
            cur_col = 1;
        } else {
            cur_col += 1;
        }
    }
    text.len()
}

struct Cursor<'t> {
    tokens: &'t [Token],
    pos: usize,
}

/// Internal raw-parse error; positional constructor arguments get a
/// dedicated diagnostic because models produce them often.
enum RawError {
    Malformed,
    PositionalArgs(String),
    DuplicateField(String, String),
}

impl Cursor<'_> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].kind
    }

    fn bump(&mut self) -> TokenKind {
        let kind = self.peek().clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        kind
    }

    fn eat(&mut self, p: Punct) -> bool {
        if matches!(self.peek(), TokenKind::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: Punct) -> Result<(), RawError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(RawError::Malformed)
        }
    }

    fn parse_value(&mut self) -> Result<Value, RawError> {
        match self.peek().clone() {
            TokenKind::IntLit(v) => {
                self.bump();
                Ok(Value::Int(v))
            }
            TokenKind::FloatLit(v) => {
                self.bump();
                Ok(Value::Float(v))
            }
            TokenKind::StrLit(s) => {
                self.bump();
                Ok(Value::Str(s))
            }
            TokenKind::BoolLit(b) => {
                self.bump();
                Ok(Value::Bool(b))
            }
            TokenKind::Punct(Punct::Minus) => {
                self.bump();
                match self.bump() {
                    TokenKind::IntLit(v) => Ok(Value::Int(-v)),
                    TokenKind::FloatLit(v) => Ok(Value::Float(-v)),
                    _ => Err(RawError::Malformed),
                }
            }
            TokenKind::Punct(Punct::LBracket) => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(Punct::RBracket) {
                    loop {
                        items.push(self.parse_value()?);
                        if !self.eat(Punct::Comma) {
                            break;
                        }
                    }
                    self.expect(Punct::RBracket)?;
                }
                Ok(Value::List(items))
            }
            TokenKind::Punct(Punct::LBrace) => {
                self.bump();
                let mut pairs = Vec::new();
                if !self.eat(Punct::RBrace) {
                    loop {
                        let key = self.parse_value()?;
                        self.expect(Punct::Colon)?;
                        let value = self.parse_value()?;
                        pairs.push((key, value));
                        if !self.eat(Punct::Comma) {
                            break;
                        }
                    }
                    self.expect(Punct::RBrace)?;
                }
                Ok(Value::Map(pairs))
            }
            TokenKind::Ident(class) => {
                self.bump();
                self.expect(Punct::LParen)?;
                let mut fields: IndexMap<String, Value> = IndexMap::new();
                if !self.eat(Punct::RParen) {
                    loop {
                        let TokenKind::Ident(field) = self.bump() else {
                            return Err(RawError::PositionalArgs(class));
                        };
                        if !self.eat(Punct::Assign) {
                            return Err(RawError::PositionalArgs(class));
                        }
                        let value = self.parse_value()?;
                        if fields.insert(field.clone(), value).is_some() {
                            return Err(RawError::DuplicateField(class, field));
                        }
                        if !self.eat(Punct::Comma) {
                            break;
                        }
                    }
                    self.expect(Punct::RParen)?;
                }
                Ok(Value::Object { class, fields })
            }
            _ => Err(RawError::Malformed),
        }
    }
}

// ── Type-directed conversion ──

fn mismatch(path: &str, expected: impl std::fmt::Display, found: &Value) -> ParseFailure {
    ParseFailure {
        kind: FailKind::TypeMismatch,
        path: path.to_string(),
        diagnostic: format!("expected {expected} at {path}, found {}", found.summary()),
    }
}

fn convert(
    raw: &Value,
    expected: &TypeExpr,
    defs: &dyn TypeDefs,
    path: &str,
    provided: Option<&IndexMap<String, Value>>,
) -> Result<Value, ParseFailure> {
    match expected {
        TypeExpr::Primitive(p) => {
            let ok = matches!(
                (p, raw),
                (Primitive::Int, Value::Int(_))
                    | (Primitive::Float, Value::Float(_))
                    | (Primitive::Str, Value::Str(_))
                    | (Primitive::Bool, Value::Bool(_))
            );
            if ok {
                Ok(raw.clone())
            } else {
                Err(mismatch(path, p.as_str(), raw))
            }
        }
        TypeExpr::Named { name, .. } => {
            let Some(declared) = defs.class_fields(name) else {
                return Err(ParseFailure {
                    kind: FailKind::UnknownClass,
                    path: path.to_string(),
                    diagnostic: format!("class {name} has no definition in scope"),
                });
            };
            let Value::Object { class, fields: raw_fields } = raw else {
                return Err(mismatch(path, name, raw));
            };
            if class != name {
                return Err(if defs.class_fields(class).is_some() {
                    mismatch(path, name, raw)
                } else {
                    ParseFailure {
                        kind: FailKind::UnknownClass,
                        path: path.to_string(),
                        diagnostic: format!("unknown class {class} at {path}, expected {name}"),
                    }
                });
            }
            for key in raw_fields.keys() {
                if !declared.iter().any(|(n, _)| n == key) {
                    return Err(ParseFailure {
                        kind: FailKind::ExtraField,
                        path: format!("{path}.{key}"),
                        diagnostic: format!("unexpected field `{key}` in {name}"),
                    });
                }
            }
            let mut out: IndexMap<String, Value> = IndexMap::with_capacity(declared.len());
            for (field, field_ty) in declared {
                let field_path = format!("{path}.{field}");
                if let Some(given) = provided.and_then(|p| p.get(field)) {
                    // Developer-provided values win over model output.
                    out.insert(field.clone(), given.clone());
                    continue;
                }
                match raw_fields.get(field) {
                    Some(raw_field) => {
                        out.insert(field.clone(), convert(raw_field, field_ty, defs, &field_path, None)?);
                    }
                    None => {
                        return Err(ParseFailure {
                            kind: FailKind::MissingField,
                            path: field_path,
                            diagnostic: format!("missing field `{field}: {field_ty}` in {name}"),
                        });
                    }
                }
            }
            Ok(Value::Object { class: class.clone(), fields: out })
        }
        TypeExpr::ListOf(el) => {
            let Value::List(items) = raw else {
                return Err(mismatch(path, format!("list[{el}]"), raw));
            };
            let mut out = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                out.push(convert(item, el, defs, &format!("{path}[{i}]"), None)?);
            }
            Ok(Value::List(out))
        }
        TypeExpr::MapOf(k, v) => {
            let Value::Map(pairs) = raw else {
                return Err(mismatch(path, format!("map[{k},{v}]"), raw));
            };
            let mut out = Vec::with_capacity(pairs.len());
            for (i, (mk, mv)) in pairs.iter().enumerate() {
                let key = convert(mk, k, defs, &format!("{path}.key({i})"), None)?;
                let value = convert(mv, v, defs, &format!("{path}.value({i})"), None)?;
                out.push((key, value));
            }
            Ok(Value::Map(out))
        }
    }
}

/// Renders a failure the way correction prompts embed it.
pub fn failure_line(failure: &ParseFailure) -> String {
    format!("{} error at {}: {}", failure.kind.as_str(), failure.path, failure.diagnostic)
}
