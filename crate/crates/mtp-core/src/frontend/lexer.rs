//! Hand-rolled lexer for `.mtp` source text.
//!
//! `#` starts a comment running to end of line. String literals support the
//! escapes `\n`, `\"` and `\\` only; any other character (including raw tabs)
//! passes through unchanged, but an unescaped newline terminates the literal
//! with an error.

use super::token::{Keyword, Punct, Token, TokenKind};
use crate::error::FrontendError;

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer::new(source).run()
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line: 1, column: 1 }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            let start = self.pos;
            let Some(c) = self.peek() else {
                tokens.push(Token { kind: TokenKind::Eof, lexeme: String::new(), line, column });
                return Ok(tokens);
            };
            let kind = if c == '"' {
                self.lex_string()?
            } else if c.is_ascii_digit() {
                self.lex_number()?
            } else if c == '_' || c.is_alphabetic() {
                self.lex_word()
            } else {
                self.lex_punct()?
            };
            let lexeme: String = self.chars[start..self.pos].iter().collect();
            tokens.push(Token { kind, lexeme, line, column });
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> FrontendError {
        FrontendError::Lex { line: self.line, column: self.column, message: message.into() }
    }

    fn lex_string(&mut self) -> Result<TokenKind, FrontendError> {
        let (start_line, start_col) = (self.line, self.column);
        let unterminated = || FrontendError::Lex {
            line: start_line,
            column: start_col,
            message: "unterminated string literal".into(),
        };
        self.bump(); // opening quote
        let mut value = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => return Err(unterminated()),
                Some('"') => {
                    self.bump();
                    return Ok(TokenKind::StrLit(value));
                }
                Some('\\') => {
                    self.bump();
                    match self.peek() {
                        Some('n') => value.push('\n'),
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some(other) => {
                            return Err(self.err(format!("unsupported escape `\\{other}`")));
                        }
                        None => return Err(unterminated()),
                    }
                    self.bump();
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    fn lex_number(&mut self) -> Result<TokenKind, FrontendError> {
        let mut text = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            text.push(self.bump().unwrap());
        }
        let mut is_float = false;
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            is_float = true;
            text.push(self.bump().unwrap());
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                text.push(self.bump().unwrap());
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mut lookahead = 1;
            if matches!(self.peek_at(1), Some('+') | Some('-')) {
                lookahead = 2;
            }
            if matches!(self.peek_at(lookahead), Some(c) if c.is_ascii_digit()) {
                is_float = true;
                text.push(self.bump().unwrap());
                if matches!(self.peek(), Some('+') | Some('-')) {
                    text.push(self.bump().unwrap());
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    text.push(self.bump().unwrap());
                }
            }
        }
        if is_float {
            let v: f64 = text.parse().map_err(|_| self.err(format!("invalid float literal `{text}`")))?;
            Ok(TokenKind::FloatLit(v))
        } else {
            let v: i64 = text.parse().map_err(|_| self.err(format!("int literal `{text}` out of range")))?;
            Ok(TokenKind::IntLit(v))
        }
    }

    fn lex_word(&mut self) -> TokenKind {
        let mut word = String::new();
        while matches!(self.peek(), Some(c) if c == '_' || c.is_alphanumeric()) {
            word.push(self.bump().unwrap());
        }
        match word.as_str() {
            "true" => TokenKind::BoolLit(true),
            "false" => TokenKind::BoolLit(false),
            _ => match Keyword::lookup(&word) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident(word),
            },
        }
    }

    fn lex_punct(&mut self) -> Result<TokenKind, FrontendError> {
        let c = self.peek().unwrap();
        let two = |lexer: &mut Self, p: Punct| {
            lexer.bump();
            lexer.bump();
            Ok(TokenKind::Punct(p))
        };
        match (c, self.peek_at(1)) {
            ('-', Some('>')) => return two(self, Punct::Arrow),
            ('=', Some('=')) => return two(self, Punct::EqEq),
            ('!', Some('=')) => return two(self, Punct::NotEq),
            ('<', Some('=')) => return two(self, Punct::LtEq),
            ('>', Some('=')) => return two(self, Punct::GtEq),
            _ => {}
        }
        let p = match c {
            '(' => Punct::LParen,
            ')' => Punct::RParen,
            '{' => Punct::LBrace,
            '}' => Punct::RBrace,
            '[' => Punct::LBracket,
            ']' => Punct::RBracket,
            ',' => Punct::Comma,
            ':' => Punct::Colon,
            '.' => Punct::Dot,
            '=' => Punct::Assign,
            '+' => Punct::Plus,
            '-' => Punct::Minus,
            '*' => Punct::Star,
            '/' => Punct::Slash,
            '<' => Punct::Lt,
            '>' => Punct::Gt,
            other => return Err(self.err(format!("illegal character `{other}`"))),
        };
        self.bump();
        Ok(TokenKind::Punct(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::token::TokenCategory;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn lexes_by_function_signature() {
        let toks = kinds("def f() -> int by llm");
        assert_eq!(
            toks,
            vec![
                TokenKind::Keyword(Keyword::Def),
                TokenKind::Ident("f".into()),
                TokenKind::Punct(Punct::LParen),
                TokenKind::Punct(Punct::RParen),
                TokenKind::Punct(Punct::Arrow),
                TokenKind::Ident("int".into()),
                TokenKind::Keyword(Keyword::By),
                TokenKind::Ident("llm".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn lexes_minimal_assignment() {
        let toks = kinds("x=1");
        assert_eq!(
            toks,
            vec![
                TokenKind::Ident("x".into()),
                TokenKind::Punct(Punct::Assign),
                TokenKind::IntLit(1),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn unterminated_string_errors_at_line_one() {
        let err = tokenize("\"").unwrap_err();
        match err {
            FrontendError::Lex { line, .. } => assert_eq!(line, 1),
            other => panic!("expected lex error, got {other:?}"),
        }
    }

    #[test]
    fn string_escapes_decode() {
        let toks = tokenize(r#""a\n\"b\\c""#).unwrap();
        assert_eq!(toks[0].kind, TokenKind::StrLit("a\n\"b\\c".into()));
        assert_eq!(toks[0].lexeme, r#""a\n\"b\\c""#);
    }

    #[test]
    fn unknown_escape_rejected() {
        assert!(matches!(tokenize(r#""\t""#), Err(FrontendError::Lex { .. })));
    }

    #[test]
    fn numbers_and_floats() {
        assert_eq!(kinds("42")[0], TokenKind::IntLit(42));
        assert_eq!(kinds("4.5")[0], TokenKind::FloatLit(4.5));
        assert_eq!(kinds("1e300")[0], TokenKind::FloatLit(1e300));
        assert_eq!(kinds("2.5e-3")[0], TokenKind::FloatLit(2.5e-3));
        // a trailing dot is punctuation, not part of the number
        assert_eq!(
            kinds("145.")[..2],
            [TokenKind::IntLit(145), TokenKind::Punct(Punct::Dot)]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("# heading\nlet x = 1").unwrap();
        assert_eq!(toks[0].lexeme, "let");
        assert_eq!((toks[0].line, toks[0].column), (2, 1));
        assert_eq!((toks[1].line, toks[1].column), (2, 5));
    }

    #[test]
    fn illegal_character_errors() {
        let err = tokenize("let x = 1;").unwrap_err();
        match err {
            FrontendError::Lex { line, column, .. } => assert_eq!((line, column), (1, 10)),
            other => panic!("expected lex error, got {other:?}"),
        }
    }

    #[test]
    fn categories_cover_all_kinds() {
        let toks = tokenize("def f \"s\" 1 (").unwrap();
        let cats: Vec<_> = toks.iter().map(|t| t.category()).collect();
        assert_eq!(
            cats,
            vec![
                TokenCategory::Keyword,
                TokenCategory::Identifier,
                TokenCategory::Literal,
                TokenCategory::Literal,
                TokenCategory::Punctuation,
                TokenCategory::EndOfInput,
            ]
        );
    }

    #[test]
    fn lexemes_concatenate_to_significant_source() {
        let src = "class Person { name: str }  # trailing\nlet p = Person(\"A\")";
        let toks = tokenize(src).unwrap();
        let joined: String = toks.iter().map(|t| t.lexeme.as_str()).collect();
        let significant: String = src
            .lines()
            .map(|l| l.split('#').next().unwrap())
            .collect::<String>()
            .split_whitespace()
            .collect();
        let joined_ws: String = joined.split_whitespace().collect();
        assert_eq!(joined_ws, significant);
    }
}
