//! Recursive descent parser producing [`ModuleAst`]s.

use std::collections::HashSet;

use super::ast::*;
use super::token::{Keyword, Punct, Token, TokenKind};
use crate::error::FrontendError;

pub fn parse_module(tokens: Vec<Token>, name: &str) -> Result<ModuleAst, FrontendError> {
    Parser::new(tokens).parse_module(name)
}

/// Builtin type names; not valid as class or function names.
const RESERVED_TYPE_NAMES: [&str; 6] = ["int", "float", "str", "bool", "list", "map"];

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        assert!(!tokens.is_empty(), "token stream must end with Eof");
        Parser { tokens, pos: 0 }
    }

    fn current(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.current().kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.current().clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: impl Into<String>) -> FrontendError {
        let tok = self.current();
        FrontendError::Parse {
            line: tok.line,
            column: tok.column,
            expected: expected.into(),
            found: tok.describe(),
        }
    }

    fn error_at(&self, span: Span, expected: impl Into<String>, found: impl Into<String>) -> FrontendError {
        FrontendError::Parse {
            line: span.line,
            column: span.column,
            expected: expected.into(),
            found: found.into(),
        }
    }

    fn at_punct(&self, p: Punct) -> bool {
        matches!(self.peek_kind(), TokenKind::Punct(q) if *q == p)
    }

    fn at_keyword(&self, k: Keyword) -> bool {
        matches!(self.peek_kind(), TokenKind::Keyword(q) if *q == k)
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.at_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: Punct) -> Result<Token, FrontendError> {
        if self.at_punct(p) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("`{}`", p.as_str())))
        }
    }

    fn expect_keyword(&mut self, k: Keyword) -> Result<Token, FrontendError> {
        if self.at_keyword(k) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("`{}`", k.as_str())))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), FrontendError> {
        match self.peek_kind() {
            TokenKind::Ident(_) => {
                let tok = self.advance();
                let TokenKind::Ident(name) = tok.kind else { unreachable!() };
                Ok((name, Span::new(tok.line, tok.column)))
            }
            _ => Err(self.error(what)),
        }
    }

    pub(crate) fn expect_eof(&mut self) -> Result<(), FrontendError> {
        if matches!(self.peek_kind(), TokenKind::Eof) {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    // ── Top level ──

    fn parse_module(&mut self, name: &str) -> Result<ModuleAst, FrontendError> {
        let mut imports: Vec<String> = Vec::new();
        let mut decls: Vec<Decl> = Vec::new();
        let mut stmts: Vec<Stmt> = Vec::new();
        let mut decl_names: HashSet<String> = HashSet::new();

        while !matches!(self.peek_kind(), TokenKind::Eof) {
            if self.at_keyword(Keyword::Import) {
                self.advance();
                let (module, span) = self.expect_ident("module name")?;
                if imports.contains(&module) {
                    return Err(self.error_at(
                        span,
                        "a module not yet imported",
                        format!("duplicate import of `{module}`"),
                    ));
                }
                imports.push(module);
            } else if self.at_keyword(Keyword::Class) {
                let class = self.parse_class()?;
                if !decl_names.insert(class.name.clone()) {
                    return Err(self.error_at(
                        class.span,
                        "a unique declaration name",
                        format!("`{}` is already declared in this module", class.name),
                    ));
                }
                decls.push(Decl::Class(class));
            } else if self.at_keyword(Keyword::Def) {
                let func = self.parse_func()?;
                if !decl_names.insert(func.name.clone()) {
                    return Err(self.error_at(
                        func.span,
                        "a unique declaration name",
                        format!("`{}` is already declared in this module", func.name),
                    ));
                }
                decls.push(Decl::Func(func));
            } else {
                stmts.push(self.parse_stmt()?);
            }
        }

        Ok(ModuleAst { name: name.to_string(), imports, decls, stmts })
    }

    fn parse_class(&mut self) -> Result<ClassDecl, FrontendError> {
        let class_tok = self.expect_keyword(Keyword::Class)?;
        let span = class_tok.span();
        let (name, name_span) = self.expect_ident("class name")?;
        if RESERVED_TYPE_NAMES.contains(&name.as_str()) {
            return Err(self.error_at(name_span, "class name", format!("reserved type name `{name}`")));
        }
        self.expect_punct(Punct::LBrace)?;
        let mut fields: Vec<FieldDef> = Vec::new();
        let mut methods: Vec<FuncDecl> = Vec::new();
        let mut member_names: HashSet<String> = HashSet::new();
        while !self.at_punct(Punct::RBrace) {
            if self.at_keyword(Keyword::Def) {
                let method = self.parse_func()?;
                if !member_names.insert(method.name.clone()) {
                    return Err(self.error_at(
                        method.span,
                        "a unique member name",
                        format!("`{}` is already declared in class `{name}`", method.name),
                    ));
                }
                methods.push(method);
            } else {
                let (field_name, field_span) = self.expect_ident("field name, method, or `}`")?;
                self.expect_punct(Punct::Colon)?;
                let ty = self.parse_type()?;
                if !member_names.insert(field_name.clone()) {
                    return Err(self.error_at(
                        field_span,
                        "a unique member name",
                        format!("`{field_name}` is already declared in class `{name}`"),
                    ));
                }
                fields.push(FieldDef { name: field_name, ty, span: field_span });
            }
        }
        self.expect_punct(Punct::RBrace)?;
        Ok(ClassDecl { name, fields, methods, span })
    }

    fn parse_func(&mut self) -> Result<FuncDecl, FrontendError> {
        let def_tok = self.expect_keyword(Keyword::Def)?;
        let span = def_tok.span();
        let (name, name_span) = self.expect_ident("function name")?;
        if RESERVED_TYPE_NAMES.contains(&name.as_str()) {
            return Err(self.error_at(name_span, "function name", format!("reserved type name `{name}`")));
        }
        self.expect_punct(Punct::LParen)?;
        let mut params: Vec<Param> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        if !self.at_punct(Punct::RParen) {
            loop {
                let (pname, pspan) = self.expect_ident("parameter name")?;
                self.expect_punct(Punct::Colon)?;
                let ty = self.parse_type()?;
                if !seen.insert(pname.clone()) {
                    return Err(self.error_at(
                        pspan,
                        "a unique parameter name",
                        format!("duplicate parameter `{pname}`"),
                    ));
                }
                params.push(Param { name: pname, ty, span: pspan });
                if !self.eat_punct(Punct::Comma) {
                    break;
                }
            }
        }
        self.expect_punct(Punct::RParen)?;
        self.expect_punct(Punct::Arrow)?;
        let return_type = self.parse_type()?;
        let body = if self.at_keyword(Keyword::By) {
            FuncBody::By(self.parse_by_clause()?)
        } else if self.at_punct(Punct::LBrace) {
            FuncBody::Block(self.parse_block()?)
        } else {
            return Err(self.error("`by` clause or `{` body"));
        };
        Ok(FuncDecl { name, params, return_type, body, span })
    }

    fn parse_by_clause(&mut self) -> Result<ByClause, FrontendError> {
        let by_tok = self.expect_keyword(Keyword::By)?;
        let span = by_tok.span();
        let (model_ref, _) = self.expect_ident("model reference")?;
        let mut hyperparams: Vec<(String, Literal)> = Vec::new();
        if self.eat_punct(Punct::LParen) {
            let mut seen: HashSet<String> = HashSet::new();
            if !self.at_punct(Punct::RParen) {
                loop {
                    let (hname, hspan) = self.expect_ident("hyperparameter name")?;
                    self.expect_punct(Punct::Assign)?;
                    let value = self.parse_literal()?;
                    if !seen.insert(hname.clone()) {
                        return Err(self.error_at(
                            hspan,
                            "a unique hyperparameter name",
                            format!("duplicate hyperparameter `{hname}`"),
                        ));
                    }
                    hyperparams.push((hname, value));
                    if !self.eat_punct(Punct::Comma) {
                        break;
                    }
                }
            }
            self.expect_punct(Punct::RParen)?;
        }
        Ok(ByClause { model_ref, hyperparams, span })
    }

    fn parse_literal(&mut self) -> Result<Literal, FrontendError> {
        let negate = self.at_punct(Punct::Minus)
            && matches!(self.peek_at(1), TokenKind::IntLit(_) | TokenKind::FloatLit(_));
        if negate {
            self.advance();
        }
        let lit = match self.peek_kind().clone() {
            TokenKind::IntLit(v) => Literal::Int(if negate { -v } else { v }),
            TokenKind::FloatLit(v) => Literal::Float(if negate { -v } else { v }),
            TokenKind::StrLit(s) => Literal::Str(s),
            TokenKind::BoolLit(b) => Literal::Bool(b),
            _ => return Err(self.error("literal")),
        };
        self.advance();
        Ok(lit)
    }

    /// Type names are contextual: `int`/`float`/`str`/`bool` are primitives,
    /// `list[...]`/`map[...]` are the collection constructors, anything else
    /// names a class.
    pub(crate) fn parse_type(&mut self) -> Result<TypeExpr, FrontendError> {
        let TokenKind::Ident(name) = self.peek_kind().clone() else {
            return Err(self.error("type"));
        };
        match name.as_str() {
            "int" => {
                self.advance();
                Ok(TypeExpr::Primitive(Primitive::Int))
            }
            "float" => {
                self.advance();
                Ok(TypeExpr::Primitive(Primitive::Float))
            }
            "str" => {
                self.advance();
                Ok(TypeExpr::Primitive(Primitive::Str))
            }
            "bool" => {
                self.advance();
                Ok(TypeExpr::Primitive(Primitive::Bool))
            }
            "list" => {
                self.advance();
                self.expect_punct(Punct::LBracket)?;
                let el = self.parse_type()?;
                self.expect_punct(Punct::RBracket)?;
                Ok(TypeExpr::list_of(el))
            }
            "map" => {
                self.advance();
                self.expect_punct(Punct::LBracket)?;
                let key = self.parse_type()?;
                self.expect_punct(Punct::Comma)?;
                let value = self.parse_type()?;
                self.expect_punct(Punct::RBracket)?;
                Ok(TypeExpr::map_of(key, value))
            }
            _ => {
                let (name, span) = self.expect_ident("type")?;
                Ok(TypeExpr::Named { name, span })
            }
        }
    }

    // ── Statements ──

    fn parse_block(&mut self) -> Result<Block, FrontendError> {
        self.expect_punct(Punct::LBrace)?;
        let mut stmts = Vec::new();
        while !self.at_punct(Punct::RBrace) {
            if matches!(self.peek_kind(), TokenKind::Eof) {
                return Err(self.error("`}`"));
            }
            stmts.push(self.parse_stmt()?);
        }
        self.expect_punct(Punct::RBrace)?;
        Ok(Block { stmts })
    }

    fn parse_stmt(&mut self) -> Result<Stmt, FrontendError> {
        if self.at_keyword(Keyword::Let) {
            self.advance();
            let (name, span) = self.expect_ident("variable name")?;
            self.expect_punct(Punct::Assign)?;
            let value = self.parse_expr()?;
            Ok(Stmt::Let { name, value, span })
        } else if self.at_keyword(Keyword::Print) {
            self.advance();
            self.expect_punct(Punct::LParen)?;
            let expr = self.parse_expr()?;
            self.expect_punct(Punct::RParen)?;
            Ok(Stmt::Print(expr))
        } else if self.at_keyword(Keyword::Return) {
            let tok = self.advance();
            let value = self.parse_expr()?;
            Ok(Stmt::Return { value, span: tok.span() })
        } else if self.at_keyword(Keyword::If) {
            self.advance();
            let cond = self.parse_expr()?;
            let then_block = self.parse_block()?;
            let else_block = if self.at_keyword(Keyword::Else) {
                self.advance();
                Some(self.parse_block()?)
            } else {
                None
            };
            Ok(Stmt::If { cond, then_block, else_block })
        } else {
            Ok(Stmt::Expr(self.parse_expr()?))
        }
    }

    // ── Expressions ──

    fn parse_expr(&mut self) -> Result<Expr, FrontendError> {
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.parse_additive()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Punct(Punct::EqEq) => BinOp::Eq,
                TokenKind::Punct(Punct::NotEq) => BinOp::Ne,
                TokenKind::Punct(Punct::Lt) => BinOp::Lt,
                TokenKind::Punct(Punct::LtEq) => BinOp::Le,
                TokenKind::Punct(Punct::Gt) => BinOp::Gt,
                TokenKind::Punct(Punct::GtEq) => BinOp::Ge,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_additive()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn parse_additive(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Punct(Punct::Plus) => BinOp::Add,
                TokenKind::Punct(Punct::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_multiplicative()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn parse_multiplicative(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Punct(Punct::Star) => BinOp::Mul,
                TokenKind::Punct(Punct::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, FrontendError> {
        if self.at_punct(Punct::Minus) {
            self.advance();
            let operand = self.parse_unary()?;
            Ok(Expr::Neg(Box::new(operand)))
        } else {
            self.parse_postfix()
        }
    }

    fn parse_postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut expr = self.parse_primary()?;
        while self.at_punct(Punct::Dot) {
            self.advance();
            let (name, span) = self.expect_ident("attribute or method name")?;
            if self.eat_punct(Punct::LParen) {
                let mut args = Vec::new();
                if !self.at_punct(Punct::RParen) {
                    loop {
                        if matches!(self.peek_kind(), TokenKind::Ident(_))
                            && matches!(self.peek_at(1), TokenKind::Punct(Punct::Assign))
                        {
                            return Err(self.error("expression (named arguments are only allowed in object initialization)"));
                        }
                        args.push(self.parse_expr()?);
                        if !self.eat_punct(Punct::Comma) {
                            break;
                        }
                    }
                }
                self.expect_punct(Punct::RParen)?;
                expr = Expr::MethodCall { recv: Box::new(expr), method: name, args, span };
            } else {
                expr = Expr::Attr { recv: Box::new(expr), name, span };
            }
        }
        Ok(expr)
    }

    fn parse_primary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek_kind().clone() {
            TokenKind::IntLit(_) | TokenKind::FloatLit(_) | TokenKind::StrLit(_) | TokenKind::BoolLit(_) => {
                Ok(Expr::Literal(self.parse_literal()?))
            }
            TokenKind::Ident(_) => {
                let (name, span) = self.expect_ident("expression")?;
                if self.eat_punct(Punct::LParen) {
                    let args = self.parse_call_args(&name)?;
                    self.expect_punct(Punct::RParen)?;
                    let by = if self.at_keyword(Keyword::By) {
                        Some(self.parse_by_clause()?)
                    } else {
                        None
                    };
                    Ok(Expr::Call(CallExpr { callee: name, args, by, span }))
                } else {
                    Ok(Expr::Var { name, span })
                }
            }
            TokenKind::Punct(Punct::LParen) => {
                self.advance();
                let expr = self.parse_expr()?;
                self.expect_punct(Punct::RParen)?;
                Ok(expr)
            }
            TokenKind::Punct(Punct::LBracket) => {
                self.advance();
                let mut elements = Vec::new();
                if !self.at_punct(Punct::RBracket) {
                    loop {
                        elements.push(self.parse_expr()?);
                        if !self.eat_punct(Punct::Comma) {
                            break;
                        }
                    }
                }
                self.expect_punct(Punct::RBracket)?;
                Ok(Expr::ListLit(elements))
            }
            TokenKind::Punct(Punct::LBrace) => {
                self.advance();
                let mut pairs = Vec::new();
                if !self.at_punct(Punct::RBrace) {
                    loop {
                        let key = self.parse_expr()?;
                        self.expect_punct(Punct::Colon)?;
                        let value = self.parse_expr()?;
                        pairs.push((key, value));
                        if !self.eat_punct(Punct::Comma) {
                            break;
                        }
                    }
                }
                self.expect_punct(Punct::RBrace)?;
                Ok(Expr::MapLit(pairs))
            }
            _ => Err(self.error("expression")),
        }
    }

    /// Arguments must be all positional or all named.
    fn parse_call_args(&mut self, callee: &str) -> Result<Vec<Arg>, FrontendError> {
        let mut args: Vec<Arg> = Vec::new();
        if self.at_punct(Punct::RParen) {
            return Ok(args);
        }
        let mut form: Option<bool> = None; // Some(true) = named
        loop {
            let named = matches!(self.peek_kind(), TokenKind::Ident(_))
                && matches!(self.peek_at(1), TokenKind::Punct(Punct::Assign));
            if let Some(prev) = form {
                if prev != named {
                    return Err(self.error(format!(
                        "arguments of `{callee}` to be all positional or all named"
                    )));
                }
            }
            form = Some(named);
            if named {
                let (arg_name, _) = self.expect_ident("argument name")?;
                self.expect_punct(Punct::Assign)?;
                let value = self.parse_expr()?;
                args.push(Arg::Named(arg_name, value));
            } else {
                args.push(Arg::Positional(self.parse_expr()?));
            }
            if !self.eat_punct(Punct::Comma) {
                return Ok(args);
            }
        }
    }
}
