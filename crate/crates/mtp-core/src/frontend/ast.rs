//! Module ASTs for the MTP language.
//!
//! Structural equality ignores source positions (see [`Span`]), so a
//! pretty-printed module re-parses to an equal AST.

use std::fmt;

pub use super::token::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    Int,
    Float,
    Str,
    Bool,
}

impl Primitive {
    pub fn as_str(&self) -> &'static str {
        match self {
            Primitive::Int => "int",
            Primitive::Float => "float",
            Primitive::Str => "str",
            Primitive::Bool => "bool",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Primitive(Primitive),
    Named { name: String, span: Span },
    ListOf(Box<TypeExpr>),
    MapOf(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn named(name: impl Into<String>) -> TypeExpr {
        TypeExpr::Named { name: name.into(), span: Span::default() }
    }

    pub fn list_of(element: TypeExpr) -> TypeExpr {
        TypeExpr::ListOf(Box::new(element))
    }

    pub fn map_of(key: TypeExpr, value: TypeExpr) -> TypeExpr {
        TypeExpr::MapOf(Box::new(key), Box::new(value))
    }
}

impl fmt::Display for TypeExpr {
    /// Renders in source grammar syntax, e.g. `list[Level]` or `map[str,int]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Primitive(p) => f.write_str(p.as_str()),
            TypeExpr::Named { name, .. } => f.write_str(name),
            TypeExpr::ListOf(el) => write!(f, "list[{el}]"),
            TypeExpr::MapOf(k, v) => write!(f, "map[{k},{v}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ByClause {
    pub model_ref: String,
    pub hyperparams: Vec<(String, Literal)>,
    /// Position of the `by` keyword; this is the call-site identity.
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuncBody {
    Block(Block),
    By(ByClause),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: TypeExpr,
    pub body: FuncBody,
    pub span: Span,
}

impl FuncDecl {
    pub fn by_clause(&self) -> Option<&ByClause> {
        match &self.body {
            FuncBody::By(by) => Some(by),
            FuncBody::Block(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub fields: Vec<FieldDef>,
    pub methods: Vec<FuncDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Class(ClassDecl),
    Func(FuncDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Class(c) => &c.name,
            Decl::Func(f) => &f.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
}

/// Argument in a call or object-init expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Positional(Expr),
    Named(String, Expr),
}

impl Arg {
    pub fn expr(&self) -> &Expr {
        match self {
            Arg::Positional(e) => e,
            Arg::Named(_, e) => e,
        }
    }
}

/// `IDENT "(" args ")" [by_clause]` — a function call or an object
/// initialization; which one is decided by what the callee resolves to.
#[derive(Debug, Clone, PartialEq)]
pub struct CallExpr {
    pub callee: String,
    pub args: Vec<Arg>,
    pub by: Option<ByClause>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Literal),
    Var { name: String, span: Span },
    ListLit(Vec<Expr>),
    MapLit(Vec<(Expr, Expr)>),
    Call(CallExpr),
    MethodCall { recv: Box<Expr>, method: String, args: Vec<Expr>, span: Span },
    Attr { recv: Box<Expr>, name: String, span: Span },
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Let { name: String, value: Expr, span: Span },
    Expr(Expr),
    Print(Expr),
    Return { value: Expr, span: Span },
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleAst {
    /// Derived from the file stem.
    pub name: String,
    pub imports: Vec<String>,
    pub decls: Vec<Decl>,
    /// Top-level statements in source order; executed only for the entry module.
    pub stmts: Vec<Stmt>,
}

impl ModuleAst {
    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Class(c) => Some(c),
            Decl::Func(_) => None,
        })
    }

    pub fn functions(&self) -> impl Iterator<Item = &FuncDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Func(f) => Some(f),
            Decl::Class(_) => None,
        })
    }
}

/// Parses a type written in source grammar syntax (e.g. `list[Level]`).
/// Used when reading serialized MT-IR back in.
pub fn parse_type_str(s: &str) -> Result<TypeExpr, String> {
    let tokens = super::lexer::tokenize(s).map_err(|e| e.to_string())?;
    let mut parser = super::parser::Parser::new(tokens);
    let ty = parser.parse_type().map_err(|e| e.to_string())?;
    parser.expect_eof().map_err(|e| e.to_string())?;
    Ok(ty)
}
