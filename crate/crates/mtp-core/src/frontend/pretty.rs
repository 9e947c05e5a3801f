//! Pretty-printer emitting parseable source text.
//!
//! `parse(pretty(ast))` yields a structurally equal AST; this is the
//! round-trip property the frontend tests pin down.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_module(module: &ModuleAst) -> String {
    let mut out = String::new();
    for import in &module.imports {
        let _ = writeln!(out, "import {import}");
    }
    for decl in &module.decls {
        match decl {
            Decl::Class(c) => print_class(&mut out, c),
            Decl::Func(f) => print_func(&mut out, f, 0),
        }
    }
    for stmt in &module.stmts {
        print_stmt(&mut out, stmt, 0);
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_class(out: &mut String, class: &ClassDecl) {
    let _ = writeln!(out, "class {} {{", class.name);
    for field in &class.fields {
        let _ = writeln!(out, "  {}: {}", field.name, field.ty);
    }
    for method in &class.methods {
        print_func(out, method, 1);
    }
    out.push_str("}\n");
}

fn print_func(out: &mut String, func: &FuncDecl, level: usize) {
    indent(out, level);
    let params: Vec<String> = func.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
    let _ = write!(out, "def {}({}) -> {}", func.name, params.join(", "), func.return_type);
    match &func.body {
        FuncBody::By(by) => {
            out.push(' ');
            print_by(out, by);
            out.push('\n');
        }
        FuncBody::Block(block) => {
            out.push_str(" {\n");
            for stmt in &block.stmts {
                print_stmt(out, stmt, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
    }
}

fn print_by(out: &mut String, by: &ByClause) {
    let _ = write!(out, "by {}", by.model_ref);
    if !by.hyperparams.is_empty() {
        let hypers: Vec<String> =
            by.hyperparams.iter().map(|(name, lit)| format!("{name}={}", print_literal(lit))).collect();
        let _ = write!(out, "({})", hypers.join(", "));
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match stmt {
        Stmt::Let { name, value, .. } => {
            let _ = writeln!(out, "let {name} = {}", print_expr(value));
        }
        Stmt::Expr(expr) => {
            let _ = writeln!(out, "{}", print_expr(expr));
        }
        Stmt::Print(expr) => {
            let _ = writeln!(out, "print({})", print_expr(expr));
        }
        Stmt::Return { value, .. } => {
            let _ = writeln!(out, "return {}", print_expr(value));
        }
        Stmt::If { cond, then_block, else_block } => {
            let _ = writeln!(out, "if {} {{", print_expr(cond));
            for s in &then_block.stmts {
                print_stmt(out, s, level + 1);
            }
            indent(out, level);
            out.push('}');
            if let Some(else_block) = else_block {
                out.push_str(" else {\n");
                for s in &else_block.stmts {
                    print_stmt(out, s, level + 1);
                }
                indent(out, level);
                out.push('}');
            }
            out.push('\n');
        }
    }
}

pub fn print_literal(lit: &Literal) -> String {
    match lit {
        Literal::Int(v) => v.to_string(),
        // Debug keeps a trailing `.0` on integral floats, so the literal
        // stays a float when re-parsed.
        Literal::Float(v) => format!("{v:?}"),
        Literal::Str(s) => quote_str(s),
        Literal::Bool(b) => b.to_string(),
    }
}

pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

pub fn print_expr(expr: &Expr) -> String {
    match expr {
        Expr::Literal(lit) => print_literal(lit),
        Expr::Var { name, .. } => name.clone(),
        Expr::ListLit(elements) => {
            let inner: Vec<String> = elements.iter().map(print_expr).collect();
            format!("[{}]", inner.join(", "))
        }
        Expr::MapLit(pairs) => {
            let inner: Vec<String> =
                pairs.iter().map(|(k, v)| format!("{}: {}", print_expr(k), print_expr(v))).collect();
            format!("{{{}}}", inner.join(", "))
        }
        Expr::Call(call) => {
            let args: Vec<String> = call
                .args
                .iter()
                .map(|arg| match arg {
                    Arg::Positional(e) => print_expr(e),
                    Arg::Named(name, e) => format!("{name}={}", print_expr(e)),
                })
                .collect();
            let mut text = format!("{}({})", call.callee, args.join(", "));
            if let Some(by) = &call.by {
                text.push(' ');
                print_by(&mut text, by);
            }
            text
        }
        Expr::MethodCall { recv, method, args, .. } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            format!("{}.{method}({})", print_postfix_recv(recv), args.join(", "))
        }
        Expr::Attr { recv, name, .. } => format!("{}.{name}", print_postfix_recv(recv)),
        Expr::Neg(operand) => format!("-{}", print_primary(operand)),
        Expr::Binary { op, lhs, rhs } => {
            format!("({} {} {})", print_expr(lhs), op.as_str(), print_expr(rhs))
        }
    }
}

// Receivers of `.` must bind tighter than operators; parenthesize when not.
fn print_postfix_recv(expr: &Expr) -> String {
    match expr {
        Expr::Binary { .. } | Expr::Neg(_) => format!("({})", print_expr(expr)),
        _ => print_expr(expr),
    }
}

fn print_primary(expr: &Expr) -> String {
    match expr {
        Expr::Binary { .. } => format!("({})", print_expr(expr)),
        _ => print_expr(expr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_module, tokenize};

    fn round_trip(src: &str) {
        let ast = parse_module(tokenize(src).unwrap(), "m").unwrap();
        let printed = pretty_module(&ast);
        let reparsed = parse_module(
            tokenize(&printed).unwrap_or_else(|e| panic!("pretty output must lex: {e}\n{printed}")),
            "m",
        )
        .unwrap_or_else(|e| panic!("pretty output must parse: {e}\n{printed}"));
        assert_eq!(ast, reparsed, "round trip changed the AST:\n{printed}");
    }

    #[test]
    fn round_trips_core_constructs() {
        round_trip("import a\nimport b\nclass P { name: str\ndob: str\ndef age(y: int) -> int by llm(temperature=0.7) }");
        round_trip("def f(x: int, y: list[str]) -> map[str,int] { let z = x + 1\nreturn {\"a\": z} }");
        round_trip("let e = Person(name=\"A\") by llm\nprint(e.dob)");
        round_trip("let v = [1, 2, 3]\nif v == [1] { print(1) } else { print(2) }");
        round_trip("let s = \"quote \\\" backslash \\\\ newline \\n done\"");
        round_trip("let x = -5\nlet y = -x * (2 - 3)\nlet z = a.b.c(1).d");
        round_trip("def g() -> float by llm\nlet w = g() + 0.5");
        round_trip("let m = {1: [Person(\"x\")], 2: []}");
    }
}
