//! The tree-walking interpreter.
//!
//! `invoke_model` deliberately reads nothing but the MT-IR entry, the bound
//! values, and the receiver: output checking resolves class schemas through
//! the entry's own type closure, never through the source program.

use std::collections::{BTreeMap, HashMap};

use indexmap::IndexMap;

use crate::backend::CompletionRequest;
use crate::frontend::ast::{
    Arg, BinOp, Block, CallExpr, ClassDecl, Expr, FuncBody, FuncDecl, Literal, ModuleAst, Stmt, TypeExpr,
};
use crate::mtir::{site_id, CallSiteKind, MtirEntry, MtirMap, OutputTypes};
use crate::outparse::{failure_line, parse_typed_output, ParseOutcome};
use crate::prompt::{model_hyperparams, synthesize_correction_prompt, synthesize_prompt};
use crate::value::{check_type, render_value, TypeDefs, Value};

use super::{RunConfig, RuntimeError};

struct ClassInfo<'p> {
    decl: &'p ClassDecl,
    module: &'p str,
    fields: Vec<(String, TypeExpr)>,
}

pub(super) struct Interp<'p> {
    mtir: &'p MtirMap,
    config: &'p RunConfig,
    entry: &'p ModuleAst,
    /// module name -> item name -> declaration
    functions: BTreeMap<&'p str, BTreeMap<&'p str, &'p FuncDecl>>,
    classes: BTreeMap<&'p str, BTreeMap<&'p str, ClassInfo<'p>>>,
    imports: BTreeMap<&'p str, &'p [String]>,
    stdout: String,
}

struct Frame {
    /// Module whose scope resolves names in the code currently executing.
    module: String,
    scopes: Vec<HashMap<String, Value>>,
}

impl Frame {
    fn new(module: &str) -> Frame {
        Frame { module: module.to_string(), scopes: vec![HashMap::new()] }
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        self.scopes.iter().rev().find_map(|scope| scope.get(name))
    }

    fn bind(&mut self, name: &str, value: Value) {
        self.scopes.last_mut().expect("at least one scope").insert(name.to_string(), value);
    }
}

enum Flow {
    Normal,
    Return(Value),
}

fn exec_err(message: impl Into<String>) -> RuntimeError {
    RuntimeError::Exec { message: message.into() }
}

/// Class-schema view over the interpreted program from one module's
/// perspective; used for non-`by` checks only.
struct ProgramDefs<'a, 'p> {
    interp: &'a Interp<'p>,
    module: &'a str,
}

impl TypeDefs for ProgramDefs<'_, '_> {
    fn class_fields(&self, class: &str) -> Option<&[(String, TypeExpr)]> {
        self.interp.resolve_class(self.module, class).map(|info| info.fields.as_slice())
    }
}

impl<'p> Interp<'p> {
    pub(super) fn new(modules: &'p [ModuleAst], mtir: &'p MtirMap, config: &'p RunConfig) -> Interp<'p> {
        let mut functions: BTreeMap<&'p str, BTreeMap<&'p str, &'p FuncDecl>> = BTreeMap::new();
        let mut classes: BTreeMap<&'p str, BTreeMap<&'p str, ClassInfo<'p>>> = BTreeMap::new();
        let mut imports = BTreeMap::new();
        for module in modules {
            imports.insert(module.name.as_str(), module.imports.as_slice());
            let funcs = functions.entry(module.name.as_str()).or_default();
            for func in module.functions() {
                funcs.insert(func.name.as_str(), func);
            }
            let class_table = classes.entry(module.name.as_str()).or_default();
            for class in module.classes() {
                class_table.insert(
                    class.name.as_str(),
                    ClassInfo {
                        decl: class,
                        module: &module.name,
                        fields: class.fields.iter().map(|f| (f.name.clone(), f.ty.clone())).collect(),
                    },
                );
            }
        }
        let entry = modules.first().expect("a program has an entry module");
        Interp { mtir, config, entry, functions, classes, imports, stdout: String::new() }
    }

    pub(super) fn into_stdout(self) -> String {
        self.stdout
    }

    pub(super) fn run_entry(&mut self) -> Result<(), RuntimeError> {
        let mut frame = Frame::new(&self.entry.name);
        for stmt in &self.entry.stmts {
            match self.exec_stmt(stmt, &mut frame)? {
                Flow::Normal => {}
                Flow::Return(_) => return Err(exec_err("`return` outside a function")),
            }
        }
        Ok(())
    }

    fn resolve_function(&self, from: &str, name: &str) -> Option<(&'p FuncDecl, &'p str)> {
        if let Some((module, func)) = self
            .functions
            .get_key_value(from)
            .and_then(|(module, table)| table.get(name).map(|f| (*module, *f)))
        {
            return Some((func, module));
        }
        for import in self.imports.get(from).copied().unwrap_or(&[]) {
            if let Some((module, func)) = self
                .functions
                .get_key_value(import.as_str())
                .and_then(|(module, table)| table.get(name).map(|f| (*module, *f)))
            {
                return Some((func, module));
            }
        }
        None
    }

    /// Module scope, then imports in order; a class constructed in one
    /// module may flow anywhere, so as a last resort a program-wide unique
    /// name also resolves.
    fn resolve_class(&self, from: &str, name: &str) -> Option<&ClassInfo<'p>> {
        if let Some(info) = self.classes.get(from).and_then(|table| table.get(name)) {
            return Some(info);
        }
        for import in self.imports.get(from).copied().unwrap_or(&[]) {
            if let Some(info) = self.classes.get(import.as_str()).and_then(|table| table.get(name)) {
                return Some(info);
            }
        }
        let mut matches = self.classes.values().filter_map(|table| table.get(name));
        match (matches.next(), matches.next()) {
            (Some(info), None) => Some(info),
            _ => None,
        }
    }

    fn defs_for<'a>(&'a self, module: &'a str) -> ProgramDefs<'a, 'p> {
        ProgramDefs { interp: self, module }
    }

    fn exec_block(&mut self, block: &Block, frame: &mut Frame) -> Result<Flow, RuntimeError> {
        frame.scopes.push(HashMap::new());
        for stmt in &block.stmts {
            match self.exec_stmt(stmt, frame)? {
                Flow::Normal => {}
                flow @ Flow::Return(_) => {
                    frame.scopes.pop();
                    return Ok(flow);
                }
            }
        }
        frame.scopes.pop();
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> Result<Flow, RuntimeError> {
        match stmt {
            Stmt::Let { name, value, .. } => {
                let value = self.eval(value, frame)?;
                frame.bind(name, value);
                Ok(Flow::Normal)
            }
            Stmt::Expr(expr) => {
                self.eval(expr, frame)?;
                Ok(Flow::Normal)
            }
            Stmt::Print(expr) => {
                let value = self.eval(expr, frame)?;
                // Strings print raw; everything else in constructor form.
                match value {
                    Value::Str(s) => self.stdout.push_str(&s),
                    other => self.stdout.push_str(&render_value(&other)),
                }
                self.stdout.push('\n');
                Ok(Flow::Normal)
            }
            Stmt::Return { value, .. } => {
                let value = self.eval(value, frame)?;
                Ok(Flow::Return(value))
            }
            Stmt::If { cond, then_block, else_block } => {
                match self.eval(cond, frame)? {
                    Value::Bool(true) => self.exec_block(then_block, frame),
                    Value::Bool(false) => match else_block {
                        Some(block) => self.exec_block(block, frame),
                        None => Ok(Flow::Normal),
                    },
                    other => Err(exec_err(format!("`if` condition must be bool, found {}", other.summary()))),
                }
            }
        }
    }

    fn eval(&mut self, expr: &Expr, frame: &mut Frame) -> Result<Value, RuntimeError> {
        match expr {
            Expr::Literal(lit) => Ok(Value::from(lit)),
            Expr::Var { name, span } => frame
                .lookup(name)
                .cloned()
                .ok_or_else(|| exec_err(format!("undefined variable `{name}` at {span}"))),
            Expr::ListLit(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(item, frame)?);
                }
                Ok(Value::List(out))
            }
            Expr::MapLit(pairs) => {
                let mut out = Vec::with_capacity(pairs.len());
                for (k, v) in pairs {
                    out.push((self.eval(k, frame)?, self.eval(v, frame)?));
                }
                Ok(Value::Map(out))
            }
            Expr::Neg(operand) => match self.eval(operand, frame)? {
                Value::Int(v) => v.checked_neg().map(Value::Int).ok_or_else(|| exec_err("integer overflow")),
                Value::Float(v) => Ok(Value::Float(-v)),
                other => Err(exec_err(format!("cannot negate {}", other.summary()))),
            },
            Expr::Binary { op, lhs, rhs } => {
                let lhs = self.eval(lhs, frame)?;
                let rhs = self.eval(rhs, frame)?;
                binary_op(op, lhs, rhs)
            }
            Expr::Attr { recv, name, span } => match self.eval(recv, frame)? {
                Value::Object { class, fields } => fields
                    .get(name)
                    .cloned()
                    .ok_or_else(|| exec_err(format!("object {class} has no attribute `{name}` at {span}"))),
                other => Err(exec_err(format!("cannot read attribute `{name}` of {} at {span}", other.summary()))),
            },
            Expr::MethodCall { recv, method, args, span } => {
                let receiver = self.eval(recv, frame)?;
                let Value::Object { class, .. } = &receiver else {
                    return Err(exec_err(format!("cannot call method `{method}` on {} at {span}", receiver.summary())));
                };
                let class = class.clone();
                let info = self
                    .resolve_class(&frame.module, &class)
                    .ok_or_else(|| exec_err(format!("unknown class `{class}` at {span}")))?;
                let class_decl: &'p ClassDecl = info.decl;
                let decl = class_decl
                    .methods
                    .iter()
                    .find(|m| m.name == *method)
                    .ok_or_else(|| exec_err(format!("class `{class}` has no method `{method}` at {span}")))?;
                let class_module = info.module;
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(self.eval(arg, frame)?);
                }
                self.call_callable(decl, class_module, Some(receiver), values)
            }
            Expr::Call(call) => self.eval_call(call, frame),
        }
    }

    fn eval_call(&mut self, call: &CallExpr, frame: &mut Frame) -> Result<Value, RuntimeError> {
        if self.resolve_class(&frame.module, &call.callee).is_some() {
            return self.eval_init(call, frame);
        }
        let Some((decl, def_module)) = self.resolve_function(&frame.module, &call.callee) else {
            return Err(exec_err(format!("unknown function or class `{}` at {}", call.callee, call.span)));
        };
        if call.by.is_some() {
            return Err(exec_err(format!(
                "`by` cannot attach to a call of function `{}` at {}",
                call.callee, call.span
            )));
        }
        let mut values = Vec::with_capacity(call.args.len());
        for arg in &call.args {
            match arg {
                Arg::Positional(e) => values.push(self.eval(e, frame)?),
                Arg::Named(name, _) => {
                    return Err(exec_err(format!(
                        "function `{}` takes positional arguments, got `{name}=` at {}",
                        call.callee, call.span
                    )));
                }
            }
        }
        self.call_callable(decl, def_module, None, values)
    }

    /// Shared call path for functions and methods, `by`-bodied or not.
    fn call_callable(
        &mut self,
        decl: &'p FuncDecl,
        def_module: &'p str,
        receiver: Option<Value>,
        args: Vec<Value>,
    ) -> Result<Value, RuntimeError> {
        if args.len() != decl.params.len() {
            return Err(exec_err(format!(
                "`{}` expects {} arguments, got {}",
                decl.name,
                decl.params.len(),
                args.len()
            )));
        }
        match &decl.body {
            FuncBody::By(by) => {
                let id = site_id(def_module, by.span.line, by.span.column);
                let entry = self
                    .mtir
                    .get(&id)
                    .ok_or_else(|| exec_err(format!("no MT-IR entry for call-site `{id}`")))?;
                let bound: Vec<(String, Value)> =
                    decl.params.iter().map(|p| p.name.clone()).zip(args).collect();
                self.invoke_model(entry, bound, receiver.as_ref())
            }
            FuncBody::Block(block) => {
                let defs = self.defs_for(def_module);
                for (param, value) in decl.params.iter().zip(&args) {
                    let report = check_type(value, &param.ty, &defs);
                    if let Some(m) = report.first() {
                        return Err(exec_err(format!(
                            "argument `{}` of `{}`: expected {}, found {} at {}",
                            param.name, decl.name, m.expected, m.found, m.path
                        )));
                    }
                }
                let mut frame = Frame::new(def_module);
                for (param, value) in decl.params.iter().zip(args) {
                    frame.bind(&param.name, value);
                }
                match self.exec_block(block, &mut frame)? {
                    Flow::Return(value) => {
                        let defs = self.defs_for(def_module);
                        let report = check_type(&value, &decl.return_type, &defs);
                        match report.first() {
                            None => Ok(value),
                            Some(m) => Err(exec_err(format!(
                                "`{}` must return {}, found {} at {}",
                                decl.name, m.expected, m.found, m.path
                            ))),
                        }
                    }
                    Flow::Normal => Err(exec_err(format!("`{}` finished without returning a value", decl.name))),
                }
            }
        }
    }

    fn eval_init(&mut self, call: &CallExpr, frame: &mut Frame) -> Result<Value, RuntimeError> {
        let info = self.resolve_class(&frame.module, &call.callee).expect("caller resolved the class");
        let (class_name, class_module) = (info.decl.name.clone(), info.module.to_string());
        let declared = info.fields.clone();

        // Evaluate arguments as written, producing (field name, value).
        let named_form = call.args.iter().any(|a| matches!(a, Arg::Named(..)));
        let mut given: Vec<(String, Value)> = Vec::with_capacity(call.args.len());
        if named_form {
            for arg in &call.args {
                let Arg::Named(name, expr) = arg else { unreachable!("parser rejects mixed arguments") };
                if !declared.iter().any(|(n, _)| n == name) {
                    return Err(exec_err(format!(
                        "class `{class_name}` has no field `{name}` at {}",
                        call.span
                    )));
                }
                let value = self.eval(expr, frame)?;
                given.push((name.clone(), value));
            }
            // Normalize to declaration order, mirroring the IR layout.
            given.sort_by_key(|(name, _)| declared.iter().position(|(n, _)| n == name).unwrap());
        } else {
            if call.args.len() > declared.len() {
                return Err(exec_err(format!(
                    "`{class_name}` declares {} fields but {} arguments were given at {}",
                    declared.len(),
                    call.args.len(),
                    call.span
                )));
            }
            for (arg, (name, _)) in call.args.iter().zip(&declared) {
                let Arg::Positional(expr) = arg else { unreachable!("parser rejects mixed arguments") };
                let value = self.eval(expr, frame)?;
                given.push((name.clone(), value));
            }
        }

        match &call.by {
            Some(by) => {
                let id = site_id(&frame.module, by.span.line, by.span.column);
                let entry = self
                    .mtir
                    .get(&id)
                    .ok_or_else(|| exec_err(format!("no MT-IR entry for call-site `{id}`")))?;
                self.invoke_model(entry, given, None)
            }
            None => {
                // Plain init must cover every declared field.
                if given.len() != declared.len() {
                    return Err(exec_err(format!(
                        "`{class_name}` init must provide all {} fields, got {} at {}",
                        declared.len(),
                        given.len(),
                        call.span
                    )));
                }
                let defs = ProgramDefs { interp: self, module: &class_module };
                let mut fields: IndexMap<String, Value> = IndexMap::with_capacity(declared.len());
                for (name, ty) in &declared {
                    let value = given
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| {
                            exec_err(format!("`{class_name}` init is missing field `{name}` at {}", call.span))
                        })?;
                    let report = check_type(&value, ty, &defs);
                    if let Some(m) = report.first() {
                        return Err(exec_err(format!(
                            "field `{name}` of `{class_name}`: expected {}, found {} at {}",
                            m.expected, m.found, m.path
                        )));
                    }
                    fields.insert(name.clone(), value);
                }
                Ok(Value::Object { class: class_name, fields })
            }
        }
    }

    /// The bounded retry engine (reads only MT-IR + bound values + receiver).
    fn invoke_model(
        &mut self,
        entry: &MtirEntry,
        bound: Vec<(String, Value)>,
        receiver: Option<&Value>,
    ) -> Result<Value, RuntimeError> {
        // Input conformance is checked before any token is spent.
        for ((name, value), (_, declared_ty)) in bound.iter().zip(&entry.params) {
            let report = check_type(value, declared_ty, entry);
            if let Some(m) = report.first() {
                return Err(RuntimeError::ArgType {
                    site_id: entry.site_id.clone(),
                    message: format!("argument `{name}`: expected {}, found {} at {}", m.expected, m.found, m.path),
                });
            }
        }
        if let (Some(class), Some(receiver)) = (&entry.receiver_class, receiver) {
            let report = check_type(receiver, &TypeExpr::named(class.clone()), entry);
            if let Some(m) = report.first() {
                return Err(RuntimeError::ArgType {
                    site_id: entry.site_id.clone(),
                    message: format!("receiver: expected {}, found {} at {}", m.expected, m.found, m.path),
                });
            }
        }

        let backend = self
            .config
            .backends
            .get(&entry.model_ref)
            .ok_or_else(|| exec_err(format!("no backend bound for model reference `{}`", entry.model_ref)))?
            .clone();
        let expected = match &entry.outputs {
            OutputTypes::Return(ty) => ty.clone(),
            OutputTypes::Missing(_) => TypeExpr::named(entry.subject.clone()),
        };
        let provided: Option<IndexMap<String, Value>> = match entry.kind {
            CallSiteKind::ObjectInit => Some(bound.iter().cloned().collect()),
            _ => None,
        };
        let mut hyperparams: BTreeMap<String, Literal> = self.config.default_hyperparams.clone();
        hyperparams.extend(model_hyperparams(entry));
        let model_name =
            self.config.default_model.clone().unwrap_or_else(|| entry.model_ref.clone());

        let mut prompt = synthesize_prompt(entry, &bound, receiver)?;
        let mut attempts: u32 = 0;
        loop {
            attempts += 1;
            let request = CompletionRequest {
                prompt: prompt.clone(),
                model_name: model_name.clone(),
                hyperparams: hyperparams.clone(),
            };
            let result = backend.complete(&request)?;
            self.config.ledger.lock().unwrap().record(&entry.site_id, &result);
            match parse_typed_output(&result.text, &expected, entry, provided.as_ref()) {
                ParseOutcome::Ok(value) => {
                    debug_assert!(check_type(&value, &expected, entry).ok, "conversion enforces conformance");
                    return Ok(value);
                }
                ParseOutcome::Fail(failure) => {
                    if attempts > self.config.max_retries {
                        return Err(RuntimeError::MtpType {
                            site_id: entry.site_id.clone(),
                            attempts,
                            last_diagnostic: failure_line(&failure),
                        });
                    }
                    prompt = synthesize_correction_prompt(entry, &result.text, &failure);
                }
            }
        }
    }
}

fn binary_op(op: &BinOp, lhs: Value, rhs: Value) -> Result<Value, RuntimeError> {
    use BinOp::*;
    match op {
        Eq => return Ok(Value::Bool(lhs == rhs)),
        Ne => return Ok(Value::Bool(lhs != rhs)),
        _ => {}
    }
    match (&lhs, &rhs) {
        (Value::Int(a), Value::Int(b)) => {
            let (a, b) = (*a, *b);
            let out = match op {
                Add => a.checked_add(b).map(Value::Int),
                Sub => a.checked_sub(b).map(Value::Int),
                Mul => a.checked_mul(b).map(Value::Int),
                Div => {
                    if b == 0 {
                        return Err(exec_err("division by zero"));
                    }
                    a.checked_div(b).map(Value::Int)
                }
                Lt => Some(Value::Bool(a < b)),
                Le => Some(Value::Bool(a <= b)),
                Gt => Some(Value::Bool(a > b)),
                Ge => Some(Value::Bool(a >= b)),
                Eq | Ne => unreachable!(),
            };
            out.ok_or_else(|| exec_err("integer overflow"))
        }
        (Value::Float(a), Value::Float(b)) => {
            let (a, b) = (*a, *b);
            Ok(match op {
                Add => Value::Float(a + b),
                Sub => Value::Float(a - b),
                Mul => Value::Float(a * b),
                Div => Value::Float(a / b),
                Lt => Value::Bool(a < b),
                Le => Value::Bool(a <= b),
                Gt => Value::Bool(a > b),
                Ge => Value::Bool(a >= b),
                Eq | Ne => unreachable!(),
            })
        }
        (Value::Str(a), Value::Str(b)) => match op {
            Lt => Ok(Value::Bool(a < b)),
            Le => Ok(Value::Bool(a <= b)),
            Gt => Ok(Value::Bool(a > b)),
            Ge => Ok(Value::Bool(a >= b)),
            _ => Err(exec_err(format!("operator `{}` is not defined on strings", op.as_str()))),
        },
        _ => Err(exec_err(format!(
            "operator `{}` needs matching numeric operands, found {} and {}",
            op.as_str(),
            lhs.summary(),
            rhs.summary()
        ))),
    }
}
