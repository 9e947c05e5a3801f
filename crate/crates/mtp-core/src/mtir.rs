//! Per-call-site IR construction and its canonical JSON serialization.
//!
//! Every `by` call-site in a program gets one entry holding the subject,
//! the signature types, the model binding, and the closure of non-primitive
//! type definitions reachable from the signature. The runtime reads only
//! this map; it never goes back to the source program.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map as JsonMap, Value as JsonValue};
use thiserror::Error;

use crate::frontend::ast::{
    Arg, Block, CallExpr, ClassDecl, Expr, FuncBody, FuncDecl, Literal, ModuleAst, Stmt, TypeExpr,
};
use crate::frontend::parse_type_str;
use crate::registry::{RegistryError, SemanticRegistry, SymbolKind};
use crate::value::TypeDefs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallSiteKind {
    FunctionDef,
    MethodDef,
    ObjectInit,
}

impl CallSiteKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CallSiteKind::FunctionDef => "function",
            CallSiteKind::MethodDef => "method",
            CallSiteKind::ObjectInit => "init",
        }
    }
}

/// A named record type pulled into an entry's closure: the unit of meaning
/// the prompt renderer shows to the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSchema {
    pub name: String,
    pub fields: Vec<(String, TypeExpr)>,
}

/// What the model must produce at this site.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputTypes {
    /// Function and method sites: the declared return type.
    Return(TypeExpr),
    /// Object-init sites: the attributes the developer did not provide.
    Missing(Vec<(String, TypeExpr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MtirEntry {
    /// `module:line:column` of the `by` keyword.
    pub site_id: String,
    pub kind: CallSiteKind,
    /// `f` for functions, `C.mth` for methods, `C` for object init.
    pub subject: String,
    /// Parameter names and types; for object init these are the provided
    /// attribute slots.
    pub params: Vec<(String, TypeExpr)>,
    pub outputs: OutputTypes,
    pub receiver_class: Option<String>,
    pub model_ref: String,
    pub hyperparams: BTreeMap<String, Literal>,
    /// Closure of non-primitive types reachable from params, outputs, and
    /// receiver, each exactly once, in first-reached depth-first order.
    pub type_explanations: Vec<TypeSchema>,
}

impl MtirEntry {
    pub fn schema(&self, class: &str) -> Option<&TypeSchema> {
        self.type_explanations.iter().find(|s| s.name == class)
    }
}

/// The runtime-side [`TypeDefs`]: class schemas come from the entry's own
/// closure, so output checking needs no access to the source program.
impl TypeDefs for MtirEntry {
    fn class_fields(&self, class: &str) -> Option<&[(String, TypeExpr)]> {
        self.schema(class).map(|s| s.fields.as_slice())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MtirMap {
    pub entries: BTreeMap<String, MtirEntry>,
}

impl MtirMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, site_id: &str) -> Option<&MtirEntry> {
        self.entries.get(site_id)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MtirError {
    #[error("at `{site_id}`: {source}")]
    AtSite {
        site_id: String,
        #[source]
        source: RegistryError,
    },

    #[error("at `{site_id}`: `by` cannot attach to a call of function `{callee}`; it belongs on definitions or object initialization")]
    ByOnFunctionCall { site_id: String, callee: String },

    #[error("at `{site_id}`: object init with `by` must leave at least one of `{class}`'s {fields} fields for the model (got {provided} arguments)")]
    InitNotPartial { site_id: String, class: String, provided: usize, fields: usize },

    #[error("at `{site_id}`: `{class}` declares {fields} fields but {provided} positional arguments were given")]
    InitTooManyArgs { site_id: String, class: String, provided: usize, fields: usize },

    #[error(transparent)]
    Registry(#[from] RegistryError),

    #[error("malformed MT-IR document at byte {offset}: {message}")]
    Format { offset: usize, message: String },
}

/// One discovered `by` call-site, borrowing its AST node.
#[derive(Debug)]
pub struct CallSite<'a> {
    pub site_id: String,
    pub kind: CallSiteKind,
    pub module: &'a str,
    pub node: CallSiteNode<'a>,
}

#[derive(Debug)]
pub enum CallSiteNode<'a> {
    Function(&'a FuncDecl),
    Method { class: &'a ClassDecl, method: &'a FuncDecl },
    Init(&'a CallExpr),
}

pub fn site_id(module: &str, line: u32, column: u32) -> String {
    format!("{module}:{line}:{column}")
}

/// Finds every `by` call-site: function and method definitions carrying a
/// `by` body, and object-init expressions carrying a trailing `by`, wherever
/// they occur (top level, function bodies, nested expressions).
pub fn collect_by_callsites<'a>(modules: &'a [ModuleAst]) -> Vec<CallSite<'a>> {
    let mut sites = Vec::new();
    for module in modules {
        for class in module.classes() {
            for method in &class.methods {
                if let FuncBody::By(by) = &method.body {
                    sites.push(CallSite {
                        site_id: site_id(&module.name, by.span.line, by.span.column),
                        kind: CallSiteKind::MethodDef,
                        module: &module.name,
                        node: CallSiteNode::Method { class, method },
                    });
                }
            }
        }
        for func in module.functions() {
            match &func.body {
                FuncBody::By(by) => sites.push(CallSite {
                    site_id: site_id(&module.name, by.span.line, by.span.column),
                    kind: CallSiteKind::FunctionDef,
                    module: &module.name,
                    node: CallSiteNode::Function(func),
                }),
                FuncBody::Block(block) => collect_in_block(&module.name, block, &mut sites),
            }
        }
        for class in module.classes() {
            for method in &class.methods {
                if let FuncBody::Block(block) = &method.body {
                    collect_in_block(&module.name, block, &mut sites);
                }
            }
        }
        for stmt in &module.stmts {
            collect_in_stmt(&module.name, stmt, &mut sites);
        }
    }
    sites
}

fn collect_in_block<'a>(module: &'a str, block: &'a Block, sites: &mut Vec<CallSite<'a>>) {
    for stmt in &block.stmts {
        collect_in_stmt(module, stmt, sites);
    }
}

fn collect_in_stmt<'a>(module: &'a str, stmt: &'a Stmt, sites: &mut Vec<CallSite<'a>>) {
    match stmt {
        Stmt::Let { value, .. } => collect_in_expr(module, value, sites),
        Stmt::Expr(e) | Stmt::Print(e) | Stmt::Return { value: e, .. } => collect_in_expr(module, e, sites),
        Stmt::If { cond, then_block, else_block } => {
            collect_in_expr(module, cond, sites);
            collect_in_block(module, then_block, sites);
            if let Some(else_block) = else_block {
                collect_in_block(module, else_block, sites);
            }
        }
    }
}

fn collect_in_expr<'a>(module: &'a str, expr: &'a Expr, sites: &mut Vec<CallSite<'a>>) {
    match expr {
        Expr::Literal(_) | Expr::Var { .. } => {}
        Expr::ListLit(items) => {
            for item in items {
                collect_in_expr(module, item, sites);
            }
        }
        Expr::MapLit(pairs) => {
            for (k, v) in pairs {
                collect_in_expr(module, k, sites);
                collect_in_expr(module, v, sites);
            }
        }
        Expr::Call(call) => {
            if let Some(by) = &call.by {
                sites.push(CallSite {
                    site_id: site_id(module, by.span.line, by.span.column),
                    kind: CallSiteKind::ObjectInit,
                    module,
                    node: CallSiteNode::Init(call),
                });
            }
            for arg in &call.args {
                collect_in_expr(module, arg.expr(), sites);
            }
        }
        Expr::MethodCall { recv, args, .. } => {
            collect_in_expr(module, recv, sites);
            for arg in args {
                collect_in_expr(module, arg, sites);
            }
        }
        Expr::Attr { recv, .. } => collect_in_expr(module, recv, sites),
        Expr::Neg(operand) => collect_in_expr(module, operand, sites),
        Expr::Binary { lhs, rhs, .. } => {
            collect_in_expr(module, lhs, sites);
            collect_in_expr(module, rhs, sites);
        }
    }
}

/// Appends the schemas of every named type reachable from `ty` (through
/// fields, list elements, and map key/value types) that has not been visited
/// yet, in first-reached depth-first order. Field types resolve from the
/// module that defines their class, and the visited set terminates cycles.
pub fn extract_type_definition(
    ty: &TypeExpr,
    from_module: &str,
    registry: &SemanticRegistry,
    visited: &mut BTreeSet<(String, String)>,
) -> Result<Vec<TypeSchema>, RegistryError> {
    let mut out = Vec::new();
    extract_into(ty, from_module, registry, visited, &mut out)?;
    Ok(out)
}

fn extract_into(
    ty: &TypeExpr,
    from_module: &str,
    registry: &SemanticRegistry,
    visited: &mut BTreeSet<(String, String)>,
    out: &mut Vec<TypeSchema>,
) -> Result<(), RegistryError> {
    match ty {
        TypeExpr::Primitive(_) => Ok(()),
        TypeExpr::Named { name, span } => {
            let def = registry.resolve_class(from_module, name).ok_or_else(|| RegistryError::Name {
                name: name.clone(),
                module: from_module.to_string(),
                line: span.line,
                column: span.column,
            })?;
            let class_id = def.id.clone();
            if !visited.insert((class_id.module.clone(), class_id.name.clone())) {
                return Ok(());
            }
            let fields = registry
                .class_fields(&class_id)
                .expect("registered class has a field table")
                .to_vec();
            out.push(TypeSchema { name: class_id.name.clone(), fields: fields.clone() });
            for (_, field_ty) in &fields {
                extract_into(field_ty, &class_id.module, registry, visited, out)?;
            }
            Ok(())
        }
        TypeExpr::ListOf(el) => extract_into(el, from_module, registry, visited, out),
        TypeExpr::MapOf(k, v) => {
            extract_into(k, from_module, registry, visited, out)?;
            extract_into(v, from_module, registry, visited, out)
        }
    }
}

pub fn build_mtir(modules: &[ModuleAst], registry: &SemanticRegistry) -> Result<MtirMap, MtirError> {
    let mut map = MtirMap::default();
    for site in collect_by_callsites(modules) {
        let entry = build_entry(&site, registry)?;
        map.entries.insert(entry.site_id.clone(), entry);
    }
    Ok(map)
}

fn build_entry(site: &CallSite<'_>, registry: &SemanticRegistry) -> Result<MtirEntry, MtirError> {
    let at_site = |source: RegistryError| MtirError::AtSite { site_id: site.site_id.clone(), source };
    let mut visited: BTreeSet<(String, String)> = BTreeSet::new();
    let mut explanations: Vec<TypeSchema> = Vec::new();
    let extract = |ty: &TypeExpr, visited: &mut BTreeSet<(String, String)>, explanations: &mut Vec<TypeSchema>|
     -> Result<(), MtirError> {
        let mut found = extract_type_definition(ty, site.module, registry, visited).map_err(at_site)?;
        explanations.append(&mut found);
        Ok(())
    };

    match &site.node {
        CallSiteNode::Function(func) | CallSiteNode::Method { method: func, .. } => {
            let by = func.by_clause().expect("collected definition sites carry a by clause");
            let params: Vec<(String, TypeExpr)> =
                func.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
            for (_, ty) in &params {
                extract(ty, &mut visited, &mut explanations)?;
            }
            extract(&func.return_type, &mut visited, &mut explanations)?;
            let (subject, kind, receiver_class) = match &site.node {
                CallSiteNode::Method { class, .. } => {
                    // Receiver schemas come last: params, then outputs, then self.
                    extract(&TypeExpr::named(class.name.clone()), &mut visited, &mut explanations)?;
                    (format!("{}.{}", class.name, func.name), CallSiteKind::MethodDef, Some(class.name.clone()))
                }
                _ => (func.name.clone(), CallSiteKind::FunctionDef, None),
            };
            Ok(MtirEntry {
                site_id: site.site_id.clone(),
                kind,
                subject,
                params,
                outputs: OutputTypes::Return(func.return_type.clone()),
                receiver_class,
                model_ref: by.model_ref.clone(),
                hyperparams: by.hyperparams.iter().cloned().collect(),
                type_explanations: explanations,
            })
        }
        CallSiteNode::Init(call) => {
            let by = call.by.as_ref().expect("collected init sites carry a by clause");
            let def = registry
                .resolve_item(site.module, &call.callee)
                .expect("registry build already resolved this callee")
                .clone();
            if def.id.kind != SymbolKind::Class {
                return Err(MtirError::ByOnFunctionCall {
                    site_id: site.site_id.clone(),
                    callee: call.callee.clone(),
                });
            }
            let declared = registry.class_fields(&def.id).expect("class has a field table").to_vec();
            let provided_names: Vec<String> = if call.args.iter().any(|a| matches!(a, Arg::Named(..))) {
                // Named form: any proper subset, normalized to declaration order.
                let given: Vec<&str> = call
                    .args
                    .iter()
                    .filter_map(|a| match a {
                        Arg::Named(name, _) => Some(name.as_str()),
                        Arg::Positional(_) => None,
                    })
                    .collect();
                declared.iter().map(|(n, _)| n.clone()).filter(|n| given.contains(&n.as_str())).collect()
            } else {
                // Positional form: a strict prefix of the declared fields.
                if call.args.len() > declared.len() {
                    return Err(MtirError::InitTooManyArgs {
                        site_id: site.site_id.clone(),
                        class: def.id.name.clone(),
                        provided: call.args.len(),
                        fields: declared.len(),
                    });
                }
                declared.iter().take(call.args.len()).map(|(n, _)| n.clone()).collect()
            };
            if provided_names.len() >= declared.len() {
                return Err(MtirError::InitNotPartial {
                    site_id: site.site_id.clone(),
                    class: def.id.name.clone(),
                    provided: provided_names.len(),
                    fields: declared.len(),
                });
            }
            let params: Vec<(String, TypeExpr)> = declared
                .iter()
                .filter(|(n, _)| provided_names.contains(n))
                .map(|(n, t)| (n.clone(), t.clone()))
                .collect();
            let missing: Vec<(String, TypeExpr)> = declared
                .iter()
                .filter(|(n, _)| !provided_names.contains(n))
                .map(|(n, t)| (n.clone(), t.clone()))
                .collect();
            for (_, ty) in &params {
                extract(ty, &mut visited, &mut explanations)?;
            }
            for (_, ty) in &missing {
                extract(ty, &mut visited, &mut explanations)?;
            }
            extract(&TypeExpr::named(def.id.name.clone()), &mut visited, &mut explanations)?;
            Ok(MtirEntry {
                site_id: site.site_id.clone(),
                kind: CallSiteKind::ObjectInit,
                subject: def.id.name.clone(),
                params,
                outputs: OutputTypes::Missing(missing),
                receiver_class: None,
                model_ref: by.model_ref.clone(),
                hyperparams: by.hyperparams.iter().cloned().collect(),
                type_explanations: explanations,
            })
        }
    }
}

// ── Canonical JSON serialization ──

fn literal_to_json(lit: &Literal) -> JsonValue {
    match lit {
        Literal::Int(v) => json!(v),
        Literal::Float(v) => json!(v),
        Literal::Str(s) => json!(s),
        Literal::Bool(b) => json!(b),
    }
}

fn slots_to_json(slots: &[(String, TypeExpr)]) -> JsonValue {
    JsonValue::Array(
        slots
            .iter()
            .map(|(name, ty)| json!({ "name": name, "type": ty.to_string() }))
            .collect(),
    )
}

fn entry_to_json(entry: &MtirEntry) -> JsonValue {
    let outputs = match &entry.outputs {
        OutputTypes::Return(ty) => vec![("return".to_string(), ty.clone())],
        OutputTypes::Missing(missing) => missing.clone(),
    };
    let hyperparams: JsonMap<String, JsonValue> =
        entry.hyperparams.iter().map(|(k, v)| (k.clone(), literal_to_json(v))).collect();
    let types: Vec<JsonValue> = entry
        .type_explanations
        .iter()
        .map(|schema| json!({ "name": schema.name, "fields": slots_to_json(&schema.fields) }))
        .collect();
    json!({
        "kind": entry.kind.as_str(),
        "subject": entry.subject,
        "params": slots_to_json(&entry.params),
        "outputs": slots_to_json(&outputs),
        "receiver": entry.receiver_class,
        "model": entry.model_ref,
        "hyperparams": hyperparams,
        "types": types,
    })
}

/// Canonical serialized form: sorted keys, fixed field order, two-space
/// indentation, trailing newline. Byte-equal across runs for equal maps.
pub fn serialize_mtir(map: &MtirMap) -> Vec<u8> {
    let entries: JsonMap<String, JsonValue> =
        map.entries.iter().map(|(id, entry)| (id.clone(), entry_to_json(entry))).collect();
    let doc = json!({ "entries": entries });
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("in-memory maps serialize");
    bytes.push(b'\n');
    bytes
}

fn format_err(offset: usize, message: impl Into<String>) -> MtirError {
    MtirError::Format { offset, message: message.into() }
}

fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    let mut remaining = line.saturating_sub(1);
    let mut offset = 0;
    for (i, b) in input.iter().enumerate() {
        if remaining == 0 {
            return i + column.saturating_sub(1);
        }
        if *b == b'\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    offset
}

fn expect_str(value: &JsonValue, what: &str) -> Result<String, MtirError> {
    value.as_str().map(str::to_string).ok_or_else(|| format_err(0, format!("{what} must be a string")))
}

fn parse_slot_list(value: &JsonValue, what: &str) -> Result<Vec<(String, TypeExpr)>, MtirError> {
    let items = value.as_array().ok_or_else(|| format_err(0, format!("{what} must be an array")))?;
    let mut slots = Vec::with_capacity(items.len());
    for item in items {
        let name = expect_str(item.get("name").unwrap_or(&JsonValue::Null), &format!("{what}[].name"))?;
        let ty_text = expect_str(item.get("type").unwrap_or(&JsonValue::Null), &format!("{what}[].type"))?;
        let ty = parse_type_str(&ty_text)
            .map_err(|e| format_err(0, format!("{what}[].type `{ty_text}` is not a type: {e}")))?;
        slots.push((name, ty));
    }
    Ok(slots)
}

fn json_to_literal(value: &JsonValue, what: &str) -> Result<Literal, MtirError> {
    match value {
        JsonValue::Bool(b) => Ok(Literal::Bool(*b)),
        JsonValue::String(s) => Ok(Literal::Str(s.clone())),
        JsonValue::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Literal::Int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(Literal::Float(f))
            } else {
                Err(format_err(0, format!("{what} is out of range")))
            }
        }
        _ => Err(format_err(0, format!("{what} must be a literal"))),
    }
}

pub fn deserialize_mtir(bytes: &[u8]) -> Result<MtirMap, MtirError> {
    let doc: JsonValue = serde_json::from_slice(bytes).map_err(|e| {
        format_err(byte_offset(bytes, e.line(), e.column()), format!("invalid JSON: {e}"))
    })?;
    let entries = doc
        .get("entries")
        .and_then(JsonValue::as_object)
        .ok_or_else(|| format_err(0, "document must have an `entries` object"))?;
    let mut map = MtirMap::default();
    for (site_id, entry) in entries {
        let kind = match expect_str(entry.get("kind").unwrap_or(&JsonValue::Null), "kind")?.as_str() {
            "function" => CallSiteKind::FunctionDef,
            "method" => CallSiteKind::MethodDef,
            "init" => CallSiteKind::ObjectInit,
            other => return Err(format_err(0, format!("unknown kind `{other}`"))),
        };
        let subject = expect_str(entry.get("subject").unwrap_or(&JsonValue::Null), "subject")?;
        let params = parse_slot_list(entry.get("params").unwrap_or(&JsonValue::Null), "params")?;
        let output_slots = parse_slot_list(entry.get("outputs").unwrap_or(&JsonValue::Null), "outputs")?;
        let outputs = match kind {
            CallSiteKind::FunctionDef | CallSiteKind::MethodDef => {
                let [(name, ty)] = output_slots.as_slice() else {
                    return Err(format_err(0, "function/method entries carry exactly one output"));
                };
                if name != "return" {
                    return Err(format_err(0, "function/method output must be named `return`"));
                }
                OutputTypes::Return(ty.clone())
            }
            CallSiteKind::ObjectInit => OutputTypes::Missing(output_slots),
        };
        let receiver_class = match entry.get("receiver") {
            None | Some(JsonValue::Null) => None,
            Some(v) => Some(expect_str(v, "receiver")?),
        };
        let model_ref = expect_str(entry.get("model").unwrap_or(&JsonValue::Null), "model")?;
        let hyper_obj = entry
            .get("hyperparams")
            .and_then(JsonValue::as_object)
            .ok_or_else(|| format_err(0, "hyperparams must be an object"))?;
        let mut hyperparams = BTreeMap::new();
        for (name, v) in hyper_obj {
            hyperparams.insert(name.clone(), json_to_literal(v, &format!("hyperparams.{name}"))?);
        }
        let types = entry
            .get("types")
            .and_then(JsonValue::as_array)
            .ok_or_else(|| format_err(0, "types must be an array"))?;
        let mut type_explanations = Vec::with_capacity(types.len());
        for schema in types {
            let name = expect_str(schema.get("name").unwrap_or(&JsonValue::Null), "types[].name")?;
            let fields = parse_slot_list(schema.get("fields").unwrap_or(&JsonValue::Null), "types[].fields")?;
            type_explanations.push(TypeSchema { name, fields });
        }
        map.entries.insert(
            site_id.clone(),
            MtirEntry {
                site_id: site_id.clone(),
                kind,
                subject,
                params,
                outputs,
                receiver_class,
                model_ref,
                hyperparams,
                type_explanations,
            },
        );
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_program_with, MapResolver};
    use crate::registry::build_registry;

    fn load(sources: &[(&str, &str)]) -> (Vec<ModuleAst>, SemanticRegistry) {
        let mut resolver = MapResolver::new();
        for (name, src) in sources {
            resolver = resolver.with(*name, *src);
        }
        let modules = parse_program_with(sources[0].0, &resolver).unwrap();
        let registry = build_registry(&modules).unwrap();
        (modules, registry)
    }

    fn fixture_dir() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
    }

    fn load_fixture(entry: &str) -> (Vec<ModuleAst>, SemanticRegistry) {
        let modules = crate::frontend::parse_program(&fixture_dir().join(entry)).unwrap();
        let registry = build_registry(&modules).unwrap();
        (modules, registry)
    }

    #[test]
    fn function_fixture_yields_one_function_site() {
        let (modules, _) = load(&[("m", "def get_next_level(prev: int) -> int by llm")]);
        let sites = collect_by_callsites(&modules);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].kind, CallSiteKind::FunctionDef);
        assert!(matches!(sites[0].node, CallSiteNode::Function(f) if f.name == "get_next_level"));
    }

    #[test]
    fn init_fixture_yields_one_init_site() {
        let (modules, _) =
            load(&[("m", "class Person { name: str\ndob: str }\nlet e = Person(\"Einstein\") by llm")]);
        let sites = collect_by_callsites(&modules);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].kind, CallSiteKind::ObjectInit);
    }

    #[test]
    fn program_without_by_yields_no_sites() {
        let (modules, _) = load(&[("m", "def f(x: int) -> int { return x }\nprint(f(1))")]);
        assert!(collect_by_callsites(&modules).is_empty());
    }

    #[test]
    fn extraction_covers_game_closure_in_order() {
        let (_, registry) = load_fixture("game/game.mtp");
        let mut visited = BTreeSet::new();
        let schemas =
            extract_type_definition(&TypeExpr::named("Level"), "game", &registry, &mut visited).unwrap();
        let names: Vec<&str> = schemas.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["Level", "Map", "Wall", "Position"]);
    }

    #[test]
    fn extraction_of_primitive_is_empty() {
        let (_, registry) = load(&[("m", "let x = 1")]);
        let mut visited = BTreeSet::new();
        let schemas = extract_type_definition(
            &TypeExpr::Primitive(crate::frontend::ast::Primitive::Int),
            "m",
            &registry,
            &mut visited,
        )
        .unwrap();
        assert!(schemas.is_empty());
    }

    #[test]
    fn self_referential_class_extracts_once() {
        let (_, registry) = load(&[("m", "class Node { value: int\nnext: Node }")]);
        let mut visited = BTreeSet::new();
        let schemas =
            extract_type_definition(&TypeExpr::named("Node"), "m", &registry, &mut visited).unwrap();
        assert_eq!(schemas.len(), 1);
        assert_eq!(schemas[0].name, "Node");
    }

    #[test]
    fn three_cycle_extracts_each_once() {
        let (_, registry) = load(&[("m", "class A { b: B }\nclass B { c: C }\nclass C { a: A }")]);
        let mut visited = BTreeSet::new();
        let schemas = extract_type_definition(&TypeExpr::named("A"), "m", &registry, &mut visited).unwrap();
        let names: Vec<&str> = schemas.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["A", "B", "C"]);
    }

    #[test]
    fn game_entry_matches_signature_shapes() {
        let (modules, registry) = load_fixture("game/game.mtp");
        let mtir = build_mtir(&modules, &registry).unwrap();
        assert_eq!(mtir.len(), 1);
        let entry = mtir.entries.values().next().unwrap();
        assert_eq!(entry.kind, CallSiteKind::FunctionDef);
        assert_eq!(entry.subject, "get_next_level");
        assert_eq!(entry.params.len(), 1);
        assert_eq!(entry.params[0].0, "prev_levels");
        assert_eq!(entry.params[0].1.to_string(), "list[Level]");
        assert!(matches!(&entry.outputs, OutputTypes::Return(t) if t.to_string() == "Level"));
        let names: Vec<&str> = entry.type_explanations.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["Level", "Map", "Wall", "Position"]);
        assert_eq!(entry.model_ref, "llm");
    }

    #[test]
    fn person_init_entry_splits_provided_and_missing() {
        let (modules, registry) = load_fixture("person_init.mtp");
        let mtir = build_mtir(&modules, &registry).unwrap();
        let entry = mtir.entries.values().next().unwrap();
        assert_eq!(entry.kind, CallSiteKind::ObjectInit);
        assert_eq!(entry.subject, "Person");
        assert_eq!(entry.params, vec![("name".to_string(), TypeExpr::Primitive(crate::frontend::ast::Primitive::Str))]);
        assert_eq!(
            entry.outputs,
            OutputTypes::Missing(vec![("dob".to_string(), TypeExpr::Primitive(crate::frontend::ast::Primitive::Str))])
        );
        let names: Vec<&str> = entry.type_explanations.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["Person"]);
    }

    #[test]
    fn method_entry_carries_receiver_closure() {
        let (modules, registry) = load_fixture("person_method.mtp");
        let mtir = build_mtir(&modules, &registry).unwrap();
        let entry = mtir.entries.values().next().unwrap();
        assert_eq!(entry.kind, CallSiteKind::MethodDef);
        assert_eq!(entry.subject, "Person.calculate_age");
        assert_eq!(entry.receiver_class.as_deref(), Some("Person"));
        assert_eq!(entry.params[0].0, "cur_year");
        assert!(matches!(&entry.outputs, OutputTypes::Return(t) if t.to_string() == "int"));
        let names: Vec<&str> = entry.type_explanations.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["Person"]);
        assert_eq!(entry.hyperparams.get("temperature"), Some(&Literal::Float(0.7)));
    }

    #[test]
    fn init_with_all_fields_provided_is_rejected() {
        let (modules, registry) =
            load(&[("m", "class P { a: int\nb: int }\nlet x = P(1, 2) by llm")]);
        assert!(matches!(build_mtir(&modules, &registry), Err(MtirError::InitNotPartial { .. })));
    }

    #[test]
    fn by_on_function_call_is_rejected() {
        let (modules, registry) =
            load(&[("m", "def f(x: int) -> int { return x }\nlet y = f(1) by llm")]);
        assert!(matches!(build_mtir(&modules, &registry), Err(MtirError::ByOnFunctionCall { .. })));
    }

    #[test]
    fn serialization_round_trips_and_is_canonical() {
        for fixture in ["game/game.mtp", "person_init.mtp", "person_method.mtp", "calc_age.mtp"] {
            let (modules, registry) = load_fixture(fixture);
            let mtir = build_mtir(&modules, &registry).unwrap();
            let bytes_a = serialize_mtir(&mtir);
            let bytes_b = serialize_mtir(&build_mtir(&modules, &registry).unwrap());
            assert_eq!(bytes_a, bytes_b, "{fixture}: two builds serialize byte-equal");
            let back = deserialize_mtir(&bytes_a).unwrap();
            assert_eq!(back, mtir, "{fixture}: deserialize(serialize(m)) == m");
        }
    }

    #[test]
    fn empty_map_serializes_to_canonical_empty_document() {
        let bytes = serialize_mtir(&MtirMap::default());
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), "{\n  \"entries\": {}\n}\n");
        assert_eq!(deserialize_mtir(&bytes).unwrap(), MtirMap::default());
    }

    #[test]
    fn truncated_document_reports_offset() {
        let (modules, registry) = load_fixture("person_init.mtp");
        let mtir = build_mtir(&modules, &registry).unwrap();
        let mut bytes = serialize_mtir(&mtir);
        bytes.truncate(bytes.len() / 2);
        match deserialize_mtir(&bytes) {
            Err(MtirError::Format { offset, .. }) => assert!(offset > 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn closure_is_sound_for_every_fixture_entry() {
        fn named_mentions(ty: &TypeExpr, out: &mut Vec<String>) {
            match ty {
                TypeExpr::Primitive(_) => {}
                TypeExpr::Named { name, .. } => out.push(name.clone()),
                TypeExpr::ListOf(el) => named_mentions(el, out),
                TypeExpr::MapOf(k, v) => {
                    named_mentions(k, out);
                    named_mentions(v, out);
                }
            }
        }
        for fixture in ["game/game.mtp", "person_init.mtp", "person_method.mtp", "calc_age.mtp"] {
            let (modules, registry) = load_fixture(fixture);
            let mtir = build_mtir(&modules, &registry).unwrap();
            for entry in mtir.entries.values() {
                let mut mentioned = Vec::new();
                for (_, ty) in &entry.params {
                    named_mentions(ty, &mut mentioned);
                }
                match &entry.outputs {
                    OutputTypes::Return(ty) => named_mentions(ty, &mut mentioned),
                    OutputTypes::Missing(missing) => {
                        for (_, ty) in missing {
                            named_mentions(ty, &mut mentioned);
                        }
                    }
                }
                if let Some(receiver) = &entry.receiver_class {
                    mentioned.push(receiver.clone());
                }
                for name in mentioned {
                    assert!(
                        entry.schema(&name).is_some(),
                        "{fixture}: `{name}` is mentioned in the signature of {} but missing from its closure",
                        entry.site_id
                    );
                }
            }
        }
    }

    #[test]
    fn game_fixture_matches_golden_serialization() {
        let (modules, registry) = load_fixture("game/game.mtp");
        let mtir = build_mtir(&modules, &registry).unwrap();
        let bytes = serialize_mtir(&mtir);
        let golden_path = fixture_dir().join("mtir/game.json");
        if std::env::var_os("UPDATE_GOLDENS").is_some() {
            std::fs::create_dir_all(golden_path.parent().unwrap()).unwrap();
            std::fs::write(&golden_path, &bytes).unwrap();
        }
        let golden = std::fs::read(&golden_path)
            .expect("golden MT-IR file exists (set UPDATE_GOLDENS=1 to regenerate)");
        assert_eq!(bytes, golden, "serialized MT-IR drifted from the reviewed golden");
    }
}
