//! Runtime value universe shared by the interpreter, prompt renderer, and
//! output parser.
//!
//! [`render_value`] emits the constructor-expression text format, the
//! bit-exact contract between prompt output instructions and the output
//! parser: primitives as literals, lists as `[..]`, maps as `{k: v, ..}` in
//! insertion order, objects as `ClassName(field=value, ..)` in declared
//! field order.

use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::frontend::ast::{Primitive, TypeExpr};
use crate::frontend::{print_literal, quote_str};
use crate::frontend::ast::Literal;
use crate::registry::SemanticRegistry;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    List(Vec<Value>),
    Map(Vec<(Value, Value)>),
    Object { class: String, fields: IndexMap<String, Value> },
}

impl Value {
    pub fn object(class: impl Into<String>, fields: IndexMap<String, Value>) -> Value {
        Value::Object { class: class.into(), fields }
    }

    /// Short description used in diagnostics.
    pub fn summary(&self) -> String {
        match self {
            Value::Int(v) => format!("int {v}"),
            Value::Float(v) => format!("float {v:?}"),
            Value::Str(s) => {
                let mut short: String = s.chars().take(24).collect();
                if s.chars().count() > 24 {
                    short.push('…');
                }
                format!("str {}", quote_str(&short))
            }
            Value::Bool(b) => format!("bool {b}"),
            Value::List(items) => format!("list of {} elements", items.len()),
            Value::Map(pairs) => format!("map of {} entries", pairs.len()),
            Value::Object { class, .. } => format!("object {class}"),
        }
    }
}

impl From<&Literal> for Value {
    fn from(lit: &Literal) -> Value {
        match lit {
            Literal::Int(v) => Value::Int(*v),
            Literal::Float(v) => Value::Float(*v),
            Literal::Str(s) => Value::Str(s.clone()),
            Literal::Bool(b) => Value::Bool(*b),
        }
    }
}

/// Source of class field definitions for structural checks. Implemented by
/// the registry (compile side) and by MT-IR entries (runtime side, which
/// must not touch the source program).
pub trait TypeDefs {
    fn class_fields(&self, class: &str) -> Option<&[(String, TypeExpr)]>;
}

/// Registry-backed [`TypeDefs`] resolving names from one module's viewpoint.
pub struct ModuleView<'r> {
    pub registry: &'r SemanticRegistry,
    pub module: &'r str,
}

impl TypeDefs for ModuleView<'_> {
    fn class_fields(&self, class: &str) -> Option<&[(String, TypeExpr)]> {
        let def = self.registry.resolve_class(self.module, class)?;
        self.registry.class_fields(&def.id)
    }
}

/// Fixed table of class schemas; handy for tests and detached checks.
#[derive(Debug, Clone, Default)]
pub struct StaticTypeDefs {
    classes: BTreeMap<String, Vec<(String, TypeExpr)>>,
}

impl StaticTypeDefs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_class(mut self, name: impl Into<String>, fields: Vec<(String, TypeExpr)>) -> Self {
        self.classes.insert(name.into(), fields);
        self
    }
}

impl TypeDefs for StaticTypeDefs {
    fn class_fields(&self, class: &str) -> Option<&[(String, TypeExpr)]> {
        self.classes.get(class).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub path: String,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeCheckReport {
    pub ok: bool,
    pub mismatches: Vec<Mismatch>,
}

impl TypeCheckReport {
    fn from_mismatches(mismatches: Vec<Mismatch>) -> Self {
        TypeCheckReport { ok: mismatches.is_empty(), mismatches }
    }

    pub fn first(&self) -> Option<&Mismatch> {
        self.mismatches.first()
    }
}

/// Structural check of `value` against `expected`. Primitives check by tag
/// (no int/float coercion), lists and maps element-wise, objects by class
/// name and recursive field checks against the declared schema.
pub fn check_type(value: &Value, expected: &TypeExpr, defs: &dyn TypeDefs) -> TypeCheckReport {
    let mut mismatches = Vec::new();
    check_at(value, expected, defs, "$", &mut mismatches);
    TypeCheckReport::from_mismatches(mismatches)
}

fn push(mismatches: &mut Vec<Mismatch>, path: &str, expected: impl Into<String>, found: impl Into<String>) {
    mismatches.push(Mismatch { path: path.to_string(), expected: expected.into(), found: found.into() });
}

fn check_at(value: &Value, expected: &TypeExpr, defs: &dyn TypeDefs, path: &str, out: &mut Vec<Mismatch>) {
    match expected {
        TypeExpr::Primitive(p) => {
            let matches = matches!(
                (p, value),
                (Primitive::Int, Value::Int(_))
                    | (Primitive::Float, Value::Float(_))
                    | (Primitive::Str, Value::Str(_))
                    | (Primitive::Bool, Value::Bool(_))
            );
            if !matches {
                push(out, path, p.as_str(), value.summary());
            }
        }
        TypeExpr::Named { name, .. } => match defs.class_fields(name) {
            None => push(out, path, format!("{name} (no class definition in scope)"), value.summary()),
            Some(declared) => match value {
                Value::Object { class, fields } if class == name => {
                    for (field_name, field_ty) in declared {
                        let field_path = format!("{path}.{field_name}");
                        match fields.get(field_name) {
                            Some(fv) => check_at(fv, field_ty, defs, &field_path, out),
                            None => push(out, &field_path, format!("{field_name}: {field_ty}"), "missing field"),
                        }
                    }
                    for key in fields.keys() {
                        if !declared.iter().any(|(n, _)| n == key) {
                            push(out, &format!("{path}.{key}"), format!("no field `{key}` in {name}"), fields[key].summary());
                        }
                    }
                }
                other => push(out, path, name.clone(), other.summary()),
            },
        },
        TypeExpr::ListOf(el) => match value {
            Value::List(items) => {
                for (i, item) in items.iter().enumerate() {
                    check_at(item, el, defs, &format!("{path}[{i}]"), out);
                }
            }
            other => push(out, path, format!("list[{el}]"), other.summary()),
        },
        TypeExpr::MapOf(k, v) => match value {
            Value::Map(pairs) => {
                for (i, (mk, mv)) in pairs.iter().enumerate() {
                    check_at(mk, k, defs, &format!("{path}.key({i})"), out);
                    check_at(mv, v, defs, &format!("{path}.value({i})"), out);
                }
            }
            other => push(out, path, format!("map[{k},{v}]"), other.summary()),
        },
    }
}

/// Deterministic constructor-expression text for a value.
pub fn render_value(value: &Value) -> String {
    match value {
        Value::Int(v) => v.to_string(),
        Value::Float(v) => print_literal(&Literal::Float(*v)),
        Value::Str(s) => quote_str(s),
        Value::Bool(b) => b.to_string(),
        Value::List(items) => {
            let inner: Vec<String> = items.iter().map(render_value).collect();
            format!("[{}]", inner.join(", "))
        }
        Value::Map(pairs) => {
            let inner: Vec<String> =
                pairs.iter().map(|(k, v)| format!("{}: {}", render_value(k), render_value(v))).collect();
            format!("{{{}}}", inner.join(", "))
        }
        Value::Object { class, fields } => {
            let inner: Vec<String> = fields.iter().map(|(name, v)| format!("{name}={}", render_value(v))).collect();
            format!("{class}({})", inner.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use indexmap::indexmap;

    fn person_defs() -> StaticTypeDefs {
        StaticTypeDefs::new().with_class(
            "Person",
            vec![
                ("name".to_string(), TypeExpr::Primitive(Primitive::Str)),
                ("dob".to_string(), TypeExpr::Primitive(Primitive::Str)),
            ],
        )
    }

    fn einstein() -> Value {
        Value::object(
            "Person",
            indexmap! {
                "name".to_string() => Value::Str("Albert Einstein".into()),
                "dob".to_string() => Value::Str("03/14/1879".into()),
            },
        )
    }

    #[test]
    fn complete_object_checks_ok() {
        let report = check_type(&einstein(), &TypeExpr::named("Person"), &person_defs());
        assert!(report.ok, "{:?}", report.mismatches);
    }

    #[test]
    fn primitive_tag_mismatch_at_root() {
        let report = check_type(&Value::Int(5), &TypeExpr::Primitive(Primitive::Str), &person_defs());
        assert!(!report.ok);
        assert_eq!(report.mismatches[0].path, "$");
        assert_eq!(report.mismatches[0].expected, "str");
    }

    #[test]
    fn list_element_mismatch_carries_index_path() {
        let value = Value::List(vec![Value::Int(1), Value::Str("a".into())]);
        let report = check_type(&value, &TypeExpr::list_of(TypeExpr::Primitive(Primitive::Int)), &person_defs());
        assert!(!report.ok);
        assert_eq!(report.mismatches[0].path, "$[1]");
    }

    #[test]
    fn missing_and_extra_fields_reported() {
        let partial = Value::object("Person", indexmap! { "name".to_string() => Value::Str("E".into()) });
        let report = check_type(&partial, &TypeExpr::named("Person"), &person_defs());
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].path, "$.dob");
        assert_eq!(report.mismatches[0].found, "missing field");

        let extra = Value::object(
            "Person",
            indexmap! {
                "name".to_string() => Value::Str("E".into()),
                "dob".to_string() => Value::Str("d".into()),
                "age".to_string() => Value::Int(5),
            },
        );
        let report = check_type(&extra, &TypeExpr::named("Person"), &person_defs());
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].path, "$.age");
    }

    #[test]
    fn int_is_not_float() {
        let report = check_type(&Value::Int(1), &TypeExpr::Primitive(Primitive::Float), &person_defs());
        assert!(!report.ok);
    }

    #[test]
    fn renders_primitives_and_composites() {
        assert_eq!(render_value(&Value::Int(145)), "145");
        assert_eq!(render_value(&Value::Float(2.0)), "2.0");
        assert_eq!(render_value(&Value::Bool(true)), "true");
        assert_eq!(render_value(&Value::Str("a\"b".into())), r#""a\"b""#);
        assert_eq!(
            render_value(&einstein()),
            r#"Person(name="Albert Einstein", dob="03/14/1879")"#
        );
        let positions = Value::List(vec![
            Value::object("Position", indexmap! { "x".to_string() => Value::Int(0), "y".to_string() => Value::Int(1) }),
            Value::object("Position", indexmap! { "x".to_string() => Value::Int(2), "y".to_string() => Value::Int(3) }),
        ]);
        assert_eq!(render_value(&positions), "[Position(x=0, y=1), Position(x=2, y=3)]");
        let map = Value::Map(vec![(Value::Str("k".into()), Value::Int(1))]);
        assert_eq!(render_value(&map), r#"{"k": 1}"#);
    }

    #[test]
    fn unknown_class_reported_with_stable_text() {
        let v = Value::object("Ghost", indexmap! {});
        let report = check_type(&v, &TypeExpr::named("Ghost"), &person_defs());
        assert!(!report.ok);
        assert!(report.mismatches[0].expected.contains("no class definition"));
    }

    #[test]
    fn registry_backed_defs_resolve_through_imports() {
        use crate::frontend::{parse_program_with, MapResolver};
        use crate::registry::build_registry;
        let resolver = MapResolver::new()
            .with("main", "import people\nlet p = Person(\"a\", \"b\")")
            .with("people", "class Person { name: str\ndob: str }");
        let modules = parse_program_with("main", &resolver).unwrap();
        let registry = build_registry(&modules).unwrap();
        let defs = ModuleView { registry: &registry, module: "main" };
        assert!(check_type(&einstein(), &TypeExpr::named("Person"), &defs).ok);
        // The defining module sees its own class too.
        let defs = ModuleView { registry: &registry, module: "people" };
        assert_eq!(defs.class_fields("Person").unwrap().len(), 2);
        // A module with no route to the class cannot see it.
        let defs = ModuleView { registry: &registry, module: "elsewhere" };
        assert!(defs.class_fields("Person").is_none());
    }
}
