//! Codebase-wide semantic registry: every definition a symbol table would
//! hold, plus usage links back to definitions.
//!
//! Name resolution order is fixed: lexical scope, then module scope, then
//! imports in declaration order. A local definition shadows an imported one.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::frontend::ast::{
    Arg, Block, ClassDecl, Expr, FuncDecl, Literal, ModuleAst, Primitive, Span, Stmt, TypeExpr,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SymbolKind {
    Class,
    Function,
    Method,
    Field,
    Variable,
}

impl SymbolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SymbolKind::Class => "class",
            SymbolKind::Function => "function",
            SymbolKind::Method => "method",
            SymbolKind::Field => "field",
            SymbolKind::Variable => "variable",
        }
    }
}

/// Identity of a definition. Methods and fields are qualified with their
/// owner class (`Person.dob`); function-local variables with their owner
/// function (`get_next_level.prev_levels`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymbolId {
    pub module: String,
    pub name: String,
    pub kind: SymbolKind,
}

impl SymbolId {
    pub fn new(module: impl Into<String>, name: impl Into<String>, kind: SymbolKind) -> Self {
        SymbolId { module: module.into(), name: name.into(), kind }
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{} ({})", self.module, self.name, self.kind.as_str())
    }
}

/// What a definition declares: a class, a typed slot, or a callable signature.
#[derive(Debug, Clone, PartialEq)]
pub enum DeclaredType {
    Class,
    Slot(TypeExpr),
    Signature { params: Vec<(String, TypeExpr)>, ret: TypeExpr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub id: SymbolId,
    pub declared_type: DeclaredType,
    pub source_loc: (u32, u32),
}

/// Where a name was used.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UseLoc {
    pub module: String,
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("name error in `{module}` at {line}:{column}: cannot resolve `{name}`")]
    Name { name: String, module: String, line: u32, column: u32 },

    #[error("duplicate definition in `{module}` at {line}:{column}: `{name}` is already defined")]
    Duplicate { name: String, module: String, line: u32, column: u32 },

    #[error("cannot infer a static type for `{name}` in `{module}` at {line}:{column} (annotate by initializing from a typed expression)")]
    CannotInfer { name: String, module: String, line: u32, column: u32 },
}

/// A fully resolved type: primitives are leaves, named types point at class
/// definitions, lists and maps wrap resolved elements.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedType {
    Primitive(Primitive),
    Class(SymbolId),
    List(Box<ResolvedType>),
    Map(Box<ResolvedType>, Box<ResolvedType>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SemanticRegistry {
    pub definitions: BTreeMap<SymbolId, Definition>,
    pub usages: Vec<(UseLoc, SymbolId)>,
    class_fields: BTreeMap<SymbolId, Vec<(String, TypeExpr)>>,
    module_imports: BTreeMap<String, Vec<String>>,
}

impl SemanticRegistry {
    /// Ordered `(field name, type)` list of a class, in declaration order.
    pub fn class_fields(&self, class: &SymbolId) -> Option<&[(String, TypeExpr)]> {
        self.class_fields.get(class).map(|v| v.as_slice())
    }

    /// Convenience lookup by plain class name; scans modules in order and is
    /// intended for tests and single-definition programs.
    pub fn class_fields_by_name(&self, name: &str) -> Option<&[(String, TypeExpr)]> {
        self.class_fields
            .iter()
            .find(|(id, _)| id.name == name)
            .map(|(_, fields)| fields.as_slice())
    }

    /// Resolves a class or function name from `from_module`: module scope
    /// first, then imports in declaration order.
    pub fn resolve_item(&self, from_module: &str, name: &str) -> Option<&Definition> {
        let candidates = [SymbolKind::Class, SymbolKind::Function];
        for kind in candidates {
            let id = SymbolId::new(from_module, name, kind);
            if let Some(def) = self.definitions.get(&id) {
                return Some(def);
            }
        }
        for import in self.module_imports.get(from_module).map(|v| v.as_slice()).unwrap_or(&[]) {
            for kind in candidates {
                let id = SymbolId::new(import.clone(), name, kind);
                if let Some(def) = self.definitions.get(&id) {
                    return Some(def);
                }
            }
        }
        None
    }

    pub fn resolve_class(&self, from_module: &str, name: &str) -> Option<&Definition> {
        self.resolve_item(from_module, name).filter(|d| d.id.kind == SymbolKind::Class)
    }

    pub fn method(&self, class: &SymbolId, name: &str) -> Option<&Definition> {
        let id = SymbolId::new(class.module.clone(), format!("{}.{name}", class.name), SymbolKind::Method);
        self.definitions.get(&id)
    }

    /// Resolves a type expression from the viewpoint of `from_module`.
    pub fn lookup_type(&self, from_module: &str, ty: &TypeExpr) -> Result<ResolvedType, RegistryError> {
        match ty {
            TypeExpr::Primitive(p) => Ok(ResolvedType::Primitive(*p)),
            TypeExpr::Named { name, span } => {
                let def = self.resolve_class(from_module, name).ok_or_else(|| RegistryError::Name {
                    name: name.clone(),
                    module: from_module.to_string(),
                    line: span.line,
                    column: span.column,
                })?;
                Ok(ResolvedType::Class(def.id.clone()))
            }
            TypeExpr::ListOf(el) => Ok(ResolvedType::List(Box::new(self.lookup_type(from_module, el)?))),
            TypeExpr::MapOf(k, v) => Ok(ResolvedType::Map(
                Box::new(self.lookup_type(from_module, k)?),
                Box::new(self.lookup_type(from_module, v)?),
            )),
        }
    }
}

pub fn build_registry(modules: &[ModuleAst]) -> Result<SemanticRegistry, RegistryError> {
    let mut registry = SemanticRegistry::default();
    for module in modules {
        registry.module_imports.insert(module.name.clone(), module.imports.clone());
    }
    // Pass 1: definitions.
    for module in modules {
        for class in module.classes() {
            define_class(&mut registry, &module.name, class)?;
        }
        for func in module.functions() {
            define_func(&mut registry, &module.name, func, None)?;
        }
    }
    // Pass 2: walk bodies and top-level statements, linking usages.
    let mut walker = Walker { registry: &mut registry };
    for module in modules {
        walker.walk_module(module)?;
    }
    Ok(registry)
}

fn insert_def(registry: &mut SemanticRegistry, def: Definition) -> Result<(), RegistryError> {
    let (line, column) = def.source_loc;
    match registry.definitions.insert(def.id.clone(), def) {
        None => Ok(()),
        Some(previous) => Err(RegistryError::Duplicate {
            name: previous.id.name.clone(),
            module: previous.id.module.clone(),
            line,
            column,
        }),
    }
}

fn define_class(registry: &mut SemanticRegistry, module: &str, class: &ClassDecl) -> Result<(), RegistryError> {
    let class_id = SymbolId::new(module, class.name.clone(), SymbolKind::Class);
    insert_def(
        registry,
        Definition {
            id: class_id.clone(),
            declared_type: DeclaredType::Class,
            source_loc: (class.span.line, class.span.column),
        },
    )?;
    registry
        .class_fields
        .insert(class_id.clone(), class.fields.iter().map(|f| (f.name.clone(), f.ty.clone())).collect());
    for field in &class.fields {
        insert_def(
            registry,
            Definition {
                id: SymbolId::new(module, format!("{}.{}", class.name, field.name), SymbolKind::Field),
                declared_type: DeclaredType::Slot(field.ty.clone()),
                source_loc: (field.span.line, field.span.column),
            },
        )?;
    }
    for method in &class.methods {
        define_func(registry, module, method, Some(&class.name))?;
    }
    Ok(())
}

fn define_func(
    registry: &mut SemanticRegistry,
    module: &str,
    func: &FuncDecl,
    owner_class: Option<&str>,
) -> Result<(), RegistryError> {
    let (qualified, kind) = match owner_class {
        Some(class) => (format!("{class}.{}", func.name), SymbolKind::Method),
        None => (func.name.clone(), SymbolKind::Function),
    };
    insert_def(
        registry,
        Definition {
            id: SymbolId::new(module, qualified.clone(), kind),
            declared_type: DeclaredType::Signature {
                params: func.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect(),
                ret: func.return_type.clone(),
            },
            source_loc: (func.span.line, func.span.column),
        },
    )?;
    for param in &func.params {
        insert_def(
            registry,
            Definition {
                id: SymbolId::new(module, format!("{qualified}.{}", param.name), SymbolKind::Variable),
                declared_type: DeclaredType::Slot(param.ty.clone()),
                source_loc: (param.span.line, param.span.column),
            },
        )?;
    }
    Ok(())
}

/// One lexical scope level: variable name -> (definition id, resolved type).
type Scope = BTreeMap<String, (SymbolId, ResolvedType)>;

struct Walker<'r> {
    registry: &'r mut SemanticRegistry,
}

impl Walker<'_> {
    fn walk_module(&mut self, module: &ModuleAst) -> Result<(), RegistryError> {
        for class in module.classes() {
            for field in &class.fields {
                self.walk_type(&module.name, &field.ty)?;
            }
            for method in &class.methods {
                self.walk_func(module, method, Some(&class.name))?;
            }
        }
        for func in module.functions() {
            self.walk_func(module, func, None)?;
        }
        let mut scopes = vec![Scope::new()];
        for stmt in &module.stmts {
            self.walk_stmt(module, stmt, &mut scopes, None)?;
        }
        Ok(())
    }

    fn walk_func(
        &mut self,
        module: &ModuleAst,
        func: &FuncDecl,
        owner_class: Option<&str>,
    ) -> Result<(), RegistryError> {
        let qualified = match owner_class {
            Some(class) => format!("{class}.{}", func.name),
            None => func.name.clone(),
        };
        for param in &func.params {
            self.walk_type(&module.name, &param.ty)?;
        }
        self.walk_type(&module.name, &func.return_type)?;
        if let crate::frontend::ast::FuncBody::Block(block) = &func.body {
            let mut scope = Scope::new();
            for param in &func.params {
                let id = SymbolId::new(&module.name, format!("{qualified}.{}", param.name), SymbolKind::Variable);
                let rty = self.registry.lookup_type(&module.name, &param.ty)?;
                scope.insert(param.name.clone(), (id, rty));
            }
            let mut scopes = vec![scope];
            self.walk_block(module, block, &mut scopes, Some(&qualified))?;
        }
        Ok(())
    }

    fn walk_block(
        &mut self,
        module: &ModuleAst,
        block: &Block,
        scopes: &mut Vec<Scope>,
        owner: Option<&str>,
    ) -> Result<(), RegistryError> {
        scopes.push(Scope::new());
        for stmt in &block.stmts {
            self.walk_stmt(module, stmt, scopes, owner)?;
        }
        scopes.pop();
        Ok(())
    }

    fn walk_stmt(
        &mut self,
        module: &ModuleAst,
        stmt: &Stmt,
        scopes: &mut Vec<Scope>,
        owner: Option<&str>,
    ) -> Result<(), RegistryError> {
        match stmt {
            Stmt::Let { name, value, span } => {
                let rty = self.walk_expr(module, value, scopes)?;
                let Some(rty) = rty else {
                    return Err(RegistryError::CannotInfer {
                        name: name.clone(),
                        module: module.name.clone(),
                        line: span.line,
                        column: span.column,
                    });
                };
                let qualified = match owner {
                    Some(owner) => format!("{owner}.{name}"),
                    None => name.clone(),
                };
                let id = SymbolId::new(&module.name, qualified, SymbolKind::Variable);
                insert_def(
                    self.registry,
                    Definition {
                        id: id.clone(),
                        declared_type: DeclaredType::Slot(type_expr_of(&rty)),
                        source_loc: (span.line, span.column),
                    },
                )?;
                scopes.last_mut().unwrap().insert(name.clone(), (id, rty));
                Ok(())
            }
            Stmt::Expr(expr) | Stmt::Print(expr) | Stmt::Return { value: expr, .. } => {
                self.walk_expr(module, expr, scopes)?;
                Ok(())
            }
            Stmt::If { cond, then_block, else_block } => {
                self.walk_expr(module, cond, scopes)?;
                self.walk_block(module, then_block, scopes, owner)?;
                if let Some(else_block) = else_block {
                    self.walk_block(module, else_block, scopes, owner)?;
                }
                Ok(())
            }
        }
    }

    fn walk_type(&mut self, module: &str, ty: &TypeExpr) -> Result<(), RegistryError> {
        match ty {
            TypeExpr::Primitive(_) => Ok(()),
            TypeExpr::Named { name, span } => {
                let def = self.registry.resolve_class(module, name).ok_or_else(|| RegistryError::Name {
                    name: name.clone(),
                    module: module.to_string(),
                    line: span.line,
                    column: span.column,
                })?;
                let id = def.id.clone();
                self.record_usage(module, *span, id);
                Ok(())
            }
            TypeExpr::ListOf(el) => self.walk_type(module, el),
            TypeExpr::MapOf(k, v) => {
                self.walk_type(module, k)?;
                self.walk_type(module, v)
            }
        }
    }

    fn record_usage(&mut self, module: &str, span: Span, id: SymbolId) {
        self.registry
            .usages
            .push((UseLoc { module: module.to_string(), line: span.line, column: span.column }, id));
    }

    fn name_error(&self, module: &str, span: Span, name: &str) -> RegistryError {
        RegistryError::Name {
            name: name.to_string(),
            module: module.to_string(),
            line: span.line,
            column: span.column,
        }
    }

    /// Records usages inside `expr` and returns its resolved static type,
    /// when one is inferable (empty collection literals have none).
    fn walk_expr(
        &mut self,
        module: &ModuleAst,
        expr: &Expr,
        scopes: &mut Vec<Scope>,
    ) -> Result<Option<ResolvedType>, RegistryError> {
        match expr {
            Expr::Literal(lit) => Ok(Some(ResolvedType::Primitive(literal_primitive(lit)))),
            Expr::Var { name, span } => {
                for scope in scopes.iter().rev() {
                    if let Some((id, rty)) = scope.get(name) {
                        let (id, rty) = (id.clone(), rty.clone());
                        self.record_usage(&module.name, *span, id);
                        return Ok(Some(rty));
                    }
                }
                Err(self.name_error(&module.name, *span, name))
            }
            Expr::ListLit(elements) => {
                let mut element_ty = None;
                for element in elements {
                    let ty = self.walk_expr(module, element, scopes)?;
                    if element_ty.is_none() {
                        element_ty = ty;
                    }
                }
                Ok(element_ty.map(|t| ResolvedType::List(Box::new(t))))
            }
            Expr::MapLit(pairs) => {
                let mut entry_ty = None;
                for (k, v) in pairs {
                    let kt = self.walk_expr(module, k, scopes)?;
                    let vt = self.walk_expr(module, v, scopes)?;
                    if entry_ty.is_none() {
                        entry_ty = kt.zip(vt);
                    }
                }
                Ok(entry_ty.map(|(k, v)| ResolvedType::Map(Box::new(k), Box::new(v))))
            }
            Expr::Call(call) => {
                let def = self
                    .registry
                    .resolve_item(&module.name, &call.callee)
                    .ok_or_else(|| self.name_error(&module.name, call.span, &call.callee))?
                    .clone();
                self.record_usage(&module.name, call.span, def.id.clone());
                match def.id.kind {
                    SymbolKind::Class => {
                        for arg in &call.args {
                            if let Arg::Named(field, _) = arg {
                                let field_id = SymbolId::new(
                                    def.id.module.clone(),
                                    format!("{}.{field}", def.id.name),
                                    SymbolKind::Field,
                                );
                                if !self.registry.definitions.contains_key(&field_id) {
                                    return Err(self.name_error(&module.name, call.span, &format!("{}.{field}", def.id.name)));
                                }
                                self.record_usage(&module.name, call.span, field_id);
                            }
                            self.walk_expr(module, arg.expr(), scopes)?;
                        }
                        Ok(Some(ResolvedType::Class(def.id.clone())))
                    }
                    SymbolKind::Function => {
                        for arg in &call.args {
                            if let Arg::Named(name, _) = arg {
                                return Err(self.name_error(&module.name, call.span, name));
                            }
                            self.walk_expr(module, arg.expr(), scopes)?;
                        }
                        let DeclaredType::Signature { ret, .. } = &def.declared_type else {
                            unreachable!("functions carry signatures");
                        };
                        Ok(Some(self.registry.lookup_type(&def.id.module, ret)?))
                    }
                    _ => unreachable!("resolve_item returns classes and functions only"),
                }
            }
            Expr::MethodCall { recv, method, args, span } => {
                let recv_ty = self.walk_expr(module, recv, scopes)?;
                let Some(ResolvedType::Class(class_id)) = recv_ty else {
                    return Err(self.name_error(&module.name, *span, method));
                };
                let def = self
                    .registry
                    .method(&class_id, method)
                    .ok_or_else(|| self.name_error(&module.name, *span, &format!("{}.{method}", class_id.name)))?
                    .clone();
                self.record_usage(&module.name, *span, def.id.clone());
                for arg in args {
                    self.walk_expr(module, arg, scopes)?;
                }
                let DeclaredType::Signature { ret, .. } = &def.declared_type else {
                    unreachable!("methods carry signatures");
                };
                Ok(Some(self.registry.lookup_type(&def.id.module, ret)?))
            }
            Expr::Attr { recv, name, span } => {
                let recv_ty = self.walk_expr(module, recv, scopes)?;
                let Some(ResolvedType::Class(class_id)) = recv_ty else {
                    return Err(self.name_error(&module.name, *span, name));
                };
                let field_id =
                    SymbolId::new(class_id.module.clone(), format!("{}.{name}", class_id.name), SymbolKind::Field);
                let def = self
                    .registry
                    .definitions
                    .get(&field_id)
                    .ok_or_else(|| self.name_error(&module.name, *span, &format!("{}.{name}", class_id.name)))?
                    .clone();
                self.record_usage(&module.name, *span, field_id);
                let DeclaredType::Slot(ty) = &def.declared_type else {
                    unreachable!("fields carry slot types");
                };
                Ok(Some(self.registry.lookup_type(&def.id.module, ty)?))
            }
            Expr::Neg(operand) => self.walk_expr(module, operand, scopes),
            Expr::Binary { op, lhs, rhs } => {
                let lt = self.walk_expr(module, lhs, scopes)?;
                self.walk_expr(module, rhs, scopes)?;
                use crate::frontend::ast::BinOp::*;
                match op {
                    Add | Sub | Mul | Div => Ok(lt),
                    Eq | Ne | Lt | Le | Gt | Ge => Ok(Some(ResolvedType::Primitive(Primitive::Bool))),
                }
            }
        }
    }
}

fn literal_primitive(lit: &Literal) -> Primitive {
    match lit {
        Literal::Int(_) => Primitive::Int,
        Literal::Float(_) => Primitive::Float,
        Literal::Str(_) => Primitive::Str,
        Literal::Bool(_) => Primitive::Bool,
    }
}

/// Syntactic type corresponding to a resolved type (drops module info).
fn type_expr_of(rty: &ResolvedType) -> TypeExpr {
    match rty {
        ResolvedType::Primitive(p) => TypeExpr::Primitive(*p),
        ResolvedType::Class(id) => TypeExpr::named(id.name.clone()),
        ResolvedType::List(el) => TypeExpr::list_of(type_expr_of(el)),
        ResolvedType::Map(k, v) => TypeExpr::map_of(type_expr_of(k), type_expr_of(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_program_with, MapResolver};

    fn build(sources: &[(&str, &str)]) -> SemanticRegistry {
        try_build(sources).unwrap()
    }

    fn try_build(sources: &[(&str, &str)]) -> Result<SemanticRegistry, RegistryError> {
        let mut resolver = MapResolver::new();
        for (name, src) in sources {
            resolver = resolver.with(*name, *src);
        }
        let modules = parse_program_with(sources[0].0, &resolver).unwrap();
        build_registry(&modules)
    }

    const GAME: &str = "import level\nimport primitives\n\ndef get_next_level(prev_levels: list[Level]) -> Level by llm\n";
    const LEVEL: &str = "import primitives\n\nclass Map {\n  walls: list[Wall]\n  enemies: list[Position]\n  player_pos: Position\n}\n\nclass Level {\n  level_id: int\n  difficulty: int\n  width: int\n  height: int\n  num_wall: int\n  num_enemies: int\n  map: Map\n}\n";
    const PRIMITIVES: &str = "class Position {\n  x: int\n  y: int\n}\n\nclass Wall {\n  start_pos: Position\n  end_pos: Position\n}\n";

    #[test]
    fn game_fixture_level_fields_in_declaration_order() {
        let registry = build(&[("game", GAME), ("level", LEVEL), ("primitives", PRIMITIVES)]);
        let fields = registry.class_fields_by_name("Level").unwrap();
        let names: Vec<&str> = fields.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, vec!["level_id", "difficulty", "width", "height", "num_wall", "num_enemies", "map"]);
        assert_eq!(fields[6].1.to_string(), "Map");
    }

    #[test]
    fn empty_module_list_gives_empty_registry() {
        let registry = build_registry(&[]).unwrap();
        assert!(registry.definitions.is_empty());
        assert!(registry.usages.is_empty());
    }

    #[test]
    fn same_class_name_in_two_modules_resolves_by_import_order() {
        let m1 = "class Level { a: int }";
        let m2 = "class Level { b: str }";
        let registry = build(&[("main", "import m1\nimport m2\nlet x = Level(1)"), ("m1", m1), ("m2", m2)]);
        // Both registered under distinct ids.
        assert!(registry.definitions.contains_key(&SymbolId::new("m1", "Level", SymbolKind::Class)));
        assert!(registry.definitions.contains_key(&SymbolId::new("m2", "Level", SymbolKind::Class)));
        // Unqualified use resolves to the first import that provides it.
        let def = registry.resolve_class("main", "Level").unwrap();
        assert_eq!(def.id.module, "m1");

        let registry = build(&[("main", "import m2\nimport m1\nlet x = Level(\"s\")"), ("m1", m1), ("m2", m2)]);
        assert_eq!(registry.resolve_class("main", "Level").unwrap().id.module, "m2");
    }

    #[test]
    fn local_definition_shadows_import() {
        let registry = build(&[
            ("main", "import other\nclass Thing { a: int }\nlet t = Thing(1)"),
            ("other", "class Thing { b: str }"),
        ]);
        assert_eq!(registry.resolve_class("main", "Thing").unwrap().id.module, "main");
    }

    #[test]
    fn lookup_type_resolves_named_lists_and_primitives() {
        let registry = build(&[("game", GAME), ("level", LEVEL), ("primitives", PRIMITIVES)]);
        let level = registry.lookup_type("game", &TypeExpr::named("Level")).unwrap();
        assert_eq!(level, ResolvedType::Class(SymbolId::new("level", "Level", SymbolKind::Class)));
        assert_eq!(
            registry.lookup_type("game", &TypeExpr::Primitive(Primitive::Int)).unwrap(),
            ResolvedType::Primitive(Primitive::Int)
        );
        let wall_list = registry.lookup_type("level", &TypeExpr::list_of(TypeExpr::named("Wall"))).unwrap();
        assert_eq!(
            wall_list,
            ResolvedType::List(Box::new(ResolvedType::Class(SymbolId::new(
                "primitives",
                "Wall",
                SymbolKind::Class
            ))))
        );
    }

    #[test]
    fn unknown_type_name_is_a_name_error() {
        let err = try_build(&[("main", "def f(x: Ghost) -> int { return 1 }")]).unwrap_err();
        assert!(matches!(err, RegistryError::Name { ref name, .. } if name == "Ghost"));
    }

    #[test]
    fn unresolved_variable_is_a_name_error() {
        let err = try_build(&[("main", "print(nope)")]).unwrap_err();
        assert!(matches!(err, RegistryError::Name { ref name, .. } if name == "nope"));
    }

    #[test]
    fn duplicate_across_hand_built_modules_is_rejected() {
        let resolver = MapResolver::new().with("main", "class A { x: int }");
        let modules = parse_program_with("main", &resolver).unwrap();
        let doubled = vec![modules[0].clone(), modules[0].clone()];
        assert!(matches!(build_registry(&doubled), Err(RegistryError::Duplicate { .. })));
    }

    #[test]
    fn usages_all_resolve_to_definitions() {
        let registry = build(&[
            (
                "main",
                "import people\nlet a = Person(\"E\", \"1879\")\nlet y = a.calculate_age(2024)\nprint(a.name)\nprint(y)",
            ),
            (
                "people",
                "class Person {\n  name: str\n  dob: str\n  def calculate_age(cur_year: int) -> int by llm\n}",
            ),
        ]);
        assert!(!registry.usages.is_empty());
        for (loc, id) in &registry.usages {
            assert!(
                registry.definitions.contains_key(id),
                "usage at {loc:?} points to missing definition {id}"
            );
        }
        // Method and field usages were linked.
        assert!(registry
            .usages
            .iter()
            .any(|(_, id)| id.name == "Person.calculate_age" && id.kind == SymbolKind::Method));
        assert!(registry.usages.iter().any(|(_, id)| id.name == "Person.name" && id.kind == SymbolKind::Field));
    }

    #[test]
    fn let_of_empty_list_cannot_infer() {
        let err = try_build(&[("main", "let xs = []")]).unwrap_err();
        assert!(matches!(err, RegistryError::CannotInfer { ref name, .. } if name == "xs"));
    }

    #[test]
    fn registry_contains_plain_symbol_table_superset() {
        let sources = [("game", GAME), ("level", LEVEL), ("primitives", PRIMITIVES)];
        let registry = build(&sources);
        // Independent naive per-module symbol collector.
        let mut resolver = MapResolver::new();
        for (name, src) in &sources {
            resolver = resolver.with(*name, *src);
        }
        let modules = parse_program_with("game", &resolver).unwrap();
        for module in &modules {
            for class in module.classes() {
                assert!(registry
                    .definitions
                    .contains_key(&SymbolId::new(&module.name, class.name.clone(), SymbolKind::Class)));
                for field in &class.fields {
                    assert!(registry.definitions.contains_key(&SymbolId::new(
                        &module.name,
                        format!("{}.{}", class.name, field.name),
                        SymbolKind::Field
                    )));
                }
                for method in &class.methods {
                    assert!(registry.definitions.contains_key(&SymbolId::new(
                        &module.name,
                        format!("{}.{}", class.name, method.name),
                        SymbolKind::Method
                    )));
                }
            }
            for func in module.functions() {
                assert!(registry
                    .definitions
                    .contains_key(&SymbolId::new(&module.name, func.name.clone(), SymbolKind::Function)));
            }
        }
    }

    #[test]
    fn identical_inputs_build_identical_registries() {
        let sources = [("game", GAME), ("level", LEVEL), ("primitives", PRIMITIVES)];
        let a = build(&sources);
        let b = build(&sources);
        assert_eq!(a, b);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
