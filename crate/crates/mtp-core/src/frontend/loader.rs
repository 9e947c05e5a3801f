//! Multi-module program loading with import resolution.
//!
//! Modules are returned in depth-first order by first import occurrence:
//! the entry module first, then each newly reached import as it is first
//! seen. Cyclic imports are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::ast::ModuleAst;
use super::{lexer, parser};
use crate::error::FrontendError;

/// Maps a module name to its source text.
pub trait ModuleResolver {
    fn resolve(&self, module: &str) -> Option<String>;
}

/// Resolves `name` to `<root>/<name>.mtp`.
pub struct FsResolver {
    root: PathBuf,
}

impl FsResolver {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FsResolver { root: root.into() }
    }
}

impl ModuleResolver for FsResolver {
    fn resolve(&self, module: &str) -> Option<String> {
        std::fs::read_to_string(self.root.join(format!("{module}.mtp"))).ok()
    }
}

/// In-memory resolver, mainly for tests.
#[derive(Default)]
pub struct MapResolver {
    sources: BTreeMap<String, String>,
}

impl MapResolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, module: impl Into<String>, source: impl Into<String>) -> Self {
        self.sources.insert(module.into(), source.into());
        self
    }
}

impl ModuleResolver for MapResolver {
    fn resolve(&self, module: &str) -> Option<String> {
        self.sources.get(module).cloned()
    }
}

/// Parses the program rooted at `entry_path`; imports resolve against the
/// entry file's directory.
pub fn parse_program(entry_path: &Path) -> Result<Vec<ModuleAst>, FrontendError> {
    let name = entry_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| FrontendError::Import { module: entry_path.display().to_string(), importer: None })?
        .to_string();
    let root = entry_path.parent().unwrap_or_else(|| Path::new("."));
    let resolver = FsResolver::new(root);
    parse_program_with(&name, &resolver)
}

/// Parses the program rooted at module `entry`, resolving every module
/// (including the entry) through `resolver`.
pub fn parse_program_with(entry: &str, resolver: &dyn ModuleResolver) -> Result<Vec<ModuleAst>, FrontendError> {
    let mut output: Vec<ModuleAst> = Vec::new();
    let mut in_progress: Vec<String> = Vec::new();
    let mut done: Vec<String> = Vec::new();
    load(entry, None, resolver, &mut output, &mut in_progress, &mut done)?;
    Ok(output)
}

fn load(
    module: &str,
    importer: Option<&str>,
    resolver: &dyn ModuleResolver,
    output: &mut Vec<ModuleAst>,
    in_progress: &mut Vec<String>,
    done: &mut Vec<String>,
) -> Result<(), FrontendError> {
    if in_progress.iter().any(|m| m == module) {
        return Err(FrontendError::ImportCycle {
            module: module.to_string(),
            importer: importer.unwrap_or_default().to_string(),
        });
    }
    if done.iter().any(|m| m == module) {
        return Ok(());
    }
    let source = resolver.resolve(module).ok_or_else(|| FrontendError::Import {
        module: module.to_string(),
        importer: importer.map(str::to_string),
    })?;
    let tokens = lexer::tokenize(&source).map_err(|e| e.in_module(module))?;
    let ast = parser::parse_module(tokens, module).map_err(|e| e.in_module(module))?;
    let imports = ast.imports.clone();
    in_progress.push(module.to_string());
    output.push(ast);
    for import in &imports {
        load(import, Some(module), resolver, output, in_progress, done)?;
    }
    in_progress.pop();
    done.push(module.to_string());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_file_no_imports() {
        let resolver = MapResolver::new().with("main", "let x = 1");
        let modules = parse_program_with("main", &resolver).unwrap();
        assert_eq!(modules.len(), 1);
        assert_eq!(modules[0].name, "main");
    }

    #[test]
    fn depth_first_order_by_first_import() {
        let resolver = MapResolver::new()
            .with("game", "import level\nclass G {}")
            .with("level", "import primitives\nclass Level { n: int }")
            .with("primitives", "class Position { x: int\ny: int }");
        let modules = parse_program_with("game", &resolver).unwrap();
        let names: Vec<_> = modules.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, vec!["game", "level", "primitives"]);
    }

    #[test]
    fn shared_import_parsed_once() {
        let resolver = MapResolver::new()
            .with("a", "import b\nimport c")
            .with("b", "import c")
            .with("c", "let x = 1");
        let modules = parse_program_with("a", &resolver).unwrap();
        let names: Vec<_> = modules.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b", "c"]);
    }

    #[test]
    fn cycle_rejected() {
        let resolver = MapResolver::new().with("a", "import b").with("b", "import a");
        let err = parse_program_with("a", &resolver).unwrap_err();
        match err {
            FrontendError::ImportCycle { module, importer } => {
                assert_eq!(module, "a");
                assert_eq!(importer, "b");
            }
            other => panic!("expected cycle error, got {other}"),
        }
    }

    #[test]
    fn unresolvable_import_names_importer() {
        let resolver = MapResolver::new().with("a", "import missing");
        let err = parse_program_with("a", &resolver).unwrap_err();
        match err {
            FrontendError::Import { module, importer } => {
                assert_eq!(module, "missing");
                assert_eq!(importer.as_deref(), Some("a"));
            }
            other => panic!("expected import error, got {other}"),
        }
    }

    #[test]
    fn self_import_is_a_cycle() {
        let resolver = MapResolver::new().with("a", "import a");
        assert!(matches!(
            parse_program_with("a", &resolver),
            Err(FrontendError::ImportCycle { .. })
        ));
    }

    #[test]
    fn parse_error_carries_module_name() {
        let resolver = MapResolver::new().with("a", "import b").with("b", "class {");
        let err = parse_program_with("a", &resolver).unwrap_err();
        let text = err.to_string();
        assert!(text.contains('b'), "diagnostic should name the module: {text}");
    }
}
