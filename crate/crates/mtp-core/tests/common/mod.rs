// Shared by several integration-test binaries; not every binary uses every helper.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use mtp_core::backend::MockBackend;
use mtp_core::frontend::{parse_program, ModuleAst};
use mtp_core::mtir::{build_mtir, MtirMap};
use mtp_core::registry::{build_registry, SemanticRegistry};
use mtp_core::runtime::{run_program, RunConfig, RunReport};

pub fn fixture_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn compile_fixture(rel: &str) -> (Vec<ModuleAst>, SemanticRegistry, MtirMap) {
    let modules = parse_program(&fixture_path(rel)).expect("fixture parses");
    let registry = build_registry(&modules).expect("fixture registers");
    let mtir = build_mtir(&modules, &registry).expect("fixture builds MT-IR");
    (modules, registry, mtir)
}

pub fn mock_config(mtir: &MtirMap, script: &[&str], max_retries: u32) -> (RunConfig, Arc<MockBackend>) {
    let mock = Arc::new(MockBackend::from_script(script.iter().copied()));
    let config = RunConfig { max_retries, ..RunConfig::default() }
        .with_backend_for_all(mtir, mock.clone());
    (config, mock)
}

pub fn run_fixture_with_mock(rel: &str, script: &[&str], max_retries: u32) -> (RunReport, Arc<MockBackend>) {
    let (modules, _, mtir) = compile_fixture(rel);
    let (config, mock) = mock_config(&mtir, script, max_retries);
    let report = run_program(&modules, &mtir, &config);
    (report, mock)
}
