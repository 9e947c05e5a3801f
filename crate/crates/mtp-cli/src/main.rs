//! `mtp` — build, inspect, and run MTP programs.
//!
//! Exit codes: 0 success, 1 runtime/type error, 2 frontend/registry/usage
//! error, 3 backend transport or configuration error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use mtp_core::backend::{http_backend, mock_backend, recording_backend, replay_backend, ModelBackend};
use mtp_core::frontend::{parse_program, ModuleAst};
use mtp_core::mtir::{build_mtir, serialize_mtir, MtirMap};
use mtp_core::registry::build_registry;
use mtp_core::runtime::{run_program, RunConfig, EXIT_BACKEND, EXIT_FRONTEND};

const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Parser)]
#[command(name = "mtp", version, about = "Compiler and runtime for the MTP language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    /// Scripted responses from --mock-script, one per line, in order.
    Mock,
    /// Byte-exact playback of a --replay recording.
    Replay,
    /// OpenAI-compatible chat-completions endpoint (MTP_API_KEY, MTP_BASE_URL).
    Http,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the program, build the registry and the per-call-site IR, and
    /// print one summary line per `by` call-site.
    Build {
        entry: PathBuf,
        /// Also write the canonical IR document here.
        #[arg(long, value_name = "PATH")]
        dump_mtir: Option<PathBuf>,
    },
    /// Execute a program against the selected backend.
    Run {
        entry: PathBuf,
        #[arg(long, value_enum)]
        backend: BackendKind,
        /// Model name sent to the backend (defaults to the by-clause model reference).
        #[arg(long)]
        model: Option<String>,
        /// Correction attempts after the first try of each call.
        #[arg(long, default_value_t = 3)]
        max_retries: u32,
        /// Record every (request, result) pair to this JSONL file.
        #[arg(long, value_name = "PATH", conflicts_with = "replay")]
        record: Option<PathBuf>,
        /// Replay a recording instead of calling a live backend.
        #[arg(long, value_name = "PATH")]
        replay: Option<PathBuf>,
        /// Responses for the mock backend, one per line.
        #[arg(long, value_name = "PATH")]
        mock_script: Option<PathBuf>,
        /// Write the machine-readable token ledger here (the summary table
        /// always goes to stderr).
        #[arg(long, value_name = "PATH")]
        ledger: Option<PathBuf>,
    },
    /// Write the canonical IR document for a program.
    DumpMtir { entry: PathBuf, out: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Build { entry, dump_mtir } => cmd_build(&entry, dump_mtir.as_deref()),
        Command::DumpMtir { entry, out } => cmd_dump_mtir(&entry, &out),
        Command::Run { entry, backend, model, max_retries, record, replay, mock_script, ledger } => {
            cmd_run(&entry, backend, model, max_retries, record, replay, mock_script, ledger)
        }
    };
    std::process::exit(code);
}

/// Frontend + registry + IR, with diagnostics on stderr and exit 2 on failure.
fn compile(entry: &Path) -> Result<(Vec<ModuleAst>, MtirMap), i32> {
    let modules = parse_program(entry).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FRONTEND
    })?;
    let registry = build_registry(&modules).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FRONTEND
    })?;
    let mtir = build_mtir(&modules, &registry).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FRONTEND
    })?;
    Ok((modules, mtir))
}

fn cmd_build(entry: &Path, dump: Option<&Path>) -> i32 {
    let (_, mtir) = match compile(entry) {
        Ok(v) => v,
        Err(code) => return code,
    };
    for (site_id, e) in &mtir.entries {
        println!("{site_id}  {}  {}  types={}", e.kind.as_str(), e.subject, e.type_explanations.len());
    }
    if mtir.is_empty() {
        println!("no by call-sites");
    }
    if let Some(path) = dump {
        if let Err(e) = std::fs::write(path, serialize_mtir(&mtir)) {
            eprintln!("error: cannot write `{}`: {e}", path.display());
            return EXIT_FRONTEND;
        }
    }
    0
}

fn cmd_dump_mtir(entry: &Path, out: &Path) -> i32 {
    let (_, mtir) = match compile(entry) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if let Err(e) = std::fs::write(out, serialize_mtir(&mtir)) {
        eprintln!("error: cannot write `{}`: {e}", out.display());
        return EXIT_FRONTEND;
    }
    0
}

fn backend_for(
    kind: BackendKind,
    model: &Option<String>,
    replay: &Option<PathBuf>,
    mock_script: &Option<PathBuf>,
) -> Result<Arc<dyn ModelBackend>, i32> {
    match kind {
        BackendKind::Mock => {
            let Some(script_path) = mock_script else {
                eprintln!("error: --backend mock requires --mock-script PATH");
                return Err(EXIT_FRONTEND);
            };
            let script = std::fs::read_to_string(script_path).map_err(|e| {
                eprintln!("error: cannot read mock script `{}`: {e}", script_path.display());
                EXIT_FRONTEND
            })?;
            let responses: Vec<String> = script.lines().map(str::to_string).collect();
            Ok(Arc::new(mock_backend(responses)))
        }
        BackendKind::Replay => {
            let Some(path) = replay else {
                eprintln!("error: --backend replay requires --replay PATH");
                return Err(EXIT_FRONTEND);
            };
            let backend = replay_backend(path).map_err(|e| {
                eprintln!("error: {e}");
                EXIT_BACKEND
            })?;
            Ok(Arc::new(backend))
        }
        BackendKind::Http => {
            let api_key = std::env::var("MTP_API_KEY").unwrap_or_default();
            if api_key.is_empty() {
                eprintln!("error: --backend http requires the MTP_API_KEY environment variable");
                return Err(EXIT_BACKEND);
            }
            let base_url = std::env::var("MTP_BASE_URL").unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
            if model.is_none() {
                eprintln!("note: no --model given; the by-clause model reference will be sent as the model name");
            }
            let backend = http_backend(&base_url, &api_key, BTreeMap::new()).map_err(|e| {
                eprintln!("error: {e}");
                EXIT_BACKEND
            })?;
            Ok(Arc::new(backend))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    entry: &Path,
    backend_kind: BackendKind,
    model: Option<String>,
    max_retries: u32,
    record: Option<PathBuf>,
    replay: Option<PathBuf>,
    mock_script: Option<PathBuf>,
    ledger_path: Option<PathBuf>,
) -> i32 {
    let (modules, mtir) = match compile(entry) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let backend = match backend_for(backend_kind, &model, &replay, &mock_script) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let backend: Arc<dyn ModelBackend> = match &record {
        Some(path) => match recording_backend(backend, path) {
            Ok(recorder) => Arc::new(recorder),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_BACKEND;
            }
        },
        None => backend,
    };
    let config = RunConfig { max_retries, default_model: model, ..RunConfig::default() }
        .with_backend_for_all(&mtir, backend);
    let report = run_program(&modules, &mtir, &config);

    print!("{}", report.stdout);
    let _ = std::io::stdout().flush();
    if let Err(e) = &report.result {
        eprintln!("error: {e}");
    }
    eprint!("{}", report.ledger.render_table());
    if let Some(path) = &ledger_path {
        if let Err(e) = std::fs::write(path, report.ledger.to_json_bytes()) {
            eprintln!("error: cannot write ledger `{}`: {e}", path.display());
            return EXIT_FRONTEND;
        }
    }
    report.exit_code()
}
