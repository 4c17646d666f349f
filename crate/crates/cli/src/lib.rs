//! Batch commands over knowledge-graph files: build documents into canonical
//! N-Triples, validate graphs, realize and run processes, and search process
//! interleavings for races.
//!
//! Every command returns an [`Outcome`] (exit status plus the text destined
//! for stdout and stderr) so that the binary stays a thin shell and tests can
//! drive the commands in-process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use oasis_core::engine::{realize_process, run_to_completion, Assignment, EngineError, ProcessExecutionHandle};
use oasis_core::kg::{vocabulary, PrefixTable};
use oasis_core::lab::{detect_races_with, StepKind, StepKindMap};
use oasis_core::model::BuildDocument;
use oasis_core::rdfio::{export_ntriples, import_turtle_with, parse_prefix_map, ParseError};
use oasis_core::validate::{render, validate, Violation};
use oasis_core::{ExecMode, KnowledgeBase};
use serde::Deserialize;
use thiserror::Error;

/// The JSON schema of build documents.
pub const BUILD_DOCUMENT_SCHEMA: &str = include_str!("../schema/build-document.schema.json");

/// Process exit codes; stable across releases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// I/O failure, schema violation, bad arguments, bound exceeded.
    Failure = 1,
    /// Validation findings, or a capability/validation failure while running.
    Findings = 2,
    Races = 3,
    /// Turtle or N-Triples input that does not parse.
    ParseError = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Exit-code table shown in `--help`.
pub const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  1  operational error (I/O, schema violation, bad arguments, bound exceeded)
  2  validation findings, or a capability/validation failure during `run`
  3  races found
  4  parse error in a Turtle/N-Triples input";

/// A graph file that failed to parse, located as `path:line:column`.
#[derive(Debug, Error)]
#[error("{}:{}:{}: {} at `{}`", path.display(), error.line, error.column, error.kind, error.found)]
pub struct ParseFailure {
    pub path: PathBuf,
    pub error: ParseError,
}

/// Maps a command error to its exit status.
pub fn failure_status(error: &anyhow::Error) -> ExitStatus {
    if error.downcast_ref::<ParseFailure>().is_some() {
        ExitStatus::ParseError
    } else {
        ExitStatus::Failure
    }
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn new(status: ExitStatus, stdout: String) -> Self {
        Outcome { status, stdout, stderr: String::new() }
    }
}

/// The default prefix table, extended by the file at `path` when given.
pub fn load_prefixes(path: Option<&Path>) -> Result<PrefixTable> {
    match path {
        None => Ok(PrefixTable::default()),
        Some(p) => {
            let text = read(p)?;
            parse_prefix_map(&text).map_err(|e| anyhow!("{}: {e}", p.display()))
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Imports a Turtle or N-Triples file.
pub fn load_kb(path: &Path, prefixes: &PrefixTable) -> Result<KnowledgeBase> {
    let text = read(path)?;
    import_turtle_with(&text, prefixes).map_err(|error| ParseFailure { path: path.to_path_buf(), error }.into())
}

/// Parses a build document, reporting problems as `path:line:column`.
pub fn parse_document(path: &Path, text: &str) -> Result<BuildDocument> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        let message = message.split(" at line ").next().unwrap_or(&message).to_string();
        anyhow!("{}:{}:{}: {message}", path.display(), e.line(), e.column())
    })
}

/// Builds the document at `spec`, writes canonical N-Triples to `out`, and
/// lists the root IRIs.
pub fn cmd_build(spec: &Path, out: &Path, prefixes: &PrefixTable) -> Result<Outcome> {
    let document = parse_document(spec, &read(spec)?)?;
    let mut kb = KnowledgeBase::new();
    *kb.prefixes_mut() = prefixes.clone();
    let built = document.apply(&mut kb).with_context(|| format!("{}: cannot build the document", spec.display()))?;
    write(out, &export_ntriples(&kb))?;
    let stdout = built.roots.iter().map(|r| format!("{r}\n")).collect();
    Ok(Outcome::new(ExitStatus::Success, stdout))
}

/// Validates the graph at `path`; findings go to stdout, one per line.
pub fn cmd_validate(path: &Path, prefixes: &PrefixTable) -> Result<Outcome> {
    let kb = load_kb(path, prefixes)?;
    let findings = validate(&kb);
    let status = if findings.is_empty() { ExitStatus::Success } else { ExitStatus::Findings };
    Ok(Outcome::new(status, render(&findings)))
}

/// One entry of an assignment file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerformerEntry {
    agent: String,
    behaviour: String,
}

/// Reads `{ "<state>": { "agent": "<iri>", "behaviour": "<iri>" }, … }`;
/// names may be prefixed.
pub fn load_assignment(path: &Path, kb: &KnowledgeBase) -> Result<Assignment> {
    let text = read(path)?;
    let entries: BTreeMap<String, PerformerEntry> =
        serde_json::from_str(&text).map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
    let mut assignment = Assignment::new();
    for (state, entry) in entries {
        let resolve =
            |name: &str| kb.resolve(name).with_context(|| format!("{}: cannot resolve `{name}`", path.display()));
        assignment = assignment.assign(resolve(&state)?, resolve(&entry.agent)?, resolve(&entry.behaviour)?);
    }
    Ok(assignment)
}

/// Paths and names for [`cmd_run`].
#[derive(Clone, Debug)]
pub struct RunArgs {
    pub kb: PathBuf,
    pub process: String,
    pub assign: PathBuf,
    pub trace: PathBuf,
    pub out: PathBuf,
}

/// Realizes a process, runs it to completion, writes the trace and the
/// enlarged graph, and prints the realization IRI.
pub fn cmd_run(args: &RunArgs, prefixes: &PrefixTable) -> Result<Outcome> {
    let mut kb = load_kb(&args.kb, prefixes)?;
    let process = kb.resolve(&args.process).with_context(|| format!("cannot resolve process `{}`", args.process))?;
    let assignment = load_assignment(&args.assign, &kb)?;
    let realized = realize_process(&mut kb, &process, &assignment)
        .and_then(|mut handle| run_to_completion(&mut kb, &mut handle).map(|trace| (handle, trace)));
    let (handle, trace) = match realized {
        Ok(done) => done,
        Err(error) => return engine_failure(error),
    };
    write(&args.trace, &trace.to_json_lines())?;
    write(&args.out, &export_ntriples(&kb))?;
    Ok(Outcome::new(ExitStatus::Success, format!("{}\n", handle.root)))
}

/// Capability and validation failures are findings (exit 2) reported in the
/// validator's line format; anything else is an operational error.
fn engine_failure(error: EngineError) -> Result<Outcome> {
    let subjects = match &error {
        EngineError::ValidationFailed { violations, reason } => {
            let mut out = Outcome::new(ExitStatus::Findings, render(violations));
            out.stderr = format!("error: validation failed: {reason}\n");
            return Ok(out);
        }
        EngineError::PerformerLacksCapability { state, agent, behaviour } => {
            vec![agent.clone(), behaviour.clone(), state.clone()]
        }
        EngineError::RoleDeprecatedUse { state, agent, behaviour, role } => {
            vec![agent.clone(), behaviour.clone(), state.clone(), role.clone()]
        }
        EngineError::StructureMismatch { state, .. } => vec![state.clone()],
        _ => bail!(error),
    };
    let code = error.code().expect("capability and structure errors carry a code");
    let line = Violation::new(code, subjects, error.to_string());
    let mut out = Outcome::new(ExitStatus::Findings, render(&[line]));
    out.stderr = format!("error: {error}\n");
    Ok(out)
}

/// Parses `NAME=KIND`, e.g. `acquire=request`.
pub fn parse_step_kind(text: &str) -> Result<(String, StepKind), String> {
    let (name, kind) = text.split_once('=').ok_or_else(|| format!("expected NAME=KIND, got `{text}`"))?;
    if name.is_empty() {
        return Err(format!("empty action name in `{text}`"));
    }
    Ok((name.to_string(), kind.parse()?))
}

/// Arguments of [`cmd_races`].
#[derive(Clone, Debug)]
pub struct RacesArgs {
    pub kb: PathBuf,
    pub handles: Vec<String>,
    pub bound: usize,
    pub step_kinds: Vec<(String, StepKind)>,
    pub mode: ExecMode,
}

/// Enumerates the interleavings of realized processes and prints every race
/// as a JSON line.
pub fn cmd_races(args: &RacesArgs, prefixes: &PrefixTable) -> Result<Outcome> {
    let kb = load_kb(&args.kb, prefixes)?;
    let mut handles = Vec::new();
    for name in &args.handles {
        let root = kb.resolve(name).with_context(|| format!("cannot resolve handle `{name}`"))?;
        handles.push(ProcessExecutionHandle::resume(&kb, &root)?);
    }
    let kinds = args.step_kinds.iter().fold(StepKindMap::default(), |m, (name, kind)| m.with(name, *kind));
    let reports = detect_races_with(&kb, &handles, args.bound, &kinds, args.mode)?;
    let mut stdout = String::new();
    for r in &reports {
        writeln!(stdout, "{}", r.to_json()).expect("writing to a string");
    }
    let status = if reports.is_empty() { ExitStatus::Success } else { ExitStatus::Races };
    Ok(Outcome::new(status, stdout))
}

/// The vocabulary table (the content of VOCABULARY.md).
pub fn cmd_vocab() -> Outcome {
    Outcome::new(ExitStatus::Success, vocabulary().render_markdown())
}

pub fn cmd_schema() -> Outcome {
    Outcome::new(ExitStatus::Success, BUILD_DOCUMENT_SCHEMA.to_string())
}
