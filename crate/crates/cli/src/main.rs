use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use oasis_cli::{
    cmd_build, cmd_races, cmd_run, cmd_schema, cmd_validate, cmd_vocab, failure_status, load_prefixes, parse_step_kind,
    Outcome, RacesArgs, RunArgs, EXIT_CODES_HELP,
};
use oasis_core::lab::{StepKind, DEFAULT_BOUND};
use oasis_core::ExecMode;

/// Build, validate, execute and race-check agent knowledge graphs.
#[derive(Debug, Parser)]
#[command(name = "oasis", version, after_help = EXIT_CODES_HELP)]
struct Cli {
    /// File of `prefix namespace-IRI` lines extending the default prefixes
    /// (oasis:, rdf:, ex:).
    #[arg(long, global = true, env = "OASIS_PREFIX_MAP", value_name = "PATH")]
    prefix_map: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a JSON build document into canonical N-Triples; prints root IRIs.
    #[command(after_help = EXIT_CODES_HELP)]
    Build {
        /// Build document (JSON; see `oasis schema`).
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
        /// Output graph (.nt).
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Validate a graph; prints one `CODE<TAB>subjects<TAB>message` line per finding.
    #[command(after_help = EXIT_CODES_HELP)]
    Validate {
        /// Graph file (.ttl or .nt).
        #[arg(value_name = "PATH")]
        path: PathBuf,
    },
    /// Realize a process, run it to completion, and write the trace and the enlarged graph.
    #[command(after_help = EXIT_CODES_HELP)]
    Run {
        /// Input graph (.ttl or .nt).
        #[arg(long, value_name = "PATH")]
        kb: PathBuf,
        /// Planning-layer process IRI (prefixed or absolute).
        #[arg(long, value_name = "IRI")]
        process: String,
        /// Assignment JSON: {"<state>": {"agent": "<iri>", "behaviour": "<iri>"}, …}.
        #[arg(long, value_name = "PATH")]
        assign: PathBuf,
        /// Trace output, one JSON object per performed state.
        #[arg(long, value_name = "PATH")]
        trace: PathBuf,
        /// Output graph (.nt) including the realization.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Enumerate every interleaving of realized processes and report races as JSON lines.
    #[command(after_help = EXIT_CODES_HELP)]
    Races {
        /// Input graph (.ttl or .nt).
        #[arg(long, value_name = "PATH")]
        kb: PathBuf,
        /// Realized process IRIs, one per concurrent handle.
        #[arg(long, value_name = "IRI", num_args = 1.., required = true)]
        handles: Vec<String>,
        /// Maximum total number of steps across all handles.
        #[arg(long, value_name = "N", default_value_t = DEFAULT_BOUND)]
        bound: usize,
        /// Map an operator-action local name to a step kind (request, modify, release); repeatable.
        #[arg(long = "step-kind", value_name = "NAME=KIND", value_parser = parse_step_kind)]
        step_kinds: Vec<(String, StepKind)>,
        /// Replay schedules on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Print the vocabulary table (Markdown).
    Vocab,
    /// Print the JSON schema of build documents.
    Schema,
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let prefixes = load_prefixes(cli.prefix_map.as_deref())?;
    match cli.command {
        Command::Build { spec, out } => cmd_build(&spec, &out, &prefixes),
        Command::Validate { path } => cmd_validate(&path, &prefixes),
        Command::Run { kb, process, assign, trace, out } => {
            cmd_run(&RunArgs { kb, process, assign, trace, out }, &prefixes)
        }
        Command::Races { kb, handles, bound, step_kinds, sequential } => {
            let mode = if sequential { ExecMode::Sequential } else { ExecMode::Parallel };
            cmd_races(&RacesArgs { kb, handles, bound, step_kinds, mode }, &prefixes)
        }
        Command::Vocab => Ok(cmd_vocab()),
        Command::Schema => Ok(cmd_schema()),
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1 rather than clap's default 2, which means findings.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let _ = error.print();
            return ExitCode::from(if error.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            let _ = std::io::stdout().flush();
            eprint!("{}", outcome.stderr);
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(failure_status(&error).code() as u8)
        }
    }
}
