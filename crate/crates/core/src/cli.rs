//! The `qsync` command-line front end.
//!
//! Every subcommand reads JSON files (`-` is standard input) and writes one
//! JSON document tagged with `"qsync_schema"`. Negative verdicts such as an
//! unbalanced automaton are ordinary results and exit with status 0; exit
//! status 1 is reserved for domain and file errors, 2 for usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{ame_check, reduced_spectrum, AnalysisError, Cut};
use crate::automaton::{zoo, AutomatonError, Dfa, ZooParams, ZOO_NAMES};
use crate::census::{CensusError, CensusReport};
use crate::qsim::{
    classify_behavior, initial_state_from_json, run, Behavior, BehaviorClass, QsimError,
    SparseState, DEFAULT_TOL,
};
use crate::suite::run_suite;
use crate::syncword::{
    cerny_audit, greedy_sync_word, shortest_sync_word, synchronizes_to_class, verify, SyncError,
    SyncReport,
};
use crate::synth::{synthesize, verify_synthesis, SynthError, TargetSpec};
use crate::unitarize::{unitarize, JointPerm, UnitarizeError, UnitarizeMode};
use crate::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error(transparent)]
    Unitarize(#[from] UnitarizeError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error("malformed {what}: {message}")]
    Schema { what: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "qsync",
    version,
    about = "Synchronizing automata and their unitary realizations"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Amplitudes at or below this magnitude are dropped from initial states.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a named automaton.
    Zoo(ZooArgs),
    /// Degree profile and balance verdict.
    Balance { file: PathBuf },
    /// Find or verify a synchronizing word.
    Sync(SyncArgs),
    /// Build a realizing permutation.
    Unitarize {
        file: PathBuf,
        #[arg(long, default_value = "canonical")]
        mode: UnitarizeMode,
    },
    /// Evolve a joint state.
    Simulate {
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        trajectory: bool,
    },
    /// Reduced spectrum and entropy across a cut.
    Entropy {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated register positions, `Q` for the automaton.
        #[arg(long)]
        cut: String,
    },
    /// Check whether the register factor is absolutely maximally entangled.
    Ame {
        #[arg(long)]
        state: PathBuf,
    },
    /// Synthesize an automaton emitting a target register state.
    Synth {
        #[arg(long)]
        targets: PathBuf,
    },
    /// Count unitarizable automata.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        enumerate: bool,
        #[arg(long)]
        sample: Option<u64>,
    },
    /// Recompute every published example.
    PaperSuite,
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(ZOO_NAMES))]
    pub name: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Permutation of states as a comma-separated list, e.g. `1,0,3,2`.
    #[arg(long)]
    pub pi: Option<String>,
}

#[derive(Debug, Args)]
pub struct SyncArgs {
    pub file: PathBuf,
    #[arg(long, conflicts_with_all = ["greedy", "word"])]
    pub shortest: bool,
    #[arg(long, conflicts_with = "word")]
    pub greedy: bool,
    #[arg(long)]
    pub word: Option<String>,
    /// JSON array mapping each state to a block; requires `--word`.
    #[arg(long, requires = "word")]
    pub blocks: Option<PathBuf>,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Io<'_> {
    fn read(&mut self, path: &PathBuf) -> Result<String, CliError> {
        if path.as_os_str() == "-" {
            if std::mem::replace(&mut self.stdin_used, true) {
                return Err(CliError::Usage(
                    "standard input can be read only once".into(),
                ));
            }
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .map_err(|source| CliError::Io {
                    path: "-".into(),
                    source,
                })?;
            Ok(s)
        } else {
            fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })
        }
    }
}

/// A finished report: its JSON form and an optional text rendering.
struct Output {
    json: String,
    text: Option<String>,
}

impl Output {
    fn value(mut v: Value) -> Self {
        if let Value::Object(map) = &mut v {
            map.insert("qsync_schema".into(), json!(SCHEMA_VERSION));
        }
        Output {
            json: serde_json::to_string_pretty(&v).expect("value serialization"),
            text: None,
        }
    }

    fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serialization")
}

/// Parses `argv` and runs the subcommand; returns the exit status.
pub fn dispatch<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    2
                }
            };
        }
    };
    let mut io = Io {
        stdin,
        stdin_used: false,
    };
    match execute(&cli, &mut io) {
        Ok(out) => {
            let body = match (cli.output, out.text) {
                (OutputFormat::Text, Some(text)) => text,
                (OutputFormat::Text, None) => {
                    render_text(&serde_json::from_str(&out.json).unwrap_or(Value::Null))
                }
                (OutputFormat::Json, _) => out.json,
            };
            let _ = writeln!(stdout, "{}", body.trim_end());
            0
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// [`dispatch`] on the process arguments and standard streams.
pub fn main_with_std() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

fn execute(cli: &Cli, io: &mut Io<'_>) -> Result<Output, CliError> {
    match &cli.command {
        Command::Zoo(args) => {
            let pi = args.pi.as_deref().map(parse_list).transpose()?;
            let dfa = zoo(&args.name, &ZooParams { n: args.n, pi })?;
            Ok(Output {
                json: dfa.to_json(),
                text: Some(dfa.to_string()),
            })
        }
        Command::Balance { file } => {
            let dfa = Dfa::from_json(&io.read(file)?)?;
            let profile = dfa.degree_profile();
            Ok(Output::value(json!({
                "states": dfa.n(),
                "in_total": profile.in_total,
                "out_total": profile.out_total,
                "balanced": profile.is_balanced(),
                "violations": profile.violations(),
            })))
        }
        Command::Sync(args) => sync(args, io),
        Command::Unitarize { file, mode } => {
            let dfa = Dfa::from_json(&io.read(file)?)?;
            let perm = unitarize(&dfa, *mode)?;
            Ok(Output {
                json: perm.to_json(),
                text: Some(perm.to_string()),
            })
        }
        Command::Simulate {
            perm,
            init,
            trajectory,
        } => {
            let perm = JointPerm::from_json(&io.read(perm)?)?;
            let s0 = initial_state_from_json(&io.read(init)?, perm.n(), cli.tol)?;
            let traj = run(&perm, &s0)?;
            let last = traj.last().expect("trajectory holds the initial state");
            let doc = SimulateOut {
                qsync_schema: SCHEMA_VERSION,
                final_state: raw_state(last),
                trajectory: trajectory.then(|| traj.iter().map(raw_state).collect()),
                behavior: behavior_json(&classify_behavior(last)),
            };
            Ok(Output {
                json: serde_json::to_string_pretty(&doc).expect("simulate report"),
                text: None,
            })
        }
        Command::Entropy { state, cut } => {
            let s = SparseState::from_json(&io.read(state)?, None)?;
            let cut = Cut::parse(cut)?;
            let report = reduced_spectrum(&s, &cut)?;
            let mut v = to_value(&report);
            v["cut"] = json!(cut.to_string());
            Ok(Output::value(v))
        }
        Command::Ame { state } => {
            let s = SparseState::from_json(&io.read(state)?, None)?;
            let class = classify_behavior(&s);
            let register = class.register_factor().ok_or_else(|| CliError::Schema {
                what: "state",
                message:
                    "register is entangled with the automaton; no pure register state to check"
                        .into(),
            })?;
            Ok(Output::value(to_value(&ame_check(&register)?)))
        }
        Command::Synth { targets } => {
            let spec = TargetSpec::from_json(&io.read(targets)?)?;
            let result = synthesize(&spec)?;
            let mut v = result.to_json_value();
            v["verified"] = json!(verify_synthesis(&result, &spec));
            v["initial_superposition"] = result
                .initial_superposition(&spec)
                .iter()
                .map(|(q, c)| json!({"state": q, "re": c.re, "im": c.im}))
                .collect();
            v["word"] = json!(spec.input_word().to_string());
            Ok(Output::value(v))
        }
        Command::Census {
            n,
            enumerate,
            sample,
        } => {
            let mut report = CensusReport::new(*n)?;
            if let Some(samples) = sample {
                report = report.with_samples(*samples, cli.seed)?;
            }
            if *enumerate {
                report = report.with_enumeration()?;
            }
            Ok(Output::value(to_value(&report)))
        }
        Command::PaperSuite => {
            let report = run_suite(cli.seed);
            let text = report.table();
            Ok(Output::value(to_value(&report)).with_text(text))
        }
    }
}

fn sync(args: &SyncArgs, io: &mut Io<'_>) -> Result<Output, CliError> {
    let dfa = Dfa::from_json(&io.read(&args.file)?)?;
    let found = |r: Option<SyncReport>, extra: Value| {
        let mut v = match r {
            Some(r) => {
                let mut v = to_value(&r);
                v["synchronizing"] = json!(true);
                v
            }
            None => json!({"synchronizing": false}),
        };
        if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
            map.extend(more);
        }
        Output::value(v)
    };
    if let Some(text) = &args.word {
        let word = dfa.parse_word(text)?;
        let Some(path) = &args.blocks else {
            return Ok(found(verify(&dfa, &word), json!({"tested": text})));
        };
        let blocks = parse_blocks(&io.read(path)?, dfa.n())?;
        let block = synchronizes_to_class(&dfa, &word, &blocks);
        let v = match block {
            Some(b) => json!({
                "synchronizing": true, "partition": true, "word": text,
                "final": b, "length": word.len(), "method": "verify",
            }),
            None => json!({"synchronizing": false, "partition": true, "tested": text}),
        };
        return Ok(Output::value(v));
    }
    if args.greedy {
        return Ok(found(greedy_sync_word(&dfa), json!({})));
    }
    let report = shortest_sync_word(&dfa)?;
    let audit = match report {
        Some(_) => to_value(&cerny_audit(&dfa)?),
        None => Value::Null,
    };
    Ok(found(report, json!({"cerny": audit})))
}

#[derive(Serialize)]
struct SimulateOut {
    qsync_schema: u32,
    #[serde(rename = "final")]
    final_state: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<Vec<Box<RawValue>>>,
    behavior: Value,
}

fn raw_state(s: &SparseState) -> Box<RawValue> {
    RawValue::from_string(s.to_json_compact()).expect("state serialization is JSON")
}

fn behavior_json(class: &BehaviorClass) -> Value {
    let amps = |terms: Vec<(String, f64, f64)>| -> Vec<Value> {
        terms
            .into_iter()
            .map(|(k, re, im)| json!({"key": k, "re": re, "im": im}))
            .collect()
    };
    match &class.behavior {
        Behavior::Basis { register, state } => json!({
            "class": "basis", "schmidt_rank": class.schmidt_rank,
            "register": register.to_string(), "automaton_state": state,
        }),
        Behavior::Decoupled {
            register,
            automaton,
        } => json!({
            "class": "decoupled", "schmidt_rank": class.schmidt_rank,
            "register_factor": amps(register.terms().map(|(r, c)| (r.to_string(), c.re, c.im)).collect()),
            "automaton_factor": amps(automaton.iter().map(|(q, c)| (q.to_string(), c.re, c.im)).collect()),
        }),
        Behavior::Entangled => json!({"class": "entangled", "schmidt_rank": class.schmidt_rank}),
    }
}

fn parse_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad list entry {t:?}")))
        })
        .collect()
}

fn parse_blocks(text: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Schema {
        what: "blocks file",
        message: e.to_string(),
    })?;
    let list = v.get("blocks").cloned().unwrap_or(v);
    let blocks: Vec<usize> = serde_json::from_value(list).map_err(|e| CliError::Schema {
        what: "blocks file",
        message: e.to_string(),
    })?;
    if blocks.len() != n {
        return Err(CliError::Schema {
            what: "blocks file",
            message: format!("{} entries for {n} states", blocks.len()),
        });
    }
    Ok(blocks)
}

/// `key: value` lines for a JSON report.
fn render_text(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    if k == "qsync_schema" {
                        continue;
                    }
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, x, out);
                }
            }
            Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
                let parts: Vec<String> = items.iter().map(scalar).collect();
                out.push_str(&format!("{prefix}: [{}]\n", parts.join(", ")));
            }
            Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            _ => out.push_str(&format!("{prefix}: {}\n", scalar(v))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}
