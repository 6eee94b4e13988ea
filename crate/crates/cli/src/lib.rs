//! Command-line driver for the counter-machine toolkit.
//!
//! [`run_cli`] parses an argument vector, runs one command and returns the
//! exit code together with the text the binary prints. Verdict commands exit
//! with 0 for a positive answer and 1 for a negative one.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use revbound::constructions::{
    boolean_dcm, concat_dcm1_regular, concat_dcmne_regular, concat_ncm, concat_pf_dcmne_dcm, concat_pf_regular_dcm,
    intersect_machines, intersect_regular, inverse_insertion_ncm, inverse_prefix_dcm1, left_quotient_word,
    make_non_exiting, strip_end_marker_one_counter, BooleanMode, InsertionOp,
};
use revbound::decide::{self, to_one_reversal, CompareMode, Emptiness};
use revbound::format::serialize_artifact;
use revbound::normalize::enforce_reversal_control;
use revbound::transduce::{forward_image_ncm, inverse_apply, to_null_transducer, transduce_det, validate_transducer};
use revbound::{corpus, parse_machine, run_deterministic, validate_machine, Artifact, CounterMachine, Dfa, Error};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

/// Exit code and printed text of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

impl Outcome {
    fn new(code: i32, output: impl Into<String>) -> Outcome {
        Outcome { code, output: output.into() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "revbound", about = "Reversal-bounded counter machines: constructions and decision procedures")]
struct Cli {
    /// Print verdicts as JSON objects.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a machine or transducer file for well-formedness.
    Validate { file: String },
    /// Run a machine on a word; deterministic machines print the step trace with --trace.
    Run {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long)]
        trace: bool,
    },
    /// Decide membership of a word.
    Member {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// List accepted words up to a length.
    Enum {
        file: String,
        #[arg(long)]
        max_len: usize,
    },
    /// Decide emptiness; exits 0 when the language is empty.
    Empty {
        file: String,
        #[arg(long)]
        witness: bool,
    },
    /// Decide whether the language is infinite.
    Infinite { file: String },
    /// Print the Parikh image as a semilinear set.
    Parikh { file: String },
    /// Decide inclusion or equality of two languages.
    Compare {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value = "equal")]
        mode: ModeArg,
    },
    /// Apply a construction and write the result.
    Op {
        name: String,
        inputs: Vec<String>,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        /// Boolean mode for boolean_dcm.
        #[arg(long)]
        boolean: Option<String>,
        /// Insertion kind for inverse_insertion_ncm.
        #[arg(long)]
        insertion: Option<String>,
        /// Gap count for embed insertions.
        #[arg(long, default_value_t = 1)]
        param: usize,
        /// Word for left_quotient_word and transduce.
        #[arg(long, allow_hyphen_values = true)]
        word: Option<String>,
    },
    /// Shipped example machines.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusAction {
    List,
    Get { name: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Subset,
    Equal,
}

/// Operation names accepted by `op`.
pub const OPERATIONS: &[&str] = &[
    "intersect_regular",
    "intersect_machines",
    "boolean_dcm",
    "strip_end_marker_one_counter",
    "make_non_exiting",
    "concat_pf_dcmne_dcm",
    "concat_dcmne_regular",
    "concat_dcm1_regular",
    "inverse_prefix_dcm1",
    "concat_pf_regular_dcm",
    "left_quotient_word",
    "concat_ncm",
    "inverse_insertion_ncm",
    "inverse_apply",
    "forward_image_ncm",
    "to_null_transducer",
    "transduce",
    "enforce_reversal_control",
    "to_one_reversal",
];

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::UnknownEntry(_) => EXIT_USAGE,
        _ => EXIT_PRECONDITION,
    }
}

/// Loads an artifact from a path, or from the corpus with `corpus:<name>`.
fn load(spec: &str) -> Res<Artifact> {
    if let Some(name) = spec.strip_prefix("corpus:") {
        return Ok(parse_machine(corpus::source_text(name)?)?);
    }
    let text = fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("cannot read {spec}: {e}")))?;
    Ok(parse_machine(&text)?)
}

fn load_machine(spec: &str) -> Res<CounterMachine> {
    match load(spec)? {
        Artifact::Machine(m) => Ok(m),
        Artifact::Transducer(_) => Err(Error::PreconditionViolated(format!("{spec} is a transducer")).into()),
    }
}

fn load_transducer(spec: &str) -> Res<revbound::CounterTransducer> {
    match load(spec)? {
        Artifact::Transducer(t) => Ok(t),
        Artifact::Machine(_) => Err(Error::PreconditionViolated(format!("{spec} is not a transducer")).into()),
    }
}

/// Machine for a decision command; an unbounded reversal budget is refused.
fn load_decidable(spec: &str) -> Res<CounterMachine> {
    let m = load_machine(spec)?;
    if m.reversals().is_none() {
        return Err(Error::InfiniteBudget.into());
    }
    Ok(m)
}

fn load_dfa(spec: &str) -> Res<Dfa> {
    Ok(Dfa::from_machine(&load_machine(spec)?)?)
}

fn word(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn show(w: &[char]) -> String {
    w.iter().collect()
}

struct Report {
    command: &'static str,
    verdict: bool,
    witness: Option<Vec<char>>,
    details: Value,
    text: String,
}

impl Report {
    fn render(self, as_json: bool) -> Outcome {
        let code = if self.verdict { EXIT_TRUE } else { EXIT_FALSE };
        if !as_json {
            return Outcome::new(code, self.text);
        }
        let mut obj = json!({ "command": self.command, "verdict": self.verdict, "details": self.details });
        if let Some(w) = self.witness {
            obj["witness"] = Value::String(show(&w));
        }
        Outcome::new(code, format!("{obj}\n"))
    }
}

/// Parses `argv` (program name first) and executes the command.
pub fn run_cli<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_TRUE };
            return Outcome::new(code, e.render().to_string());
        }
    };
    let as_json = cli.json;
    match execute(cli.command) {
        Ok(report) => report.render(as_json),
        Err(Failure::Usage(msg)) => Outcome::new(EXIT_USAGE, format!("error: {msg}\n")),
        Err(Failure::Lib(e)) => {
            let code = exit_code(&e);
            if as_json {
                Outcome::new(code, format!("{}\n", json!({ "command": "error", "verdict": Value::Null, "details": e.to_string() })))
            } else {
                Outcome::new(code, format!("error: {e}\n"))
            }
        }
    }
}

fn execute(cmd: Command) -> Res<Report> {
    match cmd {
        Command::Validate { file } => validate(&file),
        Command::Run { file, word: w, trace } => run(&file, &word(&w), trace),
        Command::Member { file, word: w } => {
            let m = load_decidable(&file)?;
            let accepted = decide::member(&m, &word(&w))?;
            Ok(Report {
                command: "member",
                verdict: accepted,
                witness: None,
                details: json!({ "word": w }),
                text: format!("{}\n", if accepted { "accept" } else { "reject" }),
            })
        }
        Command::Enum { file, max_len } => {
            let m = load_decidable(&file)?;
            let words = decide::enumerate_words(&m, max_len)?;
            let list: Vec<String> = words.iter().map(|w| show(w)).collect();
            let text = list.iter().map(|w| format!("{w}\n")).collect();
            Ok(Report { command: "enum", verdict: true, witness: None, details: json!({ "words": list }), text })
        }
        Command::Empty { file, witness } => {
            let m = load_decidable(&file)?;
            Ok(match decide::is_empty(&m)? {
                Emptiness::Empty => {
                    Report { command: "empty", verdict: true, witness: None, details: json!({}), text: "empty\n".into() }
                }
                Emptiness::Nonempty(w) => {
                    let text = if witness { format!("nonempty\n{}\n", show(&w)) } else { "nonempty\n".into() };
                    Report { command: "empty", verdict: false, witness: witness.then_some(w), details: json!({}), text }
                }
            })
        }
        Command::Infinite { file } => {
            let m = load_decidable(&file)?;
            let inf = decide::is_infinite(&m)?;
            Ok(Report {
                command: "infinite",
                verdict: inf,
                witness: None,
                details: json!({}),
                text: format!("{}\n", if inf { "infinite" } else { "finite" }),
            })
        }
        Command::Parikh { file } => {
            let m = load_decidable(&file)?;
            let set = decide::parikh_image(&m)?.simplified();
            let letters: Vec<String> = m.alphabet().iter().map(|c| c.to_string()).collect();
            let text = if set.is_empty() { "empty\n".to_string() } else { format!("{set}\n") };
            let lines: Vec<String> = set.components.iter().map(|c| c.to_string()).collect();
            Ok(Report {
                command: "parikh",
                verdict: true,
                witness: None,
                details: json!({ "letters": letters, "components": lines }),
                text,
            })
        }
        Command::Compare { left, right, mode } => {
            let m1 = load_decidable(&left)?;
            let m2 = load_decidable(&right)?;
            let mode = match mode {
                ModeArg::Subset => CompareMode::Subset,
                ModeArg::Equal => CompareMode::Equal,
            };
            let c = decide::compare(&m1, &m2, mode)?;
            let text = match &c.counterexample {
                None => "holds\n".to_string(),
                Some(w) => format!("fails\n{}\n", show(w)),
            };
            Ok(Report {
                command: "compare",
                verdict: c.holds,
                witness: c.counterexample,
                details: json!({ "mode": format!("{mode:?}").to_lowercase() }),
                text,
            })
        }
        Command::Op { name, inputs, out, boolean, insertion, param, word: w } => {
            let opts = OpArgs { boolean, insertion, param, word: w };
            operation(&name, &inputs, out.as_deref(), &opts)
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => {
                let mut text = String::new();
                let mut entries = Vec::new();
                for name in corpus::names() {
                    let e = corpus::load_corpus(name)?;
                    text.push_str(&format!("{name}\t{}\n", e.description));
                    entries.push(json!({ "name": name, "description": e.description }));
                }
                Ok(Report { command: "corpus", verdict: true, witness: None, details: json!(entries), text })
            }
            CorpusAction::Get { name } => {
                let text = corpus::source_text(&name)?.to_string();
                Ok(Report { command: "corpus", verdict: true, witness: None, details: json!({ "name": name }), text })
            }
        },
    }
}

fn validate(file: &str) -> Res<Report> {
    let artifact = load(file)?;
    let report = match &artifact {
        Artifact::Machine(m) => validate_machine(m),
        Artifact::Transducer(t) => validate_transducer(t),
    };
    let problems: Vec<String> = report.violations.iter().map(|v| format!("{v:?}")).collect();
    let mut text = if report.is_ok() { "ok\n".to_string() } else { String::new() };
    for p in &problems {
        text.push_str(p);
        text.push('\n');
    }
    Ok(Report { command: "validate", verdict: report.is_ok(), witness: None, details: json!({ "violations": problems }), text })
}

fn run(file: &str, w: &[char], trace: bool) -> Res<Report> {
    let m = load_machine(file)?;
    if !(m.is_deterministic() && m.is_structurally_deterministic()) {
        let accepted = decide::member(&m, w)?;
        return Ok(Report {
            command: "run",
            verdict: accepted,
            witness: None,
            details: json!({ "verdict": if accepted { "accept" } else { "reject" } }),
            text: format!("{}\n", if accepted { "accept" } else { "reject" }),
        });
    }
    let t = run_deterministic(&m, w)?;
    let verdict = format!("{:?}", t.verdict).to_lowercase();
    let mut text = String::new();
    if trace {
        for s in &t.steps {
            let counters: Vec<String> = s.config.counters.iter().map(|c| c.to_string()).collect();
            text.push_str(&format!("{} {} [{}]\n", m.state_name(s.config.state), s.config.consumed, counters.join(",")));
        }
    }
    text.push_str(&verdict);
    text.push('\n');
    let mut details = json!({ "verdict": verdict, "steps": t.steps.len() });
    if let Some(c) = &t.certificate {
        details["certificate"] = json!({ "start": c.start, "end": c.end, "growth": c.growth });
    }
    Ok(Report { command: "run", verdict: t.verdict == revbound::Verdict::Accept, witness: None, details, text })
}

struct OpArgs {
    boolean: Option<String>,
    insertion: Option<String>,
    param: usize,
    word: Option<String>,
}

fn arity(name: &str, inputs: &[String], n: usize) -> Res<()> {
    if inputs.len() != n {
        return Err(Failure::Usage(format!("{name} takes {n} input file(s), got {}", inputs.len())));
    }
    Ok(())
}

fn operation(name: &str, inputs: &[String], out: Option<&Path>, opts: &OpArgs) -> Res<Report> {
    let artifact = match name {
        "intersect_regular" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(intersect_regular(&load_machine(&inputs[0])?, &load_dfa(&inputs[1])?)?)
        }
        "intersect_machines" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(intersect_machines(&load_machine(&inputs[0])?, &load_machine(&inputs[1])?)?)
        }
        "boolean_dcm" => {
            let mode = match opts.boolean.as_deref() {
                Some("not") => BooleanMode::Not,
                Some("and") => BooleanMode::And,
                Some("or") => BooleanMode::Or,
                other => return Err(Failure::Usage(format!("boolean_dcm needs --boolean not|and|or, got {other:?}"))),
            };
            arity(name, inputs, if mode == BooleanMode::Not { 1 } else { 2 })?;
            let m1 = load_machine(&inputs[0])?;
            let m2 = inputs.get(1).map(|f| load_machine(f)).transpose()?;
            Artifact::Machine(boolean_dcm(&m1, m2.as_ref(), mode)?)
        }
        "strip_end_marker_one_counter" => unary(name, inputs, strip_end_marker_one_counter)?,
        "make_non_exiting" => unary(name, inputs, make_non_exiting)?,
        "inverse_prefix_dcm1" => unary(name, inputs, inverse_prefix_dcm1)?,
        "enforce_reversal_control" => unary(name, inputs, |m| Ok(enforce_reversal_control(m)))?,
        "to_one_reversal" => unary(name, inputs, to_one_reversal)?,
        "concat_pf_dcmne_dcm" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(concat_pf_dcmne_dcm(&load_machine(&inputs[0])?, &load_machine(&inputs[1])?)?)
        }
        "concat_ncm" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(concat_ncm(&load_machine(&inputs[0])?, &load_machine(&inputs[1])?)?)
        }
        "concat_dcmne_regular" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(concat_dcmne_regular(&load_machine(&inputs[0])?, &load_dfa(&inputs[1])?)?)
        }
        "concat_dcm1_regular" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(concat_dcm1_regular(&load_machine(&inputs[0])?, &load_dfa(&inputs[1])?)?)
        }
        "concat_pf_regular_dcm" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(concat_pf_regular_dcm(&load_dfa(&inputs[0])?, &load_machine(&inputs[1])?)?)
        }
        "left_quotient_word" => {
            arity(name, inputs, 1)?;
            let w = opts.word.as_deref().ok_or_else(|| Failure::Usage("left_quotient_word needs --word".into()))?;
            Artifact::Machine(left_quotient_word(&load_machine(&inputs[0])?, &word(w))?)
        }
        "inverse_insertion_ncm" => {
            arity(name, inputs, 1)?;
            let op = match opts.insertion.as_deref() {
                Some("prefix") => InsertionOp::Prefix,
                Some("suffix") => InsertionOp::Suffix,
                Some("infix") => InsertionOp::Infix,
                Some("outfix") => InsertionOp::Outfix,
                Some("embed") => InsertionOp::Embed,
                other => {
                    return Err(Failure::Usage(format!(
                        "inverse_insertion_ncm needs --insertion prefix|suffix|infix|outfix|embed, got {other:?}"
                    )))
                }
            };
            Artifact::Machine(inverse_insertion_ncm(&load_machine(&inputs[0])?, op, opts.param)?)
        }
        "inverse_apply" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(inverse_apply(&load_transducer(&inputs[0])?, &load_machine(&inputs[1])?)?)
        }
        "forward_image_ncm" => {
            arity(name, inputs, 2)?;
            Artifact::Machine(forward_image_ncm(&load_transducer(&inputs[0])?, &load_machine(&inputs[1])?)?)
        }
        "to_null_transducer" => {
            arity(name, inputs, 1)?;
            Artifact::Transducer(to_null_transducer(&load_machine(&inputs[0])?)?)
        }
        "transduce" => {
            arity(name, inputs, 1)?;
            let w = opts.word.as_deref().ok_or_else(|| Failure::Usage("transduce needs --word".into()))?;
            let t = load_transducer(&inputs[0])?;
            return Ok(match transduce_det(&t, &word(w))? {
                Some(o) => Report {
                    command: "op",
                    verdict: true,
                    witness: None,
                    details: json!({ "output": show(&o) }),
                    text: format!("{}\n", show(&o)),
                },
                None => Report { command: "op", verdict: false, witness: None, details: json!({}), text: "reject\n".into() },
            });
        }
        _ => {
            return Err(Failure::Usage(format!("unknown operation {name:?}; known: {}", OPERATIONS.join(", "))));
        }
    };
    let text = serialize_artifact(&artifact);
    let m = artifact.machine();
    let details = json!({
        "operation": name,
        "states": m.num_states(),
        "counters": m.counters(),
        "deterministic": m.is_deterministic(),
    });
    match out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            let summary = format!("wrote {} ({} states, {} counters)\n", path.display(), m.num_states(), m.counters());
            Ok(Report { command: "op", verdict: true, witness: None, details, text: summary })
        }
        None => Ok(Report { command: "op", verdict: true, witness: None, details, text }),
    }
}

fn unary(name: &str, inputs: &[String], f: impl Fn(&CounterMachine) -> revbound::Result<CounterMachine>) -> Res<Artifact> {
    arity(name, inputs, 1)?;
    Ok(Artifact::Machine(f(&load_machine(&inputs[0])?)?))
}
