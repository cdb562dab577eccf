//! Command-line front end.
//!
//! Every subcommand prints human-readable text by default. With `--json` it
//! prints a single document `{command, inputs, result, diagnostics}`; big
//! integers are encoded as decimal strings.
//!
//! Exit status: 0 success, 1 usage or input error, 2 positivity unknown,
//! 3 verification mismatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::compiler::{compile, positivity_check, verify, Positivity, Stage, StageStatus};
use crate::numseq::{eval_sequence, generating_function, Recurrence};
use crate::parametric::{expand_parametric, looks_parametric, parse_parametric, ParametricRule};
use crate::rule::{parse_rule, print_rule, SuccessionRule};
use crate::tree::{expand, export_dot, DotOptions, LevelProfile, DEFAULT_NODE_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ecorules", version, about = "Succession rules for linear recurrences")]
struct Cli {
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Largest accepted --depth.
    #[arg(long, global = true, default_value_t = 64)]
    max_depth: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// Comma-separated coefficients a_1,..,a_k.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,

    /// `default`, or f_1,..,f_{k-1}.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,

    /// Rule file, either concrete or parametric.
    #[arg(long)]
    rule: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct StageArgs {
    #[arg(long, value_enum, default_value_t = StageArg::Ordinary)]
    stage: StageArg,

    /// Comma-separated q_2,..,q_k for the ordinary stage.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Terms f_0..f_depth of the recurrence.
    Seq {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Rational generating function.
    Gf {
        #[command(flatten)]
        src: Source,
    },
    /// Emit the rule of one pipeline stage.
    Compile {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        stage: StageArgs,
    },
    /// Search for a positivity witness.
    Positivity {
        #[command(flatten)]
        src: Source,
    },
    /// Level totals of a rule file or a compiled stage.
    Expand {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        stage: StageArgs,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Also print the signed label counts of each level.
        #[arg(long)]
        labels: bool,
    },
    /// Compare every stage against the recurrence.
    Verify {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Graphviz export of the generating tree.
    Dot {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        stage: StageArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// One node per (level, label).
        #[arg(long)]
        compact: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StageArg {
    Extended,
    Jumpfree,
    Ordinary,
    Generic,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Extended => Stage::Extended,
            StageArg::Jumpfree => Stage::JumpFree,
            StageArg::Ordinary => Stage::Ordinary,
            StageArg::Generic => Stage::Generic,
        }
    }
}

struct Outcome {
    text: String,
    result: Value,
    diagnostics: Vec<String>,
    code: i32,
}

impl Outcome {
    fn ok(text: String, result: Value) -> Self {
        Self { text, result, diagnostics: Vec::new(), code: EXIT_OK }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let name = command_name(&cli.command);
    let inputs = inputs_json(&cli.command);
    match execute(&cli) {
        Ok(outcome) => {
            if cli.json {
                let doc = json!({
                    "command": name,
                    "inputs": inputs,
                    "result": outcome.result,
                    "diagnostics": outcome.diagnostics,
                });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            } else {
                let _ = write!(out, "{}", outcome.text);
                for d in &outcome.diagnostics {
                    let _ = writeln!(err, "note: {d}");
                }
            }
            outcome.code
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Seq { .. } => "seq",
        Command::Gf { .. } => "gf",
        Command::Compile { .. } => "compile",
        Command::Positivity { .. } => "positivity",
        Command::Expand { .. } => "expand",
        Command::Verify { .. } => "verify",
        Command::Dot { .. } => "dot",
    }
}

fn inputs_json(cmd: &Command) -> Value {
    let src_json = |s: &Source| {
        json!({
            "coeffs": s.coeffs,
            "init": s.init.clone().unwrap_or_else(|| "default".into()),
            "rule": s.rule.as_ref().map(|p| p.display().to_string()),
        })
    };
    let mut v = match cmd {
        Command::Seq { src, .. }
        | Command::Gf { src }
        | Command::Compile { src, .. }
        | Command::Positivity { src }
        | Command::Expand { src, .. }
        | Command::Verify { src, .. }
        | Command::Dot { src, .. } => src_json(src),
    };
    let obj = v.as_object_mut().expect("object");
    match cmd {
        Command::Seq { depth, .. } | Command::Verify { depth, .. } => {
            obj.insert("depth".into(), json!(depth));
        }
        Command::Compile { stage, .. } => {
            obj.insert("stage".into(), json!(Stage::from(stage.stage).to_string()));
            obj.insert("q".into(), json!(stage.q));
        }
        Command::Expand { stage, depth, .. } | Command::Dot { stage, depth, .. } => {
            obj.insert("stage".into(), json!(Stage::from(stage.stage).to_string()));
            obj.insert("q".into(), json!(stage.q));
            obj.insert("depth".into(), json!(depth));
        }
        Command::Gf { .. } | Command::Positivity { .. } => {}
    }
    v
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("{what}: '{}' is not an integer", t.trim())))
        .collect()
}

fn recurrence(src: &Source) -> Result<Recurrence, String> {
    if src.rule.is_some() {
        return Err("this command takes --coeffs, not --rule".into());
    }
    let Some(coeffs) = &src.coeffs else {
        return Err("--coeffs is required".into());
    };
    let coeffs: Vec<BigInt> = parse_list(coeffs, "--coeffs")?;
    let rec = match src.init.as_deref() {
        None | Some("default") => Recurrence::with_default_inits(coeffs),
        Some("") => Recurrence::with_inits(coeffs, Vec::<BigInt>::new()),
        Some(h) => Recurrence::with_inits(coeffs, parse_list::<BigInt>(h, "--init")?),
    };
    rec.map_err(|e| e.to_string())
}

enum Loaded {
    Concrete(SuccessionRule),
    Parametric(ParametricRule),
}

/// Rule from `--rule`, or the requested stage compiled from `--coeffs`.
fn load_rule(src: &Source, stage: &StageArgs) -> Result<(Loaded, Vec<String>), String> {
    match (&src.rule, &src.coeffs) {
        (Some(_), Some(_)) => Err("give either --coeffs or --rule, not both".into()),
        (None, None) => Err("one of --coeffs or --rule is required".into()),
        (Some(path), None) => {
            if src.init.is_some() || stage.q.is_some() {
                return Err("--init and --q apply to --coeffs only".into());
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let loaded = if looks_parametric(&text) {
                Loaded::Parametric(parse_parametric(&text).map_err(|e| e.to_string())?)
            } else {
                Loaded::Concrete(parse_rule(&text).map_err(|e| e.to_string())?)
            };
            Ok((loaded, Vec::new()))
        }
        (None, Some(_)) => {
            let rec = recurrence(src)?;
            let (rule, diags) = compile_stage(&rec, stage)?;
            Ok((Loaded::Concrete(rule.rule), diags))
        }
    }
}

fn compile_stage(
    rec: &Recurrence,
    stage: &StageArgs,
) -> Result<(crate::compiler::Compiled, Vec<String>), String> {
    let q = stage.q.as_deref().map(|s| parse_list::<i64>(s, "--q")).transpose()?;
    let compiled = compile(rec, stage.stage.into(), q.as_deref()).map_err(|e| e.to_string())?;
    let mut diags = Vec::new();
    if compiled.stage == Stage::Ordinary && !compiled.is_ordinary {
        diags.push("no positivity witness for this q; the rule keeps marked labels".into());
    }
    if compiled.stage != Stage::from(stage.stage) {
        diags.push(format!("explicit initial conditions: compiled the {} stage", compiled.stage));
    }
    Ok((compiled, diags))
}

fn check_depth(depth: usize, cap: usize) -> Result<(), String> {
    if depth > cap {
        Err(format!("--depth {depth} exceeds the cap of {cap} (raise it with --max-depth)"))
    } else {
        Ok(())
    }
}

fn big_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn join(v: &[impl ToString]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn execute(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::Seq { src, depth } => {
            check_depth(*depth, cli.max_depth)?;
            let terms = eval_sequence(&recurrence(src)?, *depth);
            Ok(Outcome::ok(format!("{}\n", join(&terms)), json!({ "terms": big_json(&terms) })))
        }
        Command::Gf { src } => {
            let gf = generating_function(&recurrence(src)?);
            Ok(Outcome::ok(
                format!("{gf}\n"),
                json!({
                    "numerator": big_json(gf.numerator()),
                    "denominator": big_json(gf.denominator()),
                    "text": gf.to_string(),
                }),
            ))
        }
        Command::Compile { src, stage } => {
            let rec = recurrence(src)?;
            let (compiled, diagnostics) = compile_stage(&rec, stage)?;
            let text = print_rule(&compiled.rule);
            let result = json!({
                "stage": compiled.stage.to_string(),
                "kind": compiled.rule.classify().to_string(),
                "is_ordinary": compiled.is_ordinary,
                "qr": compiled.qr,
                "rule": text,
            });
            Ok(Outcome { text, result, diagnostics, code: EXIT_OK })
        }
        Command::Positivity { src } => {
            let rec = recurrence(src)?;
            if !rec.inits().is_default() {
                return Err("positivity applies to default initial conditions only".into());
            }
            let p = positivity_check(&rec);
            let result = serde_json::to_value(&p).map_err(|e| e.to_string())?;
            Ok(match &p {
                Positivity::Witness(w) => Outcome::ok(
                    format!("witness\nq = {}\nr = {}\nslack = {}\n", join(&w.qr.q), join(&w.qr.r), join(&w.slack)),
                    result,
                ),
                Positivity::Unknown { reason } => Outcome {
                    text: format!("unknown: {reason}\n"),
                    result,
                    diagnostics: Vec::new(),
                    code: EXIT_UNKNOWN,
                },
            })
        }
        Command::Expand { src, stage, depth, labels } => {
            check_depth(*depth, cli.max_depth)?;
            let (loaded, diagnostics) = load_rule(src, stage)?;
            let profiles = match &loaded {
                Loaded::Concrete(rule) => expand(rule, *depth),
                Loaded::Parametric(rule) => expand_parametric(rule, *depth).map_err(|e| e.to_string())?,
            };
            let totals: Vec<BigInt> = profiles.iter().map(|p| p.total.clone()).collect();
            let mut text = format!("{}\n", join(&totals));
            if *labels {
                for p in &profiles {
                    text.push_str(&format!("level {}: {}\n", p.level, profile_text(p)));
                }
            }
            let result = json!({
                "totals": big_json(&totals),
                "levels": profiles.iter().map(profile_json).collect::<Vec<_>>(),
            });
            Ok(Outcome { text, result, diagnostics, code: EXIT_OK })
        }
        Command::Verify { src, depth } => {
            check_depth(*depth, cli.max_depth)?;
            let report = verify(&recurrence(src)?, *depth);
            let mut text = format!("expected: {}\n", join(&report.expected));
            for s in &report.stages {
                let line = match &s.status {
                    StageStatus::Matched => "match".to_string(),
                    StageStatus::Diverged { level, expected, actual } => {
                        format!("MISMATCH at level {level}: expected {expected}, got {actual}")
                    }
                    StageStatus::Skipped { reason } => format!("skipped ({reason})"),
                };
                text.push_str(&format!("{}: {line}\n", s.stage));
            }
            let result = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            let code = if report.all_match() { EXIT_OK } else { EXIT_MISMATCH };
            Ok(Outcome { text, result, diagnostics: Vec::new(), code })
        }
        Command::Dot { src, stage, depth, compact, node_cap, out } => {
            check_depth(*depth, cli.max_depth)?;
            let (loaded, diagnostics) = load_rule(src, stage)?;
            let rule = match loaded {
                Loaded::Concrete(rule) => rule,
                Loaded::Parametric(rule) => rule.unfold(*depth).map_err(|e| e.to_string())?,
            };
            let opts = DotOptions { compact: *compact, node_cap: *node_cap };
            let dot = export_dot(&rule, *depth, opts).map_err(|e| e.to_string())?;
            match out {
                Some(path) => {
                    std::fs::write(path, &dot).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                    Ok(Outcome {
                        text: String::new(),
                        result: json!({ "path": path.display().to_string() }),
                        diagnostics,
                        code: EXIT_OK,
                    })
                }
                None => Ok(Outcome { text: dot.clone(), result: json!({ "dot": dot }), diagnostics, code: EXIT_OK }),
            }
        }
    }
}

fn profile_text(p: &LevelProfile) -> String {
    p.signed_counts
        .iter()
        .map(|(label, c)| {
            let shown = if c < &BigInt::from(0) { label.mark() } else { *label };
            let m = if c < &BigInt::from(0) { -c.clone() } else { c.clone() };
            if m == BigInt::from(1) {
                shown.to_string()
            } else {
                format!("{shown}^{m}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn profile_json(p: &LevelProfile) -> Value {
    json!({
        "level": p.level,
        "total": p.total.to_string(),
        "counts": p.signed_counts.iter().map(|(l, c)| json!({
            "label": l.to_string(),
            "count": c.to_string(),
        })).collect::<Vec<_>>(),
    })
}
