//! The `lh` command-line driver.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::harness::{diff_modes, run_fuzz, FuzzConfig};
use crate::metering::{eval_metered, series_json, write_series_csv};
use crate::semantics::{AxiomOracle, ChoosePolicy, Machine, Oracle, Outcome};
use crate::surface::{parse_file, parse_runtime_file, print, SourceFile};
use crate::syntax::{Mode, Term};
use crate::typecheck::{check_source_file, Checker};

pub const EXIT_VALUE: u8 = 0;
pub const EXIT_BLAME: u8 = 1;
pub const EXIT_TYPE_ERROR: u8 = 2;
pub const EXIT_STUCK: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "lh", version, about = "Run and check programs with manifest contracts")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Evaluation mode: classic, forgetful, heedful or eidetic.
    #[arg(long, global = true, default_value = "eidetic")]
    pub mode: Mode,
    /// Maximum number of reduction steps.
    #[arg(long, global = true, env = "LH_BUDGET", default_value_t = 100_000)]
    pub budget: usize,
    /// Print every step with the rule that took it.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Report space counters.
    #[arg(long, global = true)]
    pub space: bool,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// How heedful checks pick from a type set: lex-min or lex-max.
    #[arg(long, global = true, default_value = "lex-min")]
    pub choose: String,
    /// Implication oracle: alpha-eq, or axioms (needs --axioms).
    #[arg(long, global = true, default_value = "alpha-eq")]
    pub oracle: String,
    /// File of `T1 ==> T2` lines for the axioms oracle.
    #[arg(long, global = true)]
    pub axioms: Option<PathBuf>,
    /// Accept runtime-only forms and type-check as a runtime term.
    #[arg(long, global = true)]
    pub runtime_forms: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Eidetic,
            budget: 100_000,
            trace: false,
            space: false,
            json: false,
            choose: "lex-min".into(),
            oracle: "alpha-eq".into(),
            axioms: None,
            runtime_forms: false,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type-check a file as a source program in every mode.
    Check { file: PathBuf },
    /// Evaluate a file.
    Run {
        file: PathBuf,
        /// Write the per-step space series as CSV.
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Evaluate a file and print every step.
    Trace { file: PathBuf },
    /// Evaluate a file and report space counters.
    Space {
        file: PathBuf,
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Run a file in all four modes and compare the outcomes.
    Diff { file: PathBuf },
    /// Generate programs and run the differential checks on them.
    Fuzz {
        #[arg(long, default_value_t = 1_000)]
        count: usize,
        /// Fixed program size; sizes cycle through 5..=30 when absent.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip per-step trace checks.
        #[arg(long)]
        no_traces: bool,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// A failure before evaluation, with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> CliError {
        CliError { code, message: message.into() }
    }
}

type CliResult<T> = Result<T, CliError>;

impl RunConfig {
    pub fn machine(&self) -> CliResult<Machine> {
        let choose = ChoosePolicy::from_name(&self.choose)
            .ok_or_else(|| CliError::new(EXIT_TYPE_ERROR, format!("unknown choose policy `{}`", self.choose)))?;
        let oracle = match (self.oracle.as_str(), &self.axioms) {
            ("alpha-eq", None) => Oracle::AlphaEq,
            ("alpha-eq", Some(_)) => {
                return Err(CliError::new(EXIT_TYPE_ERROR, "--axioms needs --oracle axioms"));
            }
            ("axioms", Some(path)) => {
                let text = read(path)?;
                let ax = AxiomOracle::parse(&text)
                    .map_err(|e| CliError::new(EXIT_TYPE_ERROR, format!("{}: {e}", path.display())))?;
                Oracle::Axioms(ax)
            }
            ("axioms", None) => return Err(CliError::new(EXIT_TYPE_ERROR, "--oracle axioms needs --axioms")),
            (other, _) => return Err(CliError::new(EXIT_TYPE_ERROR, format!("unknown oracle `{other}`"))),
        };
        Ok(Machine::new(self.mode).with_oracle(oracle).with_choose(choose))
    }

    fn describe(&self, machine: &Machine) -> Value {
        json!({
            "mode": self.mode.name(),
            "budget": self.budget,
            "choose": machine.choose.name(),
            "oracle": machine.oracle.name(),
        })
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::new(EXIT_TYPE_ERROR, format!("{}: {e}", path.display())))
}

/// Parses and type-checks `path`, returning the program as one term.
pub fn load(path: &Path, config: &RunConfig, machine: &Machine) -> CliResult<(Term, String)> {
    let src = read(path)?;
    let at = |e: String| CliError::new(EXIT_TYPE_ERROR, format!("{}: {e}", path.display()));
    let file: SourceFile = if config.runtime_forms {
        parse_runtime_file(&src).map_err(|e| at(format!("parse error at {e}")))?
    } else {
        parse_file(&src).map_err(|e| at(format!("parse error at {e}")))?
    };
    let ty = if config.runtime_forms {
        Checker::for_machine(machine).check_file(&file)
    } else {
        check_source_file(&file)
    }
    .map_err(|e| at(format!("type error: {e}")))?;
    Ok((file.to_term(), ty.to_string()))
}

pub fn exit_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Value(_) => EXIT_VALUE,
        Outcome::Blamed(_) => EXIT_BLAME,
        Outcome::Stuck(_) | Outcome::Fault(_) => EXIT_STUCK,
        Outcome::BudgetExceeded => EXIT_BUDGET,
    }
}

fn write_csv(path: &Path, series: &[crate::metering::SpaceRow]) -> CliResult<()> {
    let f = fs::File::create(path).map_err(|e| CliError::new(EXIT_STUCK, format!("{}: {e}", path.display())))?;
    write_series_csv(f, series).map_err(|e| CliError::new(EXIT_STUCK, format!("{}: {e}", path.display())))
}

/// Evaluates one file under `config` and writes the report to `out`.
/// Returns the exit status.
pub fn run_file(
    path: &Path,
    config: &RunConfig,
    series_path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<u8> {
    let machine = config.machine()?;
    let (term, ty) = load(path, config, &machine)?;
    let mut report = json!({
        "command": "run",
        "file": path.display().to_string(),
        "type": ty,
        "config": config.describe(&machine),
    });

    let trace = config.trace.then(|| machine.trace(&term, config.budget));
    let metered = (config.space || series_path.is_some())
        .then(|| eval_metered(&machine, &term, config.budget, true));
    let (outcome, steps) = match (&trace, &metered) {
        (Some(t), _) => (t.outcome.clone(), t.rules.len()),
        (None, Some(m)) => (m.outcome.clone(), m.steps),
        (None, None) => {
            let ev = machine.eval(&term, config.budget);
            (ev.outcome, ev.steps)
        }
    };
    if let (Some(m), Some(p)) = (&metered, series_path) {
        write_csv(p, &m.series)?;
    }

    let io = |e: io::Error| CliError::new(EXIT_STUCK, format!("writing output: {e}"));
    if config.json {
        report["outcome"] = serde_json::to_value(&outcome).expect("outcome serializes");
        report["steps"] = json!(steps);
        if let Some(t) = &trace {
            report["trace"] = Value::Array(
                t.rules
                    .iter()
                    .zip(&t.terms[1..])
                    .enumerate()
                    .map(|(i, (r, e))| json!({"step": i + 1, "rule": r.to_string(), "term": print(e)}))
                    .collect(),
            );
        }
        if let Some(m) = &metered {
            report["space"] = json!({"max": m.max, "series": series_json(&m.series)});
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes")).map_err(io)?;
    } else {
        if let Some(t) = &trace {
            writeln!(out, "   0  {}", print(&t.terms[0])).map_err(io)?;
            for (i, (r, e)) in t.rules.iter().zip(&t.terms[1..]).enumerate() {
                writeln!(out, "{:>4}  {r}\n      {}", i + 1, print(e)).map_err(io)?;
            }
        }
        writeln!(out, "{outcome}").map_err(io)?;
        if let Some(m) = &metered {
            let s = m.max;
            writeln!(
                out,
                "steps={steps} pending={} chain={} max_reflist={} proxy_wrap={} live_types={}",
                s.pending, s.chain, s.max_reflist, s.proxy_wrap, s.live_types
            )
            .map_err(io)?;
            if series_path.is_none() {
                write_series_csv(&mut *out, &m.series)
                    .map_err(|e| CliError::new(EXIT_STUCK, format!("writing output: {e}")))?;
            }
        }
    }
    Ok(exit_code(&outcome))
}

fn check_file(path: &Path, config: &RunConfig, out: &mut dyn Write) -> CliResult<u8> {
    let machine = config.machine()?;
    let (_, ty) = load(path, config, &machine)?;
    let text = if config.json {
        serde_json::to_string_pretty(&json!({"command": "check", "file": path.display().to_string(), "type": ty}))
            .expect("report serializes")
    } else {
        format!("ok: {ty}")
    };
    writeln!(out, "{text}").map_err(|e| CliError::new(EXIT_STUCK, e.to_string()))?;
    Ok(0)
}

fn diff_file(path: &Path, config: &RunConfig, out: &mut dyn Write) -> CliResult<u8> {
    let machine = config.machine()?;
    let (term, _) = load(path, config, &machine)?;
    let report = diff_modes(&term, config.budget);
    let io = |e: io::Error| CliError::new(EXIT_STUCK, format!("writing output: {e}"));
    if config.json {
        let v = json!({"command": "diff", "file": path.display().to_string(), "report": report});
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("report serializes")).map_err(io)?;
    } else {
        for run in &report.runs {
            writeln!(out, "{:<10} {}  ({} steps)", run.mode.name(), run.outcome, run.steps).map_err(io)?;
        }
        for (mode, v) in report.verdicts() {
            writeln!(out, "{:<10} {}", mode.name(), verdict_text(v)).map_err(io)?;
        }
    }
    Ok(if report.failed() { 1 } else { 0 })
}

fn verdict_text(v: &crate::harness::Verdict) -> String {
    use crate::harness::Verdict;
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail(why) => format!("FAIL: {why}"),
        Verdict::Skipped(why) => format!("skipped: {why}"),
    }
}

fn fuzz(
    fuzz: FuzzConfig,
    report_path: Option<&Path>,
    json_out: bool,
    out: &mut dyn Write,
) -> CliResult<u8> {
    let report = run_fuzz(&fuzz);
    let io = |e: io::Error| CliError::new(EXIT_STUCK, format!("writing output: {e}"));
    if let Some(p) = report_path {
        let f = fs::File::create(p).map_err(|e| CliError::new(EXIT_STUCK, format!("{}: {e}", p.display())))?;
        serde_json::to_writer_pretty(f, &report).map_err(|e| CliError::new(EXIT_STUCK, e.to_string()))?;
    }
    if json_out {
        let v = json!({"command": "fuzz", "config": report.config, "summary": report.summary,
            "problems": report.problems().collect::<Vec<_>>()});
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("report serializes")).map_err(io)?;
    } else {
        let s = &report.summary;
        writeln!(
            out,
            "programs={} verdict_failures={} skipped={} stuck={} budget_exceeded={} trace_violations={} typing_disagreements={} nested_cast_ratio={:.3}",
            s.count, s.verdict_failures, s.skipped, s.stuck, s.budget_exceeded, s.trace_violations,
            s.typing_disagreements, s.nested_cast_ratio
        )
        .map_err(io)?;
        for item in report.problems().take(20) {
            writeln!(out, "seed={} size={} {}", item.seed, item.size, item.program).map_err(io)?;
            for (mode, v) in item.diff.verdicts() {
                if v.is_fail() {
                    writeln!(out, "  {}: {}", mode.name(), verdict_text(v)).map_err(io)?;
                }
            }
            for f in &item.findings {
                writeln!(out, "  {} step {}: {} {}", f.mode.name(), f.step, f.invariant, f.detail).map_err(io)?;
            }
        }
    }
    Ok(if report.ok() { 0 } else { 1 })
}

/// Runs a parsed command line, writing normal output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<u8> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Check { file } => check_file(file, cfg, out),
        Command::Run { file, series } => run_file(file, cfg, series.as_deref(), out),
        Command::Trace { file } => run_file(file, &RunConfig { trace: true, ..cfg.clone() }, None, out),
        Command::Space { file, series } => {
            run_file(file, &RunConfig { space: true, ..cfg.clone() }, series.as_deref(), out)
        }
        Command::Diff { file } => diff_file(file, cfg, out),
        Command::Fuzz { count, size, seed, no_traces, report } => {
            let f = FuzzConfig {
                count: *count,
                size: *size,
                seed: *seed,
                budget: cfg.budget,
                check_traces: !no_traces,
            };
            fuzz(f, report.as_deref(), cfg.json, out)
        }
    }
}

/// Entry point for the binary: parses `args`, runs on a large stack, and
/// prints errors to stderr.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_TYPE_ERROR } else { 0 });
        }
    };
    let worker = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            execute(&cli, &mut lock)
        })
        .expect("worker thread starts");
    match worker.join().expect("worker thread finishes") {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lh: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
