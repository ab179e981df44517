//! The `tracemon` command line: file formats, commands and reports.
//!
//! Exit codes: 0 clean, 1 findings, 2 input error, 3 search or expansion
//! bound exceeded. The global-expansion budget can be set through
//! `TRACEMON_STATE_BUDGET`.

mod config;
mod log;
mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use config::{parse_automaton, parse_dependence, parse_dfa, parse_tree, parse_word_file};
pub use log::{parse_log, serialize_log, EventLogRecord};
pub use report::{
    digest, AnalysisReport, Finding, EXIT_BOUND_EXCEEDED, EXIT_CLEAN, EXIT_FINDINGS,
    EXIT_INPUT_ERROR,
};

use crate::error::{Error, Result};
use crate::gossip::{replay, ProcessTree};
use crate::lang::is_trace_closed;
use crate::monitors::{
    detect_atomicity_violations, detect_races, execution_trace, is_serializable, Serializability,
    TransactionEnd,
};
use crate::program::{standard_alphabet, ConflictMode, ProgramExecution};
use crate::trace::{foata_normal_form, induced_dependence, ActionId, ProcessId};
use crate::zielonka::{RunOutcome, ZielonkaAutomaton, DEFAULT_STATE_BUDGET};

pub const BUDGET_ENV: &str = "TRACEMON_STATE_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "tracemon",
    version,
    about = "Trace-based monitoring of concurrent executions"
)]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Race,
    Atomicity,
}

impl From<ModeArg> for ConflictMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Race => ConflictMode::Race,
            ModeArg::Atomicity => ConflictMode::Atomicity,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report unordered conflicting accesses.
    Races { log: PathBuf },
    /// Report transactions interrupted by a dependent foreign event.
    Atomicity { log: PathBuf },
    /// Decide conflict serializability exactly.
    Serializable {
        log: PathBuf,
        /// Maximum number of search states.
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
    },
    /// Show the happens-before order of a log.
    Trace {
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Atomicity)]
        mode: ModeArg,
        /// Write the order as a DOT graph to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Replay tree gossip over a log and show per-process knowledge.
    Gossip {
        log: PathBuf,
        /// Process tree (TOML).
        #[arg(long)]
        tree: PathBuf,
        /// Monitored action (repeatable, or `;`-separated). Default: all.
        #[arg(long, value_delimiter = ';')]
        gamma: Vec<String>,
        /// Print a step-by-process table.
        #[arg(long)]
        table: bool,
    },
    /// Run a Zielonka automaton on a word.
    Zrun { automaton: PathBuf, word: PathBuf },
    /// Check properties of a Zielonka automaton (all when none is selected).
    Zcheck {
        automaton: PathBuf,
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        locally_rejecting: bool,
        #[arg(long)]
        nonblocking: bool,
        #[arg(long)]
        trace_closed: bool,
    },
    /// Check whether a DFA's language is closed under a dependence relation.
    DfaClosure { dfa: PathBuf, dependence: PathBuf },
}

/// Parses arguments, runs the command and writes the report. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT_ERROR
            } else {
                EXIT_CLEAN
            };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let budget = match state_budget(std::env::var(BUDGET_ENV).ok().as_deref()) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    match execute(&cli.command, budget) {
        Ok(report) => {
            let text = if cli.json {
                report.to_json()
            } else {
                report.to_text()
            };
            let _ = out.write_all(text.as_bytes());
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_resource() {
                EXIT_BOUND_EXCEEDED
            } else {
                EXIT_INPUT_ERROR
            }
        }
    }
}

/// Reads the state budget from the environment value, if any.
pub fn state_budget(env: Option<&str>) -> Result<usize> {
    match env {
        None => Ok(DEFAULT_STATE_BUDGET),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Io(format!(
                "{BUDGET_ENV} must be a positive integer, got `{s}`"
            ))),
        },
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn execute(cmd: &Command, budget: usize) -> Result<AnalysisReport> {
    match cmd {
        Command::Races { log } => with_log(log, races_report),
        Command::Atomicity { log } => with_log(log, atomicity_report),
        Command::Serializable { log, limit } => with_log(log, |e| serializable_report(e, *limit)),
        Command::Trace { log, mode, dot } => {
            let text = read(log)?;
            let exec = parse_log(&text)?;
            let (mut report, dot_text) = trace_report(&exec, (*mode).into())?;
            if let Some(path) = dot {
                std::fs::write(path, dot_text)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                report
                    .diagnostics
                    .push(format!("wrote DOT graph to {}", path.display()));
            }
            report.input_digest = digest(&[text.as_bytes()]);
            Ok(report)
        }
        Command::Gossip {
            log,
            tree,
            gamma,
            table,
        } => {
            let (log_text, tree_text) = (read(log)?, read(tree)?);
            let exec = parse_log(&log_text)?;
            let tree = parse_tree(&tree_text)?;
            let mut report = gossip_report(&exec, &tree, gamma, *table)?;
            report.input_digest = digest(&[log_text.as_bytes(), tree_text.as_bytes()]);
            Ok(report)
        }
        Command::Zrun { automaton, word } => {
            let (zt, wt) = (read(automaton)?, read(word)?);
            let z = parse_automaton(&zt)?;
            let w = parse_word_file(&wt)?;
            let outcome = z.run(&w)?;
            let mut report = AnalysisReport::new("zrun");
            report.text.push(format!("word: {w}"));
            report
                .text
                .push(format!("outcome: {}", outcome_text(&outcome)));
            match outcome {
                RunOutcome::Accepted => {}
                RunOutcome::Rejected => report.findings.push(Finding::new(
                    "rejected",
                    "the run ends outside the accepting states",
                    json!({ "word": w.to_string() }),
                )),
                RunOutcome::Stuck(pos) => report.findings.push(Finding::new(
                    "stuck",
                    format!(
                        "no transition for `{}` at position {pos}",
                        w.at(pos).expect("in range")
                    ),
                    json!({ "word": w.to_string(), "position": pos }),
                )),
            }
            report.result =
                Some(json!({ "outcome": serde_json::to_value(&outcome).expect("serializes") }));
            report.input_digest = digest(&[zt.as_bytes(), wt.as_bytes()]);
            Ok(report)
        }
        Command::Zcheck {
            automaton,
            deterministic,
            locally_rejecting,
            nonblocking,
            trace_closed,
        } => {
            let zt = read(automaton)?;
            let z = parse_automaton(&zt)?;
            let all = !(*deterministic || *locally_rejecting || *nonblocking || *trace_closed);
            let checks = ZChecks {
                deterministic: all || *deterministic,
                locally_rejecting: all || *locally_rejecting,
                nonblocking: all || *nonblocking,
                trace_closed: all || *trace_closed,
            };
            let mut report = zcheck_report(&z, checks, budget)?;
            report.input_digest = digest(&[zt.as_bytes()]);
            Ok(report)
        }
        Command::DfaClosure { dfa, dependence } => {
            let (dt, pt) = (read(dfa)?, read(dependence)?);
            let d = parse_dfa(&dt)?;
            let dep = parse_dependence(&pt)?;
            let mut report = AnalysisReport::new("dfa-closure");
            match is_trace_closed(&d, &dep)? {
                None => report.text.push("the language is trace-closed".into()),
                Some(w) => {
                    let (x, y) = w.words();
                    report.findings.push(Finding::new(
                        "not-trace-closed",
                        format!("`{x}` and `{y}` are equivalent but only one is accepted"),
                        json!({ "u": w.u.to_string(), "a": w.a, "b": w.b, "v": w.v.to_string() }),
                    ));
                }
            }
            report.input_digest = digest(&[dt.as_bytes(), pt.as_bytes()]);
            Ok(report)
        }
    }
}

fn with_log(
    path: &Path,
    f: impl FnOnce(&ProgramExecution) -> Result<AnalysisReport>,
) -> Result<AnalysisReport> {
    let text = read(path)?;
    let exec = parse_log(&text)?;
    let mut report = f(&exec)?;
    report.input_digest = digest(&[text.as_bytes()]);
    Ok(report)
}

/// The site tag of an event, or its position when untagged.
fn site(exec: &ProgramExecution, id: usize) -> String {
    exec.event(id)
        .site
        .clone()
        .unwrap_or_else(|| id.to_string())
}

fn event_text(exec: &ProgramExecution, id: usize) -> String {
    let e = exec.event(id);
    format!("{} ({} {})", site(exec, id), e.thread, e.kind())
}

pub fn races_report(exec: &ProgramExecution) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new("races");
    for r in detect_races(exec)? {
        report.findings.push(Finding::new(
            "race",
            format!(
                "`{}`: {} and {} are unordered",
                r.variable,
                event_text(exec, r.first),
                event_text(exec, r.second)
            ),
            json!({
                "first": r.first,
                "second": r.second,
                "first_site": site(exec, r.first),
                "second_site": site(exec, r.second),
                "variable": r.variable,
                "kinds": [r.kinds.0, r.kinds.1],
            }),
        ));
    }
    Ok(report)
}

pub fn atomicity_report(exec: &ProgramExecution) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new("atomicity");
    for v in detect_atomicity_violations(exec)? {
        let (end, end_site, end_text) = match v.end {
            TransactionEnd::Closed(b) => (json!(b), json!(site(exec, b)), site(exec, b)),
            TransactionEnd::Open => (Value::Null, Value::Null, "open".to_string()),
        };
        report.findings.push(Finding::new(
            "atomicity",
            format!(
                "transaction of {} from {} to {} is interrupted by {}",
                v.transaction_thread,
                site(exec, v.begin),
                end_text,
                event_text(exec, v.interloper)
            ),
            json!({
                "thread": v.transaction_thread,
                "begin": v.begin,
                "end": end,
                "interloper": v.interloper,
                "interloper_thread": v.interloper_thread,
                "begin_site": site(exec, v.begin),
                "end_site": end_site,
                "interloper_site": site(exec, v.interloper),
            }),
        ));
    }
    Ok(report)
}

pub fn serializable_report(exec: &ProgramExecution, limit: usize) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new("serializable");
    let verdict = is_serializable(exec, limit)?;
    match verdict {
        Serializability::Serializable => report.text.push("serializable".into()),
        Serializability::Violating => report.findings.push(Finding::new(
            "not-serializable",
            "no serial execution is equivalent to this one",
            Value::Null,
        )),
        Serializability::Unknown(n) => {
            report.bound_exceeded = true;
            report.diagnostics.push(format!(
                "search limit of {n} states reached without a verdict"
            ));
        }
    }
    report.result = Some(serde_json::to_value(verdict).expect("serializes"));
    Ok(report)
}

/// Returns the report together with the DOT rendering of the order.
pub fn trace_report(
    exec: &ProgramExecution,
    mode: ConflictMode,
) -> Result<(AnalysisReport, String)> {
    exec.validate()?;
    let trace = execution_trace(exec, mode)?;
    let alphabet = standard_alphabet(exec, mode)?;
    let foata = foata_normal_form(&exec.word(), &induced_dependence(&alphabet))?;
    let mode_name = match mode {
        ConflictMode::Race => "race",
        ConflictMode::Atomicity => "atomicity",
    };
    let mut report = AnalysisReport::new("trace");
    let events: Vec<Value> = (1..=exec.len())
        .map(|i| json!({ "id": i, "label": trace.labels()[i - 1], "site": exec.event(i).site }))
        .collect();
    report.text.push(format!("mode: {mode_name}"));
    for &(i, j) in trace.edges() {
        report.text.push(format!(
            "{} -> {}",
            event_text(exec, i),
            event_text(exec, j)
        ));
    }
    let steps: Vec<String> = foata
        .labels
        .iter()
        .map(|s| s.iter().map(ActionId::as_str).collect::<Vec<_>>().join(" "))
        .collect();
    report.text.push(format!(
        "steps: {}",
        if steps.is_empty() {
            "ε".to_string()
        } else {
            steps.join(" | ")
        }
    ));
    report.result = Some(json!({
        "mode": mode_name,
        "events": events,
        "edges": trace.edges(),
        "steps": foata.steps,
    }));
    Ok((report, trace.to_dot()))
}

fn preorder(tree: &ProcessTree) -> Vec<ProcessId> {
    let mut out = Vec::new();
    let mut stack = vec![tree.root().clone()];
    while let Some(p) = stack.pop() {
        stack.extend(tree.children(&p).iter().rev().cloned());
        out.push(p);
    }
    out
}

pub fn gossip_report(
    exec: &ProgramExecution,
    tree: &ProcessTree,
    gamma: &[String],
    table: bool,
) -> Result<AnalysisReport> {
    exec.validate()?;
    let alphabet = standard_alphabet(exec, ConflictMode::Atomicity)?;
    let gamma: BTreeSet<ActionId> = if gamma.is_empty() {
        alphabet.actions().cloned().collect()
    } else {
        gamma
            .iter()
            .map(|g| {
                ActionId::try_new(g.trim())
                    .ok_or_else(|| Error::structural("empty action in --gamma"))
            })
            .collect::<Result<_>>()?
    };
    let word = exec.word();
    let snapshots = replay(&word, &alphabet, tree, &gamma)?;
    let rows = preorder(tree);

    let mut records = Vec::new();
    for (step, snap) in snapshots.iter().enumerate() {
        let mut knowledge = serde_json::Map::new();
        for p in &rows {
            let dag = snap.knowledge_of(p)?;
            let (nodes, frontier) = snap.storage(p)?;
            knowledge.insert(
                p.to_string(),
                json!({
                    "nodes": dag.nodes(),
                    "edges": dag.edges(),
                    "stored_nodes": nodes,
                    "frontier_records": frontier,
                }),
            );
        }
        let (action, site_tag) = if step == 0 {
            (Value::Null, Value::Null)
        } else {
            (json!(word.at(step)), json!(site(exec, step)))
        };
        records.push(
            json!({ "step": step, "action": action, "site": site_tag, "knowledge": knowledge }),
        );
    }

    let mut report = AnalysisReport::new("gossip");
    let labels: Vec<String> = (1..snapshots.len()).map(|i| site(exec, i)).collect();
    let rendered = crate::gossip::render_table(&snapshots, &labels, &rows);
    if table {
        report.text.push(rendered.trim_end().to_string());
    } else if let Some(last) = snapshots.last() {
        for p in &rows {
            report.text.push(format!("{p}: {}", last.knowledge_of(p)?));
        }
    }
    let mut result = json!({
        "gamma": gamma,
        "processes": rows,
        "snapshots": records,
    });
    if table {
        result["table"] = json!(rendered);
    }
    report.result = Some(result);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZChecks {
    pub deterministic: bool,
    pub locally_rejecting: bool,
    pub nonblocking: bool,
    pub trace_closed: bool,
}

pub fn zcheck_report(
    z: &ZielonkaAutomaton,
    checks: ZChecks,
    budget: usize,
) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new("zcheck");
    let deterministic = z.is_deterministic();
    if checks.deterministic {
        if deterministic {
            report.text.push("deterministic: yes".into());
        } else {
            report.findings.push(Finding::new(
                "nondeterministic",
                "some action has two transitions from one state",
                Value::Null,
            ));
        }
    }
    if checks.locally_rejecting {
        let r = z.check_locally_rejecting(budget)?;
        report.text.push(format!(
            "locally rejecting: {}",
            if r.is_ok() { "yes" } else { "no" }
        ));
        for c in &r.soundness {
            report.findings.push(Finding::new(
                "unsound-rejection",
                format!(
                    "after `{}` state {} rejects although `{}` still leads to acceptance",
                    c.path, c.state, c.continuation
                ),
                serde_json::to_value(c).expect("serializes"),
            ));
        }
        for c in &r.completeness {
            report.findings.push(Finding::new(
                "silent-failure",
                format!(
                    "after `{}` state {} cannot accept but no process rejects",
                    c.path, c.state
                ),
                serde_json::to_value(c).expect("serializes"),
            ));
        }
        for g in &r.knowledge_gaps {
            report.diagnostics.push(format!(
                "{} in state {} can only continue to failure but is not rejecting",
                g.process, g.local_state
            ));
        }
    }
    if checks.nonblocking {
        let blocked = z.check_nonblocking(budget)?;
        report.text.push(format!(
            "non-blocking: {}",
            if blocked.is_empty() { "yes" } else { "no" }
        ));
        for b in &blocked {
            report.findings.push(Finding::new(
                "blocking",
                format!(
                    "after `{}` action `{}` is disabled in {}",
                    b.path, b.action, b.state
                ),
                serde_json::to_value(b).expect("serializes"),
            ));
        }
    }
    if checks.trace_closed {
        if deterministic {
            match z.check_trace_closed(budget)? {
                None => report.text.push("trace-closed: yes".into()),
                Some(w) => report.findings.push(Finding::new(
                    "not-trace-closed",
                    format!("`{}` and `{}` disagree", w.words().0, w.words().1),
                    serde_json::to_value(&w).expect("serializes"),
                )),
            }
        } else {
            report
                .diagnostics
                .push("trace-closure check skipped: it needs a deterministic automaton".into());
        }
    }
    Ok(report)
}

fn outcome_text(o: &RunOutcome) -> String {
    match o {
        RunOutcome::Accepted => "accepted".into(),
        RunOutcome::Rejected => "rejected".into(),
        RunOutcome::Stuck(p) => format!("stuck at position {p}"),
    }
}
