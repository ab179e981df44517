//! Typed concurrent-program events, the race and atomicity conflict
//! relations, and the standard thread/variable process decomposition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{ActionId, DistributedAlphabet, ProcessId, Word};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

id_type!(ThreadId);
id_type!(VariableId);
id_type!(LockId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Read,
    Write,
    Acquire,
    Release,
    Begin,
    End,
    Cas,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Read => "read",
            OpKind::Write => "write",
            OpKind::Acquire => "acquire",
            OpKind::Release => "release",
            OpKind::Begin => "begin",
            OpKind::End => "end",
            OpKind::Cas => "cas",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an event does; field presence follows from the variant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    Read {
        var: VariableId,
        value: Option<String>,
    },
    Write {
        var: VariableId,
        value: Option<String>,
    },
    Acquire {
        lock: LockId,
    },
    Release {
        lock: LockId,
    },
    Begin,
    End,
    Cas {
        var: VariableId,
        old: String,
        new: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramEvent {
    pub thread: ThreadId,
    pub op: Op,
    /// Free-form source location, e.g. a program line number.
    pub site: Option<String>,
}

impl ProgramEvent {
    pub fn new(thread: impl Into<ThreadId>, op: Op) -> Self {
        ProgramEvent {
            thread: thread.into(),
            op,
            site: None,
        }
    }

    pub fn at(mut self, site: impl Into<String>) -> Self {
        self.site = Some(site.into());
        self
    }

    pub fn read(t: &str, x: &str) -> Self {
        Self::new(
            t,
            Op::Read {
                var: x.into(),
                value: None,
            },
        )
    }

    pub fn write(t: &str, x: &str) -> Self {
        Self::new(
            t,
            Op::Write {
                var: x.into(),
                value: None,
            },
        )
    }

    pub fn acquire(t: &str, l: &str) -> Self {
        Self::new(t, Op::Acquire { lock: l.into() })
    }

    pub fn release(t: &str, l: &str) -> Self {
        Self::new(t, Op::Release { lock: l.into() })
    }

    pub fn begin(t: &str) -> Self {
        Self::new(t, Op::Begin)
    }

    pub fn end(t: &str) -> Self {
        Self::new(t, Op::End)
    }

    pub fn cas(t: &str, x: &str, old: &str, new: &str) -> Self {
        Self::new(
            t,
            Op::Cas {
                var: x.into(),
                old: old.into(),
                new: new.into(),
            },
        )
    }

    pub fn kind(&self) -> OpKind {
        match self.op {
            Op::Read { .. } => OpKind::Read,
            Op::Write { .. } => OpKind::Write,
            Op::Acquire { .. } => OpKind::Acquire,
            Op::Release { .. } => OpKind::Release,
            Op::Begin => OpKind::Begin,
            Op::End => OpKind::End,
            Op::Cas { .. } => OpKind::Cas,
        }
    }

    /// Variable accessed, if any.
    pub fn variable(&self) -> Option<&VariableId> {
        match &self.op {
            Op::Read { var, .. } | Op::Write { var, .. } | Op::Cas { var, .. } => Some(var),
            _ => None,
        }
    }

    pub fn lock(&self) -> Option<&LockId> {
        match &self.op {
            Op::Acquire { lock } | Op::Release { lock } => Some(lock),
            _ => None,
        }
    }

    /// Writes and CAS both count as writing accesses.
    pub fn is_write_access(&self) -> bool {
        matches!(self.op, Op::Write { .. } | Op::Cas { .. })
    }

    /// Action label: `(op, thread, variable-or-lock)`, values dropped.
    pub fn action(&self) -> ActionId {
        let t = &self.thread;
        ActionId::new(match &self.op {
            Op::Read { var, .. } => format!("r({t},{var})"),
            Op::Write { var, .. } => format!("w({t},{var})"),
            Op::Cas { var, .. } => format!("cas({t},{var})"),
            Op::Acquire { lock } => format!("acq({t},{lock})"),
            Op::Release { lock } => format!("rel({t},{lock})"),
            Op::Begin => format!("beg({t})"),
            Op::End => format!("en({t})"),
        })
    }
}

impl fmt::Display for ProgramEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.action())
    }
}

/// Same thread, or acquire/release of the same lock.
pub fn race_conflict(a: &ProgramEvent, b: &ProgramEvent) -> bool {
    a.thread == b.thread || matches!((a.lock(), b.lock()), (Some(x), Some(y)) if x == y)
}

/// Same thread, or accesses to the same variable with at least one write.
pub fn atomicity_conflict(a: &ProgramEvent, b: &ProgramEvent) -> bool {
    if a.thread == b.thread {
        return true;
    }
    match (a.variable(), b.variable()) {
        (Some(x), Some(y)) => x == y && (a.is_write_access() || b.is_write_access()),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictMode {
    Race,
    Atomicity,
}

impl ConflictMode {
    pub fn conflict(self, a: &ProgramEvent, b: &ProgramEvent) -> bool {
        match self {
            ConflictMode::Race => race_conflict(a, b),
            ConflictMode::Atomicity => atomicity_conflict(a, b),
        }
    }
}

impl fmt::Display for ConflictMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConflictMode::Race => "race",
            ConflictMode::Atomicity => "atomicity",
        })
    }
}

/// A linear log of program events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProgramExecution {
    pub events: Vec<ProgramEvent>,
}

/// A `begin` and its matching `end` on one thread (1-based event ids).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transaction {
    pub begin: usize,
    /// `None` while the transaction is still open at the end of the log.
    pub end: Option<usize>,
}

impl ProgramExecution {
    pub fn new(events: Vec<ProgramEvent>) -> Self {
        ProgramExecution { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event at 1-based position `id`.
    pub fn event(&self, id: usize) -> &ProgramEvent {
        &self.events[id - 1]
    }

    pub fn threads(&self) -> BTreeSet<ThreadId> {
        self.events.iter().map(|e| e.thread.clone()).collect()
    }

    pub fn variables(&self) -> BTreeSet<VariableId> {
        self.events
            .iter()
            .filter_map(|e| e.variable().cloned())
            .collect()
    }

    pub fn locks(&self) -> BTreeSet<LockId> {
        self.events
            .iter()
            .filter_map(|e| e.lock().cloned())
            .collect()
    }

    pub fn word(&self) -> Word {
        self.events.iter().map(ProgramEvent::action).collect()
    }

    /// Checks begin/end alternation per thread and lock discipline, with the
    /// 1-based position of the first offending event.
    pub fn validate(&self) -> Result<()> {
        let mut open: BTreeMap<&ThreadId, usize> = BTreeMap::new();
        let mut held: BTreeMap<&LockId, &ThreadId> = BTreeMap::new();
        for (i, e) in self.events.iter().enumerate() {
            let pos = i + 1;
            let fail = |reason: String| {
                Err(Error::MalformedExecution {
                    position: pos,
                    reason,
                })
            };
            match &e.op {
                Op::Begin => {
                    if let Some(b) = open.insert(&e.thread, pos) {
                        return fail(format!(
                            "nested begin on thread {} (transaction open since event {b})",
                            e.thread
                        ));
                    }
                }
                Op::End => {
                    if open.remove(&e.thread).is_none() {
                        return fail(format!("end without begin on thread {}", e.thread));
                    }
                }
                Op::Acquire { lock } => {
                    if let Some(owner) = held.insert(lock, &e.thread) {
                        return fail(format!("lock {lock} acquired while held by {owner}"));
                    }
                }
                Op::Release { lock } => match held.remove(lock) {
                    Some(owner) if owner == &e.thread => {}
                    Some(owner) => {
                        return fail(format!(
                            "lock {lock} released by {} but held by {owner}",
                            e.thread
                        ))
                    }
                    None => return fail(format!("lock {lock} released while not held")),
                },
                _ => {}
            }
        }
        Ok(())
    }

    /// Transactions per thread, in order of their begin events.
    pub fn transactions(&self) -> Vec<(ThreadId, Transaction)> {
        let mut open: BTreeMap<&ThreadId, usize> = BTreeMap::new();
        let mut out = Vec::new();
        for (i, e) in self.events.iter().enumerate() {
            match e.op {
                Op::Begin => {
                    open.insert(&e.thread, i + 1);
                }
                Op::End => {
                    if let Some(b) = open.remove(&e.thread) {
                        out.push((
                            e.thread.clone(),
                            Transaction {
                                begin: b,
                                end: Some(i + 1),
                            },
                        ));
                    }
                }
                _ => {}
            }
        }
        out.extend(open.into_iter().map(|(t, b)| {
            (
                t.clone(),
                Transaction {
                    begin: b,
                    end: None,
                },
            )
        }));
        out.sort_by_key(|(_, tx)| tx.begin);
        out
    }
}

impl FromIterator<ProgramEvent> for ProgramExecution {
    fn from_iter<I: IntoIterator<Item = ProgramEvent>>(iter: I) -> Self {
        ProgramExecution::new(iter.into_iter().collect())
    }
}

/// Name of the process caching variable `x` for thread `t`.
pub fn cache_process(t: &ThreadId, x: &VariableId) -> ProcessId {
    ProcessId::new(format!("<{t},{x}>"))
}

/// Name of the process owning lock `l`.
pub fn lock_process(l: &LockId) -> ProcessId {
    ProcessId::new(format!("lock({l})"))
}

/// The process decomposition whose induced dependence is the conflict
/// relation of `mode` on the actions of `exec`.
///
/// Atomicity mode uses one process per thread and one cache process
/// `<T,x>` per thread using `x`; a write or CAS on `x` touches every cache
/// of `x`. Race mode uses one process per thread and one per lock.
pub fn standard_alphabet(
    exec: &ProgramExecution,
    mode: ConflictMode,
) -> Result<DistributedAlphabet> {
    let threads = exec.threads();
    let mut processes: BTreeSet<ProcessId> = threads
        .iter()
        .map(|t| ProcessId::new(t.0.clone()))
        .collect();

    let mut users: BTreeMap<&VariableId, BTreeSet<&ThreadId>> = BTreeMap::new();
    for e in &exec.events {
        if let Some(x) = e.variable() {
            users.entry(x).or_default().insert(&e.thread);
        }
    }

    let mut extra = BTreeSet::new();
    match mode {
        ConflictMode::Atomicity => {
            for (x, ts) in &users {
                for t in ts {
                    extra.insert(cache_process(t, x));
                }
            }
        }
        ConflictMode::Race => {
            for l in exec.locks() {
                extra.insert(lock_process(&l));
            }
        }
    }
    if let Some(clash) = extra.iter().find(|p| processes.contains(*p)) {
        return Err(Error::InvalidAlphabet(format!(
            "thread name `{clash}` collides with a generated process name"
        )));
    }
    processes.extend(extra);

    let mut dom: BTreeMap<ActionId, BTreeSet<ProcessId>> = BTreeMap::new();
    for e in &exec.events {
        let t = ProcessId::new(e.thread.0.clone());
        let mut d = BTreeSet::from([t]);
        match (mode, &e.op) {
            (ConflictMode::Atomicity, Op::Read { var, .. }) => {
                d.insert(cache_process(&e.thread, var));
            }
            (ConflictMode::Atomicity, Op::Write { var, .. } | Op::Cas { var, .. }) => {
                d.extend(users[var].iter().map(|u| cache_process(u, var)));
            }
            (ConflictMode::Race, Op::Acquire { lock } | Op::Release { lock }) => {
                d.insert(lock_process(lock));
            }
            _ => {}
        }
        dom.insert(e.action(), d);
    }
    DistributedAlphabet::new(processes, dom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::induced_dependence;

    #[test]
    fn race_conflict_cases() {
        assert!(race_conflict(
            &ProgramEvent::acquire("T1", "L"),
            &ProgramEvent::release("T2", "L")
        ));
        assert!(!race_conflict(
            &ProgramEvent::read("T1", "x"),
            &ProgramEvent::write("T2", "x")
        ));
        let e = ProgramEvent::write("T1", "x");
        assert!(race_conflict(&e, &e));
        assert!(!race_conflict(
            &ProgramEvent::acquire("T1", "L"),
            &ProgramEvent::acquire("T2", "M")
        ));
    }

    #[test]
    fn atomicity_conflict_cases() {
        assert!(atomicity_conflict(
            &ProgramEvent::read("T1", "x"),
            &ProgramEvent::write("T2", "x")
        ));
        assert!(!atomicity_conflict(
            &ProgramEvent::read("T1", "x"),
            &ProgramEvent::read("T2", "x")
        ));
        assert!(!atomicity_conflict(
            &ProgramEvent::begin("T1"),
            &ProgramEvent::write("T2", "x")
        ));
        assert!(atomicity_conflict(
            &ProgramEvent::cas("T1", "x", "0", "1"),
            &ProgramEvent::read("T2", "x")
        ));
        assert!(!atomicity_conflict(
            &ProgramEvent::acquire("T1", "L"),
            &ProgramEvent::release("T2", "L")
        ));
    }

    fn two_thread_program() -> ProgramExecution {
        ProgramExecution::new(vec![
            ProgramEvent::begin("T1"),
            ProgramEvent::read("T1", "x"),
            ProgramEvent::write("T1", "x"),
            ProgramEvent::end("T1"),
            ProgramEvent::begin("T2"),
            ProgramEvent::write("T2", "x"),
            ProgramEvent::end("T2"),
        ])
    }

    #[test]
    fn two_thread_domains() {
        let alpha = standard_alphabet(&two_thread_program(), ConflictMode::Atomicity).unwrap();
        let procs: Vec<&str> = alpha.processes().iter().map(|p| p.as_str()).collect();
        assert_eq!(procs, vec!["<T1,x>", "<T2,x>", "T1", "T2"]);
        let dom = |a: &str| -> Vec<String> {
            alpha
                .dom(&a.into())
                .unwrap()
                .iter()
                .map(|p| p.to_string())
                .collect()
        };
        assert_eq!(dom("r(T1,x)"), vec!["<T1,x>", "T1"]);
        assert_eq!(dom("w(T2,x)"), vec!["<T1,x>", "<T2,x>", "T2"]);
        assert_eq!(dom("beg(T1)"), vec!["T1"]);
        assert_eq!(dom("en(T2)"), vec!["T2"]);
    }

    #[test]
    fn single_thread_without_variables() {
        let exec = ProgramExecution::new(vec![ProgramEvent::begin("T"), ProgramEvent::end("T")]);
        for mode in [ConflictMode::Race, ConflictMode::Atomicity] {
            let alpha = standard_alphabet(&exec, mode).unwrap();
            assert_eq!(alpha.processes().len(), 1);
        }
    }

    #[test]
    fn race_mode_alphabet_matches_conflict() {
        let exec = ProgramExecution::new(vec![
            ProgramEvent::read("T1", "x"),
            ProgramEvent::acquire("T1", "L"),
            ProgramEvent::release("T1", "L"),
            ProgramEvent::acquire("T2", "L"),
            ProgramEvent::write("T2", "x"),
            ProgramEvent::release("T2", "L"),
        ]);
        let d = induced_dependence(&standard_alphabet(&exec, ConflictMode::Race).unwrap());
        for a in &exec.events {
            for b in &exec.events {
                assert_eq!(
                    d.depends(&a.action(), &b.action()),
                    race_conflict(a, b),
                    "{a} {b}"
                );
            }
        }
    }

    #[test]
    fn validation_positions() {
        let bad = ProgramExecution::new(vec![ProgramEvent::begin("T"), ProgramEvent::begin("T")]);
        assert!(matches!(
            bad.validate(),
            Err(Error::MalformedExecution { position: 2, .. })
        ));
        let bad = ProgramExecution::new(vec![ProgramEvent::end("T")]);
        assert!(matches!(
            bad.validate(),
            Err(Error::MalformedExecution { position: 1, .. })
        ));
        let bad = ProgramExecution::new(vec![
            ProgramEvent::acquire("T1", "L"),
            ProgramEvent::acquire("T2", "L"),
        ]);
        assert!(matches!(
            bad.validate(),
            Err(Error::MalformedExecution { position: 2, .. })
        ));
        let bad = ProgramExecution::new(vec![
            ProgramEvent::acquire("T1", "L"),
            ProgramEvent::release("T2", "L"),
        ]);
        assert!(matches!(
            bad.validate(),
            Err(Error::MalformedExecution { position: 2, .. })
        ));
        assert!(two_thread_program().validate().is_ok());
    }

    #[test]
    fn open_transactions_are_listed() {
        let exec = ProgramExecution::new(vec![
            ProgramEvent::begin("T1"),
            ProgramEvent::begin("T2"),
            ProgramEvent::end("T2"),
        ]);
        let txs = exec.transactions();
        assert_eq!(
            txs[0].1,
            Transaction {
                begin: 1,
                end: None
            }
        );
        assert_eq!(
            txs[1].1,
            Transaction {
                begin: 2,
                end: Some(3)
            }
        );
    }
}
