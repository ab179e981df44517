//! Offline race and atomicity monitors over complete executions, and an
//! exact serializability decision procedure used as their oracle.

use std::collections::HashSet;

use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::program::{
    standard_alphabet, ConflictMode, OpKind, ProgramExecution, ThreadId, VariableId,
};
use crate::trace::{induced_dependence, trace_of_word, EventId, TraceOrder};

/// Two accesses to one variable, at least one writing, unordered by
/// race-mode happens-before.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RaceReport {
    pub first: EventId,
    pub second: EventId,
    pub variable: VariableId,
    pub kinds: (OpKind, OpKind),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum TransactionEnd {
    Closed(EventId),
    Open,
}

/// An event of another thread strictly between a transaction's begin and end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomicityViolation {
    pub transaction_thread: ThreadId,
    pub begin: EventId,
    pub end: TransactionEnd,
    pub interloper: EventId,
    pub interloper_thread: ThreadId,
}

/// The happens-before order of `exec` under the conflict relation of `mode`,
/// built through the standard process decomposition.
pub fn execution_trace(exec: &ProgramExecution, mode: ConflictMode) -> Result<TraceOrder> {
    let alphabet = standard_alphabet(exec, mode)?;
    trace_of_word(&exec.word(), &induced_dependence(&alphabet))
}

pub fn detect_races(exec: &ProgramExecution) -> Result<Vec<RaceReport>> {
    exec.validate()?;
    let trace = execution_trace(exec, ConflictMode::Race)?;
    let mut out = Vec::new();
    for j in 1..=exec.len() {
        let b = exec.event(j);
        let Some(y) = b.variable() else { continue };
        for i in 1..j {
            let a = exec.event(i);
            if a.variable() != Some(y) || !(a.is_write_access() || b.is_write_access()) {
                continue;
            }
            if trace.concurrent(i, j)? {
                out.push(RaceReport {
                    first: i,
                    second: j,
                    variable: y.clone(),
                    kinds: (a.kind(), b.kind()),
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Pattern monitor: for each transaction `a .. b` on `T`, every event `c` on
/// another thread with `a ≺ c ≺ b`. Open transactions only need `a ≺ c`.
pub fn detect_atomicity_violations(exec: &ProgramExecution) -> Result<Vec<AtomicityViolation>> {
    exec.validate()?;
    let trace = execution_trace(exec, ConflictMode::Atomicity)?;
    let mut out = Vec::new();
    for (thread, tx) in exec.transactions() {
        let upper = tx.end.unwrap_or(exec.len() + 1);
        for c in tx.begin + 1..upper.min(exec.len() + 1) {
            let ev = exec.event(c);
            if ev.thread == thread || !trace.precedes(tx.begin, c)? {
                continue;
            }
            let inside = match tx.end {
                Some(b) => trace.precedes(c, b)?,
                None => true,
            };
            if inside {
                out.push(AtomicityViolation {
                    transaction_thread: thread.clone(),
                    begin: tx.begin,
                    end: tx.end.map_or(TransactionEnd::Open, TransactionEnd::Closed),
                    interloper: c,
                    interloper_thread: ev.thread.clone(),
                });
            }
        }
    }
    out.sort_by_key(|v| (v.begin, v.interloper));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "verdict", content = "limit")]
pub enum Serializability {
    Serializable,
    Violating,
    /// The search visited more than `limit` states without a decision.
    Unknown(usize),
}

/// Decides whether some linear extension of the atomicity-mode trace is
/// serial: no transaction's block (begin to end, or begin to the end of the
/// log when still open) contains an event of another thread.
///
/// The search walks prefixes of linear extensions and prunes a prefix as
/// soon as it interrupts a transaction; `limit` bounds the number of distinct
/// prefixes visited.
pub fn is_serializable(exec: &ProgramExecution, limit: usize) -> Result<Serializability> {
    if limit == 0 {
        return Err(Error::InvalidLimit);
    }
    exec.validate()?;
    let trace = execution_trace(exec, ConflictMode::Atomicity)?;
    let n = exec.len();

    // per event: index of the thread, whether it opens/closes a block
    let threads: Vec<ThreadId> = exec.threads().into_iter().collect();
    let tid: Vec<usize> = exec
        .events
        .iter()
        .map(|e| threads.binary_search(&e.thread).expect("thread listed"))
        .collect();
    let per_thread: Vec<Vec<usize>> = (0..threads.len())
        .map(|t| (0..n).filter(|&e| tid[e] == t).collect())
        .collect();
    let kind: Vec<OpKind> = exec.events.iter().map(|e| e.kind()).collect();

    let mut search = SerialSearch {
        trace: &trace,
        tid: &tid,
        per_thread: &per_thread,
        kind: &kind,
        visited: HashSet::new(),
        limit,
        exhausted: false,
    };
    let mut placed = BitSet::with_capacity(n);
    let mut cursor = vec![0usize; threads.len()];
    let found = search.dfs(&mut placed, &mut cursor, None, 0);
    Ok(if found {
        Serializability::Serializable
    } else if search.exhausted {
        Serializability::Unknown(limit)
    } else {
        Serializability::Violating
    })
}

struct SerialSearch<'a> {
    trace: &'a TraceOrder,
    tid: &'a [usize],
    per_thread: &'a [Vec<usize>],
    kind: &'a [OpKind],
    visited: HashSet<BitSet>,
    limit: usize,
    exhausted: bool,
}

impl SerialSearch<'_> {
    fn enabled(&self, placed: &BitSet, e: usize) -> bool {
        self.trace
            .ancestor_set(e)
            .iter()
            .all(|p| placed.contains(p))
    }

    /// `active` is the thread currently inside a transaction block.
    fn dfs(
        &mut self,
        placed: &mut BitSet,
        cursor: &mut [usize],
        active: Option<usize>,
        count: usize,
    ) -> bool {
        if count == self.tid.len() {
            return true;
        }
        if self.exhausted || !self.visited.insert(placed.clone()) {
            return false;
        }
        if self.visited.len() > self.limit {
            self.exhausted = true;
            return false;
        }
        let candidates: Vec<usize> = match active {
            // a block in progress must run to its end without interruption
            Some(t) => self.per_thread[t]
                .get(cursor[t])
                .copied()
                .into_iter()
                .collect(),
            None => (0..cursor.len())
                .filter_map(|t| self.per_thread[t].get(cursor[t]).copied())
                .collect(),
        };
        for e in candidates {
            if !self.enabled(placed, e) {
                continue;
            }
            let t = self.tid[e];
            let next_active = match self.kind[e] {
                OpKind::Begin => Some(t),
                OpKind::End => None,
                _ => active,
            };
            let mut next = placed.clone();
            next.insert(e);
            cursor[t] += 1;
            let ok = self.dfs(&mut next, cursor, next_active, count + 1);
            cursor[t] -= 1;
            if ok {
                return true;
            }
            if self.exhausted {
                return false;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::ProgramEvent as E;

    fn fig1() -> ProgramExecution {
        ProgramExecution::new(vec![
            E::write("T1", "t1").at("1"),
            E::write("T1", "t1.data").at("2"),
            E::read("T1", "head").at("3"),
            E::read("T2", "head").at("7"),
            E::acquire("T2", "lock").at("8"),
            E::write("T2", "head").at("9"),
        ])
    }

    fn fig4(order: &[usize]) -> ProgramExecution {
        let line = |l: usize| {
            let e = match l {
                1 => E::begin("T1"),
                2 => E::read("T1", "x"),
                3 => E::write("T1", "x"),
                4 => E::end("T1"),
                5 => E::begin("T2"),
                6 => E::write("T2", "x"),
                7 => E::end("T2"),
                _ => unreachable!(),
            };
            e.at(l.to_string())
        };
        order.iter().map(|&l| line(l)).collect()
    }

    #[test]
    fn list_race_is_found() {
        let exec = fig1();
        let races = detect_races(&exec).unwrap();
        assert_eq!(races.len(), 1);
        let r = &races[0];
        assert_eq!(
            (
                exec.event(r.first).site.as_deref(),
                exec.event(r.second).site.as_deref()
            ),
            (Some("3"), Some("9"))
        );
        assert_eq!(r.kinds, (OpKind::Read, OpKind::Write));
    }

    #[test]
    fn common_lock_removes_race() {
        let exec = ProgramExecution::new(vec![
            E::acquire("T1", "lock"),
            E::read("T1", "head"),
            E::release("T1", "lock"),
            E::acquire("T2", "lock"),
            E::write("T2", "head"),
            E::release("T2", "lock"),
        ]);
        assert!(detect_races(&exec).unwrap().is_empty());
    }

    #[test]
    fn single_thread_has_no_findings() {
        let exec = ProgramExecution::new(vec![
            E::begin("T"),
            E::write("T", "x"),
            E::read("T", "x"),
            E::end("T"),
        ]);
        assert!(detect_races(&exec).unwrap().is_empty());
        assert!(detect_atomicity_violations(&exec).unwrap().is_empty());
        assert_eq!(
            is_serializable(&exec, 10).unwrap(),
            Serializability::Serializable
        );
    }

    #[test]
    fn interleaved_write_breaks_atomicity() {
        let exec = fig4(&[1, 2, 5, 6, 7, 3, 4]);
        let v = detect_atomicity_violations(&exec).unwrap();
        assert_eq!(
            v,
            vec![AtomicityViolation {
                transaction_thread: "T1".into(),
                begin: 1,
                end: TransactionEnd::Closed(7),
                interloper: 4,
                interloper_thread: "T2".into(),
            }]
        );
        assert_eq!(
            is_serializable(&exec, 1000).unwrap(),
            Serializability::Violating
        );
    }

    #[test]
    fn serial_order_is_clean() {
        let exec = fig4(&[1, 2, 3, 4, 5, 6, 7]);
        assert!(detect_atomicity_violations(&exec).unwrap().is_empty());
        assert_eq!(
            is_serializable(&exec, 1000).unwrap(),
            Serializability::Serializable
        );
    }

    #[test]
    fn commuting_events_make_interleaving_serializable() {
        // T2 touches only y, so it can be moved out of T1's block
        let exec = ProgramExecution::new(vec![
            E::begin("T1"),
            E::read("T1", "x"),
            E::write("T2", "y"),
            E::write("T1", "x"),
            E::end("T1"),
        ]);
        assert!(detect_atomicity_violations(&exec).unwrap().is_empty());
        assert_eq!(
            is_serializable(&exec, 1000).unwrap(),
            Serializability::Serializable
        );
    }

    #[test]
    fn open_transaction_reported_as_open() {
        let exec = ProgramExecution::new(vec![
            E::begin("T1"),
            E::write("T1", "x"),
            E::read("T2", "x"),
        ]);
        let v = detect_atomicity_violations(&exec).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].end, TransactionEnd::Open);
        assert_eq!(
            is_serializable(&exec, 100).unwrap(),
            Serializability::Violating
        );
    }

    #[test]
    fn tiny_limit_gives_unknown() {
        let exec = fig4(&[1, 2, 5, 6, 7, 3, 4]);
        assert_eq!(
            is_serializable(&exec, 1).unwrap(),
            Serializability::Unknown(1)
        );
        assert_eq!(is_serializable(&exec, 0), Err(Error::InvalidLimit));
    }
}
