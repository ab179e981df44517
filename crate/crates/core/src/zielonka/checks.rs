//! Checks evaluated over the reachable global state graph.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::lang::{is_trace_closed, ClosureWitness};
use crate::trace::{induced_dependence, ActionId, ProcessId, Word};

use super::{GlobalGraph, ZielonkaAutomaton};

/// A reachable state where some process rejects although acceptance is
/// still reachable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessCounterexample {
    pub path: Word,
    pub state: String,
    pub rejecting: Vec<ProcessId>,
    /// A continuation from `state` into an accepting state.
    pub continuation: Word,
}

/// A reachable dead state (no accepting state reachable) in which no
/// process rejects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletenessCounterexample {
    pub path: Word,
    pub state: String,
}

/// A local state that occurs only in dead reachable global states yet is not
/// rejecting: the process could know the failure but does not signal it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnowledgeGap {
    pub process: ProcessId,
    pub local_state: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LocalRejectionReport {
    pub soundness: Vec<SoundnessCounterexample>,
    pub completeness: Vec<CompletenessCounterexample>,
    /// Reported separately; does not make the check fail.
    pub knowledge_gaps: Vec<KnowledgeGap>,
}

impl LocalRejectionReport {
    pub fn is_ok(&self) -> bool {
        self.soundness.is_empty() && self.completeness.is_empty()
    }
}

/// A reachable non-rejecting global state in which an action is disabled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockingWitness {
    pub path: Word,
    pub state: String,
    pub action: ActionId,
}

impl ZielonkaAutomaton {
    /// Trace closure of the global language w.r.t. the induced dependence.
    /// Always `None` for a well-formed automaton; a witness means a bug.
    pub fn check_trace_closed(&self, budget: usize) -> Result<Option<ClosureWitness>> {
        let g = self.global_automaton(budget)?;
        is_trace_closed(&g.dfa, &induced_dependence(self.alphabet()))
    }

    /// Locally-rejecting check, judged on reachable global states.
    pub fn check_locally_rejecting(&self, budget: usize) -> Result<LocalRejectionReport> {
        let g = GlobalGraph::explore(self, budget)?;
        let live = g.live(self);
        let mut report = LocalRejectionReport::default();

        // (process, local state) -> seen in some live global state
        let mut seen_live: BTreeMap<(usize, usize), bool> = BTreeMap::new();

        for (i, s) in g.states.iter().enumerate() {
            for (p, &q) in s.0.iter().enumerate() {
                *seen_live.entry((p, q)).or_insert(false) |= live[i];
            }
            let rejecting = self.rejecting_processes(s);
            if live[i] && !rejecting.is_empty() {
                report.soundness.push(SoundnessCounterexample {
                    path: g.path_to(self, i),
                    state: self.describe(s),
                    rejecting: rejecting
                        .iter()
                        .map(|&p| self.processes()[p].clone())
                        .collect(),
                    continuation: g.path_to_accepting(self, i).expect("live state"),
                });
            }
            if !live[i] && rejecting.is_empty() {
                report.completeness.push(CompletenessCounterexample {
                    path: g.path_to(self, i),
                    state: self.describe(s),
                });
            }
        }
        for ((p, q), any_live) in seen_live {
            if !any_live && !self.locals(p).rejecting.contains(&q) {
                report.knowledge_gaps.push(KnowledgeGap {
                    process: self.processes()[p].clone(),
                    local_state: self.locals(p).names[q].clone(),
                });
            }
        }
        Ok(report)
    }

    /// Every action enabled in every reachable state where nobody rejects.
    /// Returns all blocking (state, action) pairs; empty means non-blocking.
    pub fn check_nonblocking(&self, budget: usize) -> Result<Vec<BlockingWitness>> {
        let g = GlobalGraph::explore(self, budget)?;
        let mut out = Vec::new();
        for (i, s) in g.states.iter().enumerate() {
            if !self.rejecting_processes(s).is_empty() {
                continue;
            }
            for (ai, a) in self.actions().iter().enumerate() {
                if !g.succ[i].iter().any(|&(x, _)| x == ai) {
                    out.push(BlockingWitness {
                        path: g.path_to(self, i),
                        state: self.describe(s),
                        action: a.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::DistributedAlphabet;

    fn one_process(rejecting: &[&str]) -> ZielonkaAutomaton {
        // 0 -a-> 1 (accepting), 0 -b-> 2 (dead sink with self loops)
        let alpha =
            DistributedAlphabet::from_domains([("a", &["p"][..]), ("b", &["p"][..])]).unwrap();
        let mut b = ZielonkaAutomaton::builder(alpha);
        b.process("p", &["0", "1", "2"], "0", rejecting).unwrap();
        b.transition("a", &[("p", "0")], &[("p", "1")])
            .transition("b", &[("p", "0")], &[("p", "2")])
            .transition("a", &[("p", "1")], &[("p", "1")])
            .transition("b", &[("p", "1")], &[("p", "1")])
            .transition("a", &[("p", "2")], &[("p", "2")])
            .transition("b", &[("p", "2")], &[("p", "2")])
            .accept_local("p", &["1"]);
        b.build().unwrap()
    }

    #[test]
    fn no_rejecting_states_fails_completeness_on_dead_state() {
        let r = one_process(&[]).check_locally_rejecting(100).unwrap();
        assert!(r.soundness.is_empty());
        assert_eq!(r.completeness.len(), 1);
        assert_eq!(r.completeness[0].path, Word::parse("b"));
        assert_eq!(r.knowledge_gaps.len(), 1);
    }

    #[test]
    fn marking_the_sink_is_locally_rejecting() {
        let r = one_process(&["2"]).check_locally_rejecting(100).unwrap();
        assert!(r.is_ok(), "{r:?}");
        assert!(r.knowledge_gaps.is_empty());
    }

    #[test]
    fn marking_a_live_state_is_unsound() {
        let r = one_process(&["0", "2"])
            .check_locally_rejecting(100)
            .unwrap();
        assert_eq!(r.soundness.len(), 1);
        assert_eq!(r.soundness[0].path, Word::default());
        assert_eq!(r.soundness[0].continuation, Word::parse("a"));
    }

    #[test]
    fn self_loop_monitor_is_nonblocking() {
        let alpha =
            DistributedAlphabet::from_domains([("a", &["p"][..]), ("b", &["p", "q"][..])]).unwrap();
        let mut b = ZielonkaAutomaton::builder(alpha);
        b.process("p", &["m"], "m", &[]).unwrap();
        b.process("q", &["m"], "m", &[]).unwrap();
        b.transition("a", &[("p", "m")], &[("p", "m")]).transition(
            "b",
            &[("p", "m"), ("q", "m")],
            &[("p", "m"), ("q", "m")],
        );
        let z = b.build().unwrap();
        assert!(z.check_nonblocking(10).unwrap().is_empty());
        assert_eq!(z.check_trace_closed(10).unwrap(), None);
    }

    #[test]
    fn missing_initial_action_blocks() {
        let alpha =
            DistributedAlphabet::from_domains([("a", &["p"][..]), ("b", &["p"][..])]).unwrap();
        let mut b = ZielonkaAutomaton::builder(alpha);
        b.process("p", &["m"], "m", &[]).unwrap();
        b.transition("a", &[("p", "m")], &[("p", "m")]);
        let w = b.build().unwrap().check_nonblocking(10).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].action, ActionId::new("b"));
        assert_eq!(w[0].path, Word::default());
    }
}
