//! Zielonka (asynchronous) automata: per-process local states synchronizing
//! by rendez-vous on shared actions.
//!
//! A transition on action `a` reads and rewrites exactly the local states of
//! the processes in `dom(a)`; everyone else keeps its state.

mod cas;
mod checks;
mod global;
mod product;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trace::{ActionId, DistributedAlphabet, ProcessId, Word};

pub use cas::{cas_system, Instruction, SharedVariable, ThreadProgram};
pub use checks::{
    BlockingWitness, CompletenessCounterexample, KnowledgeGap, LocalRejectionReport,
    SoundnessCounterexample,
};
pub use global::{GlobalDfa, GlobalGraph, DEFAULT_STATE_BUDGET};
pub use product::product_processwise;

/// One local state per process, indexed like [`ZielonkaAutomaton::processes`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct GlobalState(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStates {
    pub names: Vec<String>,
    pub initial: usize,
    pub rejecting: BTreeSet<usize>,
}

/// `pre`/`post` are aligned with `dom(action)` in process-index order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub action: ActionId,
    pub pre: Vec<usize>,
    pub post: Vec<usize>,
}

/// Which global states are accepting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Acceptance {
    /// An explicit set of global states.
    Global(BTreeSet<GlobalState>),
    /// Every process must be in its listed set (conjunctive).
    Local(Vec<BTreeSet<usize>>),
    /// Acceptance of a process-wise product: both components accept.
    /// `right_sizes[p]` is the number of local states of the right factor.
    Product {
        left: Box<Acceptance>,
        right: Box<Acceptance>,
        right_sizes: Vec<usize>,
    },
}

impl Acceptance {
    pub fn accepts(&self, s: &GlobalState) -> bool {
        match self {
            Acceptance::Global(set) => set.contains(s),
            Acceptance::Local(sets) => s.0.iter().zip(sets).all(|(q, ok)| ok.contains(q)),
            Acceptance::Product {
                left,
                right,
                right_sizes,
            } => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    s.0.iter()
                        .zip(right_sizes)
                        .map(|(&q, &m)| (q / m, q % m))
                        .unzip();
                left.accepts(&GlobalState(l)) && right.accepts(&GlobalState(r))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "outcome", content = "position")]
pub enum RunOutcome {
    Accepted,
    Rejected,
    /// No transition possible at this 1-based position.
    Stuck(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZielonkaAutomaton {
    alphabet: DistributedAlphabet,
    processes: Vec<ProcessId>,
    proc_index: BTreeMap<ProcessId, usize>,
    actions: Vec<ActionId>,
    action_index: BTreeMap<ActionId, usize>,
    dom: Vec<Vec<usize>>,
    locals: Vec<LocalStates>,
    transitions: Vec<Transition>,
    by_action: Vec<Vec<usize>>,
    acceptance: Acceptance,
}

impl ZielonkaAutomaton {
    /// Index-level constructor. `locals` follows the alphabet's process order
    /// (sorted by name).
    pub fn from_parts(
        alphabet: DistributedAlphabet,
        locals: Vec<LocalStates>,
        mut transitions: Vec<Transition>,
        acceptance: Acceptance,
    ) -> Result<Self> {
        let processes: Vec<ProcessId> = alphabet.processes().iter().cloned().collect();
        if locals.len() != processes.len() {
            return Err(Error::structural(format!(
                "{} local state sets for {} processes",
                locals.len(),
                processes.len()
            )));
        }
        for (p, l) in processes.iter().zip(&locals) {
            if l.names.is_empty() || l.initial >= l.names.len() {
                return Err(Error::structural(format!(
                    "process `{p}` has no valid initial state"
                )));
            }
            if l.rejecting.iter().any(|&q| q >= l.names.len()) {
                return Err(Error::structural(format!(
                    "rejecting state of `{p}` out of range"
                )));
            }
        }
        let proc_index: BTreeMap<ProcessId, usize> = processes
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let actions: Vec<ActionId> = alphabet.actions().cloned().collect();
        let action_index: BTreeMap<ActionId, usize> = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let dom: Vec<Vec<usize>> = actions
            .iter()
            .map(|a| {
                alphabet
                    .dom(a)
                    .expect("own action")
                    .iter()
                    .map(|p| proc_index[p])
                    .collect()
            })
            .collect();

        transitions.sort();
        transitions.dedup();
        let mut by_action = vec![Vec::new(); actions.len()];
        for (ti, t) in transitions.iter().enumerate() {
            let ai = *action_index
                .get(&t.action)
                .ok_or_else(|| Error::UnknownAction(t.action.clone()))?;
            let d = &dom[ai];
            if t.pre.len() != d.len() || t.post.len() != d.len() {
                return Err(Error::structural(format!(
                    "transition on `{}` is not keyed by its domain",
                    t.action
                )));
            }
            for (k, &p) in d.iter().enumerate() {
                let n = locals[p].names.len();
                if t.pre[k] >= n || t.post[k] >= n {
                    return Err(Error::structural(format!(
                        "transition on `{}` uses an unknown state of `{}`",
                        t.action, processes[p]
                    )));
                }
            }
            by_action[ai].push(ti);
        }

        match &acceptance {
            Acceptance::Global(set) => {
                for g in set {
                    if g.0.len() != processes.len()
                        || g.0.iter().zip(&locals).any(|(&q, l)| q >= l.names.len())
                    {
                        return Err(Error::structural("accepting global state out of range"));
                    }
                }
            }
            Acceptance::Local(sets) if sets.len() != processes.len() => {
                return Err(Error::structural(
                    "local acceptance needs one set per process",
                ));
            }
            _ => {}
        }

        Ok(ZielonkaAutomaton {
            alphabet,
            processes,
            proc_index,
            actions,
            action_index,
            dom,
            locals,
            transitions,
            by_action,
            acceptance,
        })
    }

    pub fn builder(alphabet: DistributedAlphabet) -> ZielonkaBuilder {
        ZielonkaBuilder::new(alphabet)
    }

    pub fn alphabet(&self) -> &DistributedAlphabet {
        &self.alphabet
    }

    pub fn processes(&self) -> &[ProcessId] {
        &self.processes
    }

    pub fn process_index(&self, p: &ProcessId) -> Option<usize> {
        self.proc_index.get(p).copied()
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    pub fn locals(&self, p: usize) -> &LocalStates {
        &self.locals[p]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acceptance
    }

    /// Process indices of `dom(a)`, ascending.
    pub fn domain_indices(&self, a: &ActionId) -> Result<&[usize]> {
        let ai = self.action_idx(a)?;
        Ok(&self.dom[ai])
    }

    fn action_idx(&self, a: &ActionId) -> Result<usize> {
        self.action_index
            .get(a)
            .copied()
            .ok_or_else(|| Error::UnknownAction(a.clone()))
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState(self.locals.iter().map(|l| l.initial).collect())
    }

    pub fn is_accepting(&self, s: &GlobalState) -> bool {
        self.acceptance.accepts(s)
    }

    /// Processes whose local state in `s` is rejecting.
    pub fn rejecting_processes(&self, s: &GlobalState) -> Vec<usize> {
        s.0.iter()
            .enumerate()
            .filter(|(p, q)| self.locals[*p].rejecting.contains(q))
            .map(|(p, _)| p)
            .collect()
    }

    /// Partial function check: no two transitions share action and pre-states.
    pub fn is_deterministic(&self) -> bool {
        // transitions are sorted, so duplicates of (action, pre) are adjacent
        self.transitions
            .windows(2)
            .all(|w| (&w[0].action, &w[0].pre) != (&w[1].action, &w[1].pre))
    }

    /// All successors of `s` on `a`, sorted; empty when `a` is disabled.
    pub fn step(&self, s: &GlobalState, a: &ActionId) -> Result<Vec<GlobalState>> {
        let ai = self.action_idx(a)?;
        Ok(self.step_idx(s, ai))
    }

    pub(crate) fn step_idx(&self, s: &GlobalState, ai: usize) -> Vec<GlobalState> {
        let d = &self.dom[ai];
        let mut out: Vec<GlobalState> = self.by_action[ai]
            .iter()
            .map(|&ti| &self.transitions[ti])
            .filter(|t| d.iter().zip(&t.pre).all(|(&p, &q)| s.0[p] == q))
            .map(|t| {
                let mut next = s.clone();
                for (&p, &q) in d.iter().zip(&t.post) {
                    next.0[p] = q;
                }
                debug_assert!(
                    (0..s.0.len()).all(|p| d.contains(&p) || next.0[p] == s.0[p]),
                    "rendez-vous step touched a process outside dom({})",
                    self.actions[ai]
                );
                next
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Runs `w` from the initial state, tracking the set of reachable global
    /// states (a singleton for deterministic automata).
    pub fn run(&self, w: &Word) -> Result<RunOutcome> {
        let letters: Vec<usize> = w
            .iter()
            .enumerate()
            .map(|(i, a)| {
                self.action_index
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::UnknownLetter {
                        position: i + 1,
                        letter: a.clone(),
                    })
            })
            .collect::<Result<_>>()?;
        let mut current = BTreeSet::from([self.initial_state()]);
        for (i, &ai) in letters.iter().enumerate() {
            current = current.iter().flat_map(|s| self.step_idx(s, ai)).collect();
            if current.is_empty() {
                return Ok(RunOutcome::Stuck(i + 1));
            }
        }
        Ok(if current.iter().any(|s| self.is_accepting(s)) {
            RunOutcome::Accepted
        } else {
            RunOutcome::Rejected
        })
    }

    /// Human-readable rendering, e.g. `(P=s0, Q=q1)`.
    pub fn describe(&self, s: &GlobalState) -> String {
        let parts: Vec<String> =
            s.0.iter()
                .enumerate()
                .map(|(p, &q)| format!("{}={}", self.processes[p], self.locals[p].names[q]))
                .collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for ZielonkaAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, l) in self.processes.iter().zip(&self.locals) {
            writeln!(
                f,
                "process {p}: {} states, initial {}",
                l.names.len(),
                l.names[l.initial]
            )?;
        }
        for t in &self.transitions {
            let d = &self.dom[self.action_index[&t.action]];
            let show = |qs: &[usize]| {
                d.iter()
                    .zip(qs)
                    .map(|(&p, &q)| format!("{}={}", self.processes[p], self.locals[p].names[q]))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            writeln!(
                f,
                "  ({}) -{}-> ({})",
                show(&t.pre),
                t.action,
                show(&t.post)
            )?;
        }
        Ok(())
    }
}

/// Local states of a transition's domain, by process name.
type NamedStates = BTreeMap<ProcessId, String>;

/// Name-based construction of a [`ZielonkaAutomaton`].
#[derive(Debug, Clone)]
pub struct ZielonkaBuilder {
    alphabet: DistributedAlphabet,
    locals: BTreeMap<ProcessId, LocalStates>,
    transitions: Vec<(ActionId, NamedStates, NamedStates)>,
    accept_global: Option<Vec<BTreeMap<ProcessId, String>>>,
    accept_local: Option<BTreeMap<ProcessId, Vec<String>>>,
}

impl ZielonkaBuilder {
    pub fn new(alphabet: DistributedAlphabet) -> Self {
        ZielonkaBuilder {
            alphabet,
            locals: BTreeMap::new(),
            transitions: Vec::new(),
            accept_global: None,
            accept_local: None,
        }
    }

    pub fn process(
        &mut self,
        p: &str,
        states: &[&str],
        initial: &str,
        rejecting: &[&str],
    ) -> Result<&mut Self> {
        let pid = ProcessId::new(p);
        if !self.alphabet.processes().contains(&pid) {
            return Err(Error::UnknownProcess(pid));
        }
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let find = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::structural(format!("process `{p}` has no state `{s}`")))
        };
        let initial = find(initial)?;
        let rejecting = rejecting.iter().map(|s| find(s)).collect::<Result<_>>()?;
        self.locals.insert(
            pid,
            LocalStates {
                names,
                initial,
                rejecting,
            },
        );
        Ok(self)
    }

    pub fn transition(
        &mut self,
        action: &str,
        pre: &[(&str, &str)],
        post: &[(&str, &str)],
    ) -> &mut Self {
        let map = |xs: &[(&str, &str)]| {
            xs.iter()
                .map(|(p, s)| (ProcessId::new(*p), s.to_string()))
                .collect()
        };
        self.transitions
            .push((ActionId::new(action), map(pre), map(post)));
        self
    }

    /// Adds one accepting global state (switches to explicit acceptance).
    pub fn accept_global(&mut self, state: &[(&str, &str)]) -> &mut Self {
        self.accept_global.get_or_insert_with(Vec::new).push(
            state
                .iter()
                .map(|(p, s)| (ProcessId::new(*p), s.to_string()))
                .collect(),
        );
        self
    }

    /// Restricts process `p` to the listed states in accepting global states.
    pub fn accept_local(&mut self, p: &str, states: &[&str]) -> &mut Self {
        self.accept_local.get_or_insert_with(BTreeMap::new).insert(
            ProcessId::new(p),
            states.iter().map(|s| s.to_string()).collect(),
        );
        self
    }

    pub fn build(&self) -> Result<ZielonkaAutomaton> {
        let processes: Vec<&ProcessId> = self.alphabet.processes().iter().collect();
        let mut locals = Vec::new();
        for p in &processes {
            locals.push(
                self.locals.get(*p).cloned().ok_or_else(|| {
                    Error::structural(format!("process `{p}` has no local states"))
                })?,
            );
        }
        let state_of = |p: &ProcessId, s: &str| -> Result<usize> {
            let pi = processes
                .iter()
                .position(|q| *q == p)
                .ok_or_else(|| Error::UnknownProcess(p.clone()))?;
            locals[pi]
                .names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::structural(format!("process `{p}` has no state `{s}`")))
        };

        let mut transitions = Vec::new();
        for (a, pre, post) in &self.transitions {
            let dom = self.alphabet.dom(a)?;
            let keys_pre: BTreeSet<&ProcessId> = pre.keys().collect();
            let keys_post: BTreeSet<&ProcessId> = post.keys().collect();
            let keys_dom: BTreeSet<&ProcessId> = dom.iter().collect();
            if keys_pre != keys_dom || keys_post != keys_dom {
                return Err(Error::structural(format!(
                    "transition on `{a}` must assign exactly the processes of its domain"
                )));
            }
            transitions.push(Transition {
                action: a.clone(),
                pre: dom
                    .iter()
                    .map(|p| state_of(p, &pre[p]))
                    .collect::<Result<_>>()?,
                post: dom
                    .iter()
                    .map(|p| state_of(p, &post[p]))
                    .collect::<Result<_>>()?,
            });
        }

        let acceptance = match (&self.accept_global, &self.accept_local) {
            (Some(_), Some(_)) => {
                return Err(Error::structural(
                    "choose either global or local acceptance",
                ))
            }
            (Some(list), None) => {
                let mut set = BTreeSet::new();
                for g in list {
                    if g.len() != processes.len() {
                        return Err(Error::structural(
                            "accepting global state must assign every process",
                        ));
                    }
                    let mut v = Vec::new();
                    for p in &processes {
                        let s = g.get(*p).ok_or_else(|| {
                            Error::structural(format!("accepting global state misses `{p}`"))
                        })?;
                        v.push(state_of(p, s)?);
                    }
                    set.insert(GlobalState(v));
                }
                Acceptance::Global(set)
            }
            (None, Some(map)) => {
                if let Some(p) = map.keys().find(|p| !self.alphabet.processes().contains(*p)) {
                    return Err(Error::UnknownProcess(p.clone()));
                }
                let mut sets = Vec::new();
                for (pi, p) in processes.iter().enumerate() {
                    sets.push(match map.get(*p) {
                        Some(states) => states
                            .iter()
                            .map(|s| state_of(p, s))
                            .collect::<Result<_>>()?,
                        None => (0..locals[pi].names.len()).collect(),
                    });
                }
                Acceptance::Local(sets)
            }
            (None, None) => Acceptance::Local(
                locals
                    .iter()
                    .map(|l| (0..l.names.len()).collect())
                    .collect(),
            ),
        };
        ZielonkaAutomaton::from_parts(self.alphabet.clone(), locals, transitions, acceptance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two processes p, q; `a` local to p, `b` local to q, `c` joint.
    pub(crate) fn small() -> ZielonkaAutomaton {
        let alpha = DistributedAlphabet::from_domains([
            ("a", &["p"][..]),
            ("b", &["q"][..]),
            ("c", &["p", "q"][..]),
        ])
        .unwrap();
        let mut b = ZielonkaAutomaton::builder(alpha);
        b.process("p", &["0", "1"], "0", &[]).unwrap();
        b.process("q", &["0", "1"], "0", &[]).unwrap();
        b.transition("a", &[("p", "0")], &[("p", "1")])
            .transition("b", &[("q", "0")], &[("q", "1")])
            .transition("c", &[("p", "1"), ("q", "1")], &[("p", "0"), ("q", "0")])
            .accept_global(&[("p", "0"), ("q", "0")]);
        b.build().unwrap()
    }

    #[test]
    fn rendez_vous_step_only_touches_domain() {
        let z = small();
        let s0 = z.initial_state();
        let s1 = z.step(&s0, &"a".into()).unwrap();
        assert_eq!(s1, vec![GlobalState(vec![1, 0])]);
        assert!(z.step(&s0, &"c".into()).unwrap().is_empty());
        assert!(z.step(&s0, &"zz".into()).is_err());
    }

    #[test]
    fn runs() {
        let z = small();
        assert_eq!(z.run(&Word::default()).unwrap(), RunOutcome::Accepted);
        assert_eq!(z.run(&Word::parse("a b c")).unwrap(), RunOutcome::Accepted);
        assert_eq!(z.run(&Word::parse("b a c")).unwrap(), RunOutcome::Accepted);
        assert_eq!(z.run(&Word::parse("a")).unwrap(), RunOutcome::Rejected);
        assert_eq!(z.run(&Word::parse("a c")).unwrap(), RunOutcome::Stuck(2));
        assert!(matches!(
            z.run(&Word::parse("a x")),
            Err(Error::UnknownLetter { position: 2, .. })
        ));
    }

    #[test]
    fn determinism() {
        assert!(small().is_deterministic());
        let alpha = DistributedAlphabet::from_domains([("a", &["p"][..])]).unwrap();
        let mut b = ZielonkaAutomaton::builder(alpha.clone());
        b.process("p", &["0", "1"], "0", &[]).unwrap();
        b.transition("a", &[("p", "0")], &[("p", "0")]).transition(
            "a",
            &[("p", "0")],
            &[("p", "1")],
        );
        let z = b.build().unwrap();
        assert!(!z.is_deterministic());
        assert_eq!(z.step(&z.initial_state(), &"a".into()).unwrap().len(), 2);

        let mut b = ZielonkaAutomaton::builder(alpha);
        b.process("p", &["0"], "0", &[]).unwrap();
        assert!(b.build().unwrap().is_deterministic());
    }

    #[test]
    fn builder_rejects_transitions_not_keyed_by_domain() {
        let alpha = DistributedAlphabet::from_domains([("c", &["p", "q"][..])]).unwrap();
        let mut b = ZielonkaAutomaton::builder(alpha);
        b.process("p", &["0"], "0", &[]).unwrap();
        b.process("q", &["0"], "0", &[]).unwrap();
        b.transition("c", &[("p", "0")], &[("p", "0")]);
        assert!(matches!(b.build(), Err(Error::Structural(_))));
    }
}
