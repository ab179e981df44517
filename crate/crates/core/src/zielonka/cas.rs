//! Straight-line thread programs over shared variables with finite value
//! domains, compiled to a Zielonka automaton with one process per thread
//! (`P_T`, states = program counter plus local valuation) and one per
//! variable (`P_x`, states = values). Every instruction is a rendez-vous
//! between its thread and the variable it touches.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::trace::{ActionId, DistributedAlphabet, ProcessId};

use super::{Acceptance, LocalStates, Transition, ZielonkaAutomaton};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instruction {
    /// `into = x`
    Read { var: String, into: String },
    /// `x = value`
    Write { var: String, value: String },
    /// `into = CAS(x, old, new)`
    Cas {
        var: String,
        old: String,
        new: String,
        into: String,
    },
}

impl Instruction {
    fn var(&self) -> &str {
        match self {
            Instruction::Read { var, .. }
            | Instruction::Write { var, .. }
            | Instruction::Cas { var, .. } => var,
        }
    }

    fn label(&self, thread: &str, pc: usize) -> ActionId {
        ActionId::new(match self {
            Instruction::Read { var, into } => format!("{into}=read({thread},{var})@{pc}"),
            Instruction::Write { var, value } => format!("write({thread},{var},{value})@{pc}"),
            Instruction::Cas {
                var,
                old,
                new,
                into,
            } => {
                format!("{into}=CAS({thread},{var},{old},{new})@{pc}")
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreadProgram {
    pub name: String,
    #[serde(default)]
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedVariable {
    pub name: String,
    pub domain: Vec<String>,
    pub initial: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ThreadState {
    pc: usize,
    locals: BTreeMap<String, String>,
}

impl ThreadState {
    fn name(&self) -> String {
        let mut s = format!("pc={}", self.pc);
        for (k, v) in &self.locals {
            s.push_str(&format!(";{k}={v}"));
        }
        s
    }

    fn advance(&self, set: Option<(&str, &str)>) -> ThreadState {
        let mut next = self.clone();
        next.pc += 1;
        if let Some((k, v)) = set {
            next.locals.insert(k.to_string(), v.to_string());
        }
        next
    }
}

/// Builds the automaton. Accepting global states are those where every
/// thread has run to completion.
pub fn cas_system(
    threads: &[ThreadProgram],
    variables: &[SharedVariable],
) -> Result<ZielonkaAutomaton> {
    let mut vars: BTreeMap<&str, &SharedVariable> = BTreeMap::new();
    for v in variables {
        let distinct: BTreeSet<&String> = v.domain.iter().collect();
        if v.domain.is_empty() || distinct.len() != v.domain.len() {
            return Err(Error::structural(format!(
                "variable `{}` needs a non-empty domain without repeats",
                v.name
            )));
        }
        if !v.domain.contains(&v.initial) {
            return Err(Error::structural(format!(
                "initial value `{}` of `{}` is outside its domain",
                v.initial, v.name
            )));
        }
        if vars.insert(&v.name, v).is_some() {
            return Err(Error::structural(format!(
                "variable `{}` declared twice",
                v.name
            )));
        }
    }
    let thread_proc = |t: &str| ProcessId::new(format!("P_{t}"));
    let var_proc = |x: &str| ProcessId::new(format!("P_{x}"));

    let mut names = BTreeSet::new();
    for t in threads {
        if !names.insert(thread_proc(&t.name)) {
            return Err(Error::structural(format!(
                "process name `P_{}` used twice",
                t.name
            )));
        }
        for ins in &t.instructions {
            let x = vars.get(ins.var()).ok_or_else(|| {
                Error::structural(format!(
                    "thread `{}` uses undeclared variable `{}`",
                    t.name,
                    ins.var()
                ))
            })?;
            let check = |v: &str| {
                if x.domain.iter().any(|d| d == v) {
                    Ok(())
                } else {
                    Err(Error::structural(format!(
                        "value `{v}` is outside the domain of `{}`",
                        x.name
                    )))
                }
            };
            match ins {
                Instruction::Write { value, .. } => check(value)?,
                Instruction::Cas { old, new, .. } => {
                    check(old)?;
                    check(new)?;
                }
                Instruction::Read { .. } => {}
            }
        }
    }
    for v in variables {
        if !names.insert(var_proc(&v.name)) {
            return Err(Error::structural(format!(
                "process name `P_{}` used twice",
                v.name
            )));
        }
    }

    // thread states reachable from the initial valuation
    let mut thread_states: Vec<Vec<ThreadState>> = Vec::new();
    for t in threads {
        let init = ThreadState {
            pc: 0,
            locals: BTreeMap::new(),
        };
        let mut seen = BTreeSet::from([init.clone()]);
        let mut queue = VecDeque::from([init.clone()]);
        let mut order = vec![init];
        while let Some(s) = queue.pop_front() {
            let Some(ins) = t.instructions.get(s.pc) else {
                continue;
            };
            let nexts: Vec<ThreadState> = match ins {
                Instruction::Read { var, into } => vars[var.as_str()]
                    .domain
                    .iter()
                    .map(|v| s.advance(Some((into, v))))
                    .collect(),
                Instruction::Write { .. } => vec![s.advance(None)],
                Instruction::Cas { into, .. } => {
                    vec![
                        s.advance(Some((into, "true"))),
                        s.advance(Some((into, "false"))),
                    ]
                }
            };
            for n in nexts {
                if seen.insert(n.clone()) {
                    order.push(n.clone());
                    queue.push_back(n);
                }
            }
        }
        thread_states.push(order);
    }

    let mut dom = Vec::new();
    let mut transitions_named: Vec<(ActionId, ProcessId, usize, usize, ProcessId, usize, usize)> =
        Vec::new();
    for (ti, t) in threads.iter().enumerate() {
        let states = &thread_states[ti];
        let idx = |s: &ThreadState| states.iter().position(|x| x == s).expect("explored");
        for (pc, ins) in t.instructions.iter().enumerate() {
            let action = ins.label(&t.name, pc);
            let (tp, xp) = (thread_proc(&t.name), var_proc(ins.var()));
            dom.push((action.clone(), BTreeSet::from([tp.clone(), xp.clone()])));
            let x = vars[ins.var()];
            let vidx = |v: &str| {
                x.domain
                    .iter()
                    .position(|d| d == v)
                    .expect("checked domain")
            };
            for s in states.iter().filter(|s| s.pc == pc) {
                for (vi, v) in x.domain.iter().enumerate() {
                    let (s2, v2) = match ins {
                        Instruction::Read { into, .. } => (s.advance(Some((into, v))), vi),
                        Instruction::Write { value, .. } => (s.advance(None), vidx(value)),
                        Instruction::Cas { old, new, into, .. } => {
                            if v == old {
                                (s.advance(Some((into, "true"))), vidx(new))
                            } else {
                                (s.advance(Some((into, "false"))), vi)
                            }
                        }
                    };
                    transitions_named.push((
                        action.clone(),
                        tp.clone(),
                        idx(s),
                        idx(&s2),
                        xp.clone(),
                        vi,
                        v2,
                    ));
                }
            }
        }
    }

    let alphabet = DistributedAlphabet::new(names.iter().cloned(), dom)?;
    let processes: Vec<&ProcessId> = alphabet.processes().iter().collect();

    let mut locals = Vec::new();
    let mut accepting = Vec::new();
    for p in &processes {
        if let Some(ti) = threads.iter().position(|t| &thread_proc(&t.name) == *p) {
            let states = &thread_states[ti];
            let len = threads[ti].instructions.len();
            locals.push(LocalStates {
                names: states.iter().map(ThreadState::name).collect(),
                initial: 0,
                rejecting: BTreeSet::new(),
            });
            accepting.push((0..states.len()).filter(|&i| states[i].pc == len).collect());
        } else {
            let v = variables
                .iter()
                .find(|v| &var_proc(&v.name) == *p)
                .expect("process comes from a thread or a variable");
            locals.push(LocalStates {
                names: v.domain.clone(),
                initial: v
                    .domain
                    .iter()
                    .position(|d| d == &v.initial)
                    .expect("checked"),
                rejecting: BTreeSet::new(),
            });
            accepting.push((0..v.domain.len()).collect());
        }
    }

    let transitions = transitions_named
        .into_iter()
        .map(|(action, tp, tpre, tpost, xp, xpre, xpost)| {
            // domain order follows process-name order
            let (pre, post) = if tp < xp {
                (vec![tpre, xpre], vec![tpost, xpost])
            } else {
                (vec![xpre, tpre], vec![xpost, tpost])
            };
            Transition { action, pre, post }
        })
        .collect();

    ZielonkaAutomaton::from_parts(alphabet, locals, transitions, Acceptance::Local(accepting))
}
