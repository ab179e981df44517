use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lang::Dfa;
use crate::trace::Word;

use super::{GlobalState, ZielonkaAutomaton};

/// Default cap on explored global states.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// The reachable part of the global transition system, in BFS order.
#[derive(Debug, Clone)]
pub struct GlobalGraph {
    pub states: Vec<GlobalState>,
    /// `(action index, target)` pairs per state, sorted.
    pub succ: Vec<Vec<(usize, usize)>>,
    /// BFS tree: predecessor state and action index.
    pub parent: Vec<Option<(usize, usize)>>,
}

impl GlobalGraph {
    /// Breadth-first exploration; errors once more than `budget` states exist.
    pub fn explore(z: &ZielonkaAutomaton, budget: usize) -> Result<GlobalGraph> {
        let init = z.initial_state();
        let mut index: HashMap<GlobalState, usize> = HashMap::from([(init.clone(), 0)]);
        let mut states = vec![init];
        let mut succ = Vec::new();
        let mut parent = vec![None];
        if budget == 0 {
            return Err(Error::BudgetExceeded { budget });
        }
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            let mut out = Vec::new();
            for ai in 0..z.actions().len() {
                for t in z.step_idx(&s, ai) {
                    let ti = match index.get(&t) {
                        Some(&ti) => ti,
                        None => {
                            if states.len() >= budget {
                                return Err(Error::BudgetExceeded { budget });
                            }
                            let ti = states.len();
                            index.insert(t.clone(), ti);
                            states.push(t);
                            parent.push(Some((i, ai)));
                            ti
                        }
                    };
                    out.push((ai, ti));
                }
            }
            succ.push(out);
            i += 1;
        }
        Ok(GlobalGraph {
            states,
            succ,
            parent,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Shortest word leading from the initial state to state `i`.
    pub fn path_to(&self, z: &ZielonkaAutomaton, mut i: usize) -> Word {
        let mut letters = Vec::new();
        while let Some((p, ai)) = self.parent[i] {
            letters.push(z.actions()[ai].clone());
            i = p;
        }
        letters.reverse();
        Word::new(letters)
    }

    /// States from which an accepting state is reachable.
    pub fn live(&self, z: &ZielonkaAutomaton) -> Vec<bool> {
        let n = self.len();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, out) in self.succ.iter().enumerate() {
            for &(_, t) in out {
                pred[t].push(s);
            }
        }
        let mut live: Vec<bool> = self.states.iter().map(|s| z.is_accepting(s)).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&s| live[s]).collect();
        while let Some(t) = stack.pop() {
            for &s in &pred[t] {
                if !live[s] {
                    live[s] = true;
                    stack.push(s);
                }
            }
        }
        live
    }

    /// Shortest word from state `from` to some accepting state.
    pub fn path_to_accepting(&self, z: &ZielonkaAutomaton, from: usize) -> Option<Word> {
        let mut parent: HashMap<usize, Option<(usize, usize)>> = HashMap::from([(from, None)]);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            if z.is_accepting(&self.states[s]) {
                let mut letters = Vec::new();
                let mut cur = s;
                while let Some(Some((p, ai))) = parent.get(&cur) {
                    letters.push(z.actions()[*ai].clone());
                    cur = *p;
                }
                letters.reverse();
                return Some(Word::new(letters));
            }
            for &(ai, t) in &self.succ[s] {
                parent.entry(t).or_insert_with(|| {
                    queue.push_back(t);
                    Some((s, ai))
                });
            }
        }
        None
    }
}

/// A deterministic Zielonka automaton viewed as an ordinary DFA on its
/// reachable global states.
#[derive(Debug, Clone)]
pub struct GlobalDfa {
    pub dfa: Dfa,
    /// Global state of each DFA state.
    pub states: Vec<GlobalState>,
}

impl ZielonkaAutomaton {
    /// Expands the reachable global states into a [`Dfa`] over the same actions.
    pub fn global_automaton(&self, budget: usize) -> Result<GlobalDfa> {
        if !self.is_deterministic() {
            return Err(Error::structural(
                "global expansion into a DFA needs a deterministic automaton",
            ));
        }
        let g = GlobalGraph::explore(self, budget)?;
        let k = self.actions().len();
        let mut delta = vec![vec![None; k]; g.len()];
        for (s, out) in g.succ.iter().enumerate() {
            for &(ai, t) in out {
                delta[s][ai] = Some(t);
            }
        }
        let accepting = g.states.iter().map(|s| self.is_accepting(s)).collect();
        let dfa = Dfa::from_table(self.actions().to_vec(), 0, accepting, delta)?;
        Ok(GlobalDfa {
            dfa,
            states: g.states,
        })
    }
}
