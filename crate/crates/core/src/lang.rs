//! Deterministic finite automata with partial transition functions,
//! minimization, and the trace-closure test on the minimal automaton.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trace::{ActionId, DependenceRelation, Word};

/// A DFA whose missing transitions lead to an implicit rejecting sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<ActionId>,
    letter_index: BTreeMap<ActionId, usize>,
    names: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    delta: Vec<Vec<Option<usize>>>,
}

impl Dfa {
    /// Index-based constructor. `delta[q][c]` is the successor of state `q`
    /// on the `c`-th letter of `alphabet` (which must be sorted and unique).
    pub fn from_table(
        alphabet: Vec<ActionId>,
        initial: usize,
        accepting: Vec<bool>,
        delta: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        let n = accepting.len();
        if !alphabet.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::structural(
                "DFA alphabet must be sorted and duplicate-free",
            ));
        }
        if initial >= n.max(1) || n == 0 {
            return Err(Error::structural("DFA initial state out of range"));
        }
        if delta.len() != n
            || delta
                .iter()
                .any(|row| row.len() != alphabet.len() || row.iter().flatten().any(|&t| t >= n))
        {
            return Err(Error::structural(
                "DFA transition table has the wrong shape",
            ));
        }
        let letter_index = alphabet
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(Dfa {
            alphabet,
            letter_index,
            names: (0..n).map(|q| format!("q{q}")).collect(),
            initial,
            accepting,
            delta,
        })
    }

    /// Name-based constructor used by file formats.
    pub fn from_named<S: AsRef<str>>(
        alphabet: impl IntoIterator<Item = ActionId>,
        states: &[S],
        initial: &str,
        accepting: &[S],
        transitions: &[(S, ActionId, S)],
    ) -> Result<Self> {
        let alphabet: Vec<ActionId> = alphabet
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut idx = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if idx.insert(s.as_ref().to_string(), i).is_some() {
                return Err(Error::structural(format!(
                    "duplicate DFA state `{}`",
                    s.as_ref()
                )));
            }
        }
        let lookup = |s: &str| {
            idx.get(s)
                .copied()
                .ok_or_else(|| Error::structural(format!("unknown DFA state `{s}`")))
        };
        let initial = lookup(initial)?;
        let mut acc = vec![false; states.len()];
        for s in accepting {
            acc[lookup(s.as_ref())?] = true;
        }
        let letters: BTreeMap<&ActionId, usize> =
            alphabet.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut delta = vec![vec![None; alphabet.len()]; states.len()];
        for (from, a, to) in transitions {
            let (f, t) = (lookup(from.as_ref())?, lookup(to.as_ref())?);
            let c = *letters
                .get(a)
                .ok_or_else(|| Error::UnknownAction(a.clone()))?;
            match delta[f][c] {
                Some(prev) if prev != t => {
                    return Err(Error::structural(format!(
                        "nondeterministic transitions from `{}` on `{a}`",
                        from.as_ref()
                    )))
                }
                _ => delta[f][c] = Some(t),
            }
        }
        let mut dfa = Dfa::from_table(alphabet, initial, acc, delta)?;
        dfa.names = states.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(dfa)
    }

    pub fn alphabet(&self) -> &[ActionId] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn letter_index(&self, a: &ActionId) -> Option<usize> {
        self.letter_index.get(a).copied()
    }

    pub fn next(&self, q: usize, letter: usize) -> Option<usize> {
        self.delta[q][letter]
    }

    /// Number of defined transitions.
    pub fn num_transitions(&self) -> usize {
        self.delta.iter().flatten().flatten().count()
    }

    /// State reached on `w`, `None` once a transition is missing.
    pub fn run_from(&self, q: usize, w: &Word) -> Result<Option<usize>> {
        let mut cur = Some(q);
        for (pos, a) in w.iter().enumerate() {
            let c = self.letter_index(a).ok_or_else(|| Error::UnknownLetter {
                position: pos + 1,
                letter: a.clone(),
            })?;
            cur = cur.and_then(|q| self.delta[q][c]);
        }
        Ok(cur)
    }

    pub fn accepts(&self, w: &Word) -> Result<bool> {
        Ok(self
            .run_from(self.initial, w)?
            .is_some_and(|q| self.accepting[q]))
    }
}

pub fn run_dfa(d: &Dfa, w: &Word) -> Result<bool> {
    d.accepts(w)
}

/// Minimal DFA for the same language.
///
/// Unreachable states are dropped, equivalent states merged (Hopcroft
/// refinement over the sink-completed automaton), and the dead class is
/// removed again unless it is the initial state. States are renumbered in
/// breadth-first order from the initial state, so language-equal inputs give
/// identical outputs.
pub fn minimize(d: &Dfa) -> Dfa {
    let k = d.alphabet.len();

    // reachable part, completed with a sink at index `m`
    let reach = bfs_order(d.initial, k, |q, c| d.delta[q][c]);
    let mut local = vec![usize::MAX; d.num_states()];
    for (i, &q) in reach.iter().enumerate() {
        local[q] = i;
    }
    let m = reach.len();
    let sink = m;
    let n = m + 1;
    let mut next = vec![vec![sink; k]; n];
    let mut acc = vec![false; n];
    for (i, &q) in reach.iter().enumerate() {
        acc[i] = d.accepting[q];
        for c in 0..k {
            if let Some(t) = d.delta[q][c] {
                next[i][c] = local[t];
            }
        }
    }

    let block_of = hopcroft(&next, &acc, k);
    let nblocks = block_of.iter().max().map_or(0, |b| b + 1);

    let mut qnext = vec![vec![0usize; k]; nblocks];
    let mut qacc = vec![false; nblocks];
    for q in 0..n {
        let b = block_of[q];
        qacc[b] = acc[q];
        for c in 0..k {
            qnext[b][c] = block_of[next[q][c]];
        }
    }

    // at most one block can be dead in a minimal complete automaton
    let mut live = qacc.clone();
    loop {
        let mut changed = false;
        for b in 0..nblocks {
            if !live[b] && qnext[b].iter().any(|&t| live[t]) {
                live[b] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let init_block = block_of[0];
    let order = bfs_order(init_block, k, |b, c| {
        let t = qnext[b][c];
        live[t].then_some(t)
    });
    let mut renum = vec![usize::MAX; nblocks];
    for (i, &b) in order.iter().enumerate() {
        renum[b] = i;
    }
    let delta = order
        .iter()
        .map(|&b| {
            (0..k)
                .map(|c| {
                    let t = qnext[b][c];
                    live[t].then(|| renum[t])
                })
                .collect()
        })
        .collect();
    let accepting = order.iter().map(|&b| qacc[b]).collect();
    Dfa::from_table(d.alphabet.clone(), 0, accepting, delta).expect("well-formed quotient")
}

fn bfs_order(start: usize, k: usize, succ: impl Fn(usize, usize) -> Option<usize>) -> Vec<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut order = vec![start];
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        i += 1;
        for c in 0..k {
            if let Some(t) = succ(q, c) {
                if seen.insert(t) {
                    order.push(t);
                }
            }
        }
    }
    order
}

/// Hopcroft partition refinement on a complete DFA. Returns block per state.
fn hopcroft(next: &[Vec<usize>], acc: &[bool], k: usize) -> Vec<usize> {
    let n = next.len();
    let mut pre: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; k];
    for q in 0..n {
        for c in 0..k {
            pre[c][next[q][c]].push(q);
        }
    }

    let (finals, rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&q| acc[q]);
    let mut blocks: Vec<Vec<usize>> = [finals, rest]
        .into_iter()
        .filter(|b| !b.is_empty())
        .collect();
    let mut block_of = vec![0; n];
    for (b, members) in blocks.iter().enumerate() {
        for &q in members {
            block_of[q] = b;
        }
    }
    let mut in_work = vec![true; blocks.len()];
    let mut work: Vec<usize> = (0..blocks.len()).collect();

    while let Some(splitter) = work.pop() {
        in_work[splitter] = false;
        let members = blocks[splitter].clone();
        for c in 0..k {
            let mut hit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &t in &members {
                for &q in &pre[c][t] {
                    hit.entry(block_of[q]).or_default().push(q);
                }
            }
            for (b, mut inside) in hit {
                inside.sort_unstable();
                inside.dedup();
                if inside.len() == blocks[b].len() {
                    continue;
                }
                let inside_set: BTreeSet<usize> = inside.iter().copied().collect();
                let outside: Vec<usize> = blocks[b]
                    .iter()
                    .copied()
                    .filter(|q| !inside_set.contains(q))
                    .collect();
                let new_id = blocks.len();
                let (stay, moved) = if inside.len() <= outside.len() {
                    (outside, inside)
                } else {
                    (inside, outside)
                };
                for &q in &moved {
                    block_of[q] = new_id;
                }
                blocks[b] = stay;
                blocks.push(moved);
                // If `b` is pending both halves must be; otherwise the
                // smaller half suffices, and `moved` is the smaller one.
                in_work.push(true);
                work.push(new_id);
            }
        }
    }
    block_of
}

/// Evidence that a language is not trace-closed: exactly one of
/// `u·a·b·v` and `u·b·a·v` is accepted although `a` and `b` are independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureWitness {
    pub u: Word,
    pub a: ActionId,
    pub b: ActionId,
    pub v: Word,
}

impl ClosureWitness {
    pub fn words(&self) -> (Word, Word) {
        let build = |x: &ActionId, y: &ActionId| {
            self.u
                .iter()
                .chain([x, y])
                .chain(self.v.iter())
                .cloned()
                .collect::<Word>()
        };
        (build(&self.a, &self.b), build(&self.b, &self.a))
    }
}

/// Checks that swapping adjacent independent letters never changes
/// membership, by comparing the states reached on `ab` and `ba` from every
/// state of the minimal automaton. `None` means the language is trace-closed.
pub fn is_trace_closed(d: &Dfa, dep: &DependenceRelation) -> Result<Option<ClosureWitness>> {
    if let Some(a) = d.alphabet.iter().find(|a| !dep.contains_action(a)) {
        return Err(Error::UnknownAction(a.clone()));
    }
    let min = minimize(d);
    let k = min.alphabet.len();

    let step = |q: Option<usize>, c: usize| q.and_then(|q| min.delta[q][c]);
    for q in 0..min.num_states() {
        for a in 0..k {
            for b in a + 1..k {
                if dep.depends(&min.alphabet[a], &min.alphabet[b]) {
                    continue;
                }
                let ab = step(step(Some(q), a), b);
                let ba = step(step(Some(q), b), a);
                if ab != ba {
                    let v = distinguishing_suffix(&min, ab, ba)
                        .expect("distinct states of a trimmed minimal DFA are distinguishable");
                    return Ok(Some(ClosureWitness {
                        u: access_word(&min, q),
                        a: min.alphabet[a].clone(),
                        b: min.alphabet[b].clone(),
                        v,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Shortest word reaching `target`, from BFS in letter order.
fn access_word(d: &Dfa, target: usize) -> Word {
    let k = d.alphabet.len();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; d.num_states()];
    let mut seen = vec![false; d.num_states()];
    seen[d.initial] = true;
    let mut queue = VecDeque::from([d.initial]);
    while let Some(q) = queue.pop_front() {
        if q == target {
            break;
        }
        for c in 0..k {
            if let Some(t) = d.delta[q][c] {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, c));
                    queue.push_back(t);
                }
            }
        }
    }
    assert!(
        seen[target],
        "all states of a trimmed minimal DFA are reachable"
    );
    let mut letters = Vec::new();
    let mut cur = target;
    while let Some((p, c)) = parent[cur] {
        letters.push(d.alphabet[c].clone());
        cur = p;
    }
    letters.reverse();
    Word::new(letters)
}

/// Shortest suffix accepted from exactly one of `x`, `y` (`None` = sink).
fn distinguishing_suffix(d: &Dfa, x: Option<usize>, y: Option<usize>) -> Option<Word> {
    let acc = |q: Option<usize>| q.is_some_and(|q| d.accepting[q]);
    type Pair = (Option<usize>, Option<usize>);
    let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::new();
    parent.insert((x, y), None);
    let mut queue = VecDeque::from([(x, y)]);
    while let Some(pair) = queue.pop_front() {
        if acc(pair.0) != acc(pair.1) {
            let mut letters = Vec::new();
            let mut cur = pair;
            while let Some(Some((prev, c))) = parent.get(&cur) {
                letters.push(d.alphabet[*c].clone());
                cur = *prev;
            }
            letters.reverse();
            return Some(Word::new(letters));
        }
        for c in 0..d.alphabet.len() {
            let nxt = (
                pair.0.and_then(|q| d.delta[q][c]),
                pair.1.and_then(|q| d.delta[q][c]),
            );
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(nxt) {
                e.insert(Some((pair, c)));
                queue.push_back(nxt);
            }
        }
    }
    None
}
