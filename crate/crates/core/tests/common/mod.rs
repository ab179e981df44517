//! Reference implementations and random instance generators shared by the
//! integration tests. Oracles here recompute results from definitions,
//! without going through the library's algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracemon::gossip::ProcessTree;
use tracemon::lang::Dfa;
use tracemon::program::{atomicity_conflict, Op, ProgramEvent, ProgramExecution};
use tracemon::trace::{ActionId, DependenceRelation, DistributedAlphabet, ProcessId, Word};
use tracemon::zielonka::ZielonkaAutomaton;

/// Seed for randomized suites: `TRACEMON_SEED` or a fixed default.
pub fn base_seed() -> u64 {
    std::env::var("TRACEMON_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5eed_2024)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn letters(k: usize) -> Vec<ActionId> {
    (0..k)
        .map(|i| ActionId::new(((b'a' + i as u8) as char).to_string()))
        .collect()
}

/// Random symmetric dependence over the first `k` letters.
pub fn random_dependence(r: &mut impl Rng, k: usize) -> DependenceRelation {
    let ls = letters(k);
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if r.gen_bool(0.5) {
                pairs.push((ls[i].clone(), ls[j].clone()));
            }
        }
    }
    DependenceRelation::from_unordered_pairs(ls, pairs).unwrap()
}

pub fn word_of(idx: &[usize]) -> Word {
    let ls = letters(26);
    idx.iter().map(|&i| ls[i].clone()).collect()
}

// ---------------------------------------------------------------- traces

/// `m[i][j]` iff position `i` happens before `j` (reflexive), 0-based,
/// by Floyd–Warshall over `{(i, j) | i < j, dependent}`.
pub fn closure_oracle(w: &Word, dep: &DependenceRelation) -> Vec<Vec<bool>> {
    let n = w.len();
    let l = w.letters();
    let mut m = vec![vec![false; n]; n];
    for i in 0..n {
        m[i][i] = true;
        for j in i + 1..n {
            m[i][j] = dep.depends(&l[i], &l[j]);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    m
}

/// All words reachable by swapping adjacent independent letters.
pub fn swap_class(w: &[usize], independent: impl Fn(usize, usize) -> bool) -> HashSet<Vec<usize>> {
    let mut seen = HashSet::from([w.to_vec()]);
    let mut queue = VecDeque::from([w.to_vec()]);
    while let Some(u) = queue.pop_front() {
        for i in 0..u.len().saturating_sub(1) {
            if u[i] != u[i + 1] && independent(u[i], u[i + 1]) {
                let mut v = u.clone();
                v.swap(i, i + 1);
                if seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
    }
    seen
}

// ---------------------------------------------------------------- DFAs

pub fn eval_recursive(d: &Dfa, q: usize, w: &[ActionId]) -> bool {
    match w.split_first() {
        None => d.is_accepting(q),
        Some((a, rest)) => match d.letter_index(a).and_then(|c| d.next(q, c)) {
            Some(t) => eval_recursive(d, t, rest),
            None => false,
        },
    }
}

/// Number of states of the minimal partial DFA, by Moore refinement on the
/// reachable part completed with a sink (dead class dropped unless initial).
pub fn moore_state_count(d: &Dfa) -> usize {
    let k = d.alphabet().len();
    let n = d.num_states();
    let sink = n;
    let next = |q: usize, c: usize| {
        if q == sink {
            sink
        } else {
            d.next(q, c).unwrap_or(sink)
        }
    };
    let mut reach = vec![false; n + 1];
    let mut stack = vec![d.initial()];
    reach[d.initial()] = true;
    while let Some(q) = stack.pop() {
        for c in 0..k {
            let t = next(q, c);
            if !reach[t] {
                reach[t] = true;
                stack.push(t);
            }
        }
    }
    reach[sink] = true;
    let states: Vec<usize> = (0..=n).filter(|&q| reach[q]).collect();
    let acc = |q: usize| q != sink && d.is_accepting(q);
    let mut class: BTreeMap<usize, usize> = states.iter().map(|&q| (q, acc(q) as usize)).collect();
    loop {
        let mut sigs: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut refined = BTreeMap::new();
        for &q in &states {
            let mut sig = vec![class[&q]];
            sig.extend((0..k).map(|c| class[&next(q, c)]));
            let fresh = sigs.len();
            let id = *sigs.entry(sig).or_insert(fresh);
            refined.insert(q, id);
        }
        let before: BTreeSet<_> = class.values().collect();
        let after: BTreeSet<_> = refined.values().collect();
        let done = before.len() == after.len();
        class = refined;
        if done {
            break;
        }
    }
    // live classes: can reach acceptance
    let mut live: BTreeSet<usize> = states
        .iter()
        .filter(|&&q| acc(q))
        .map(|q| class[q])
        .collect();
    loop {
        let mut changed = false;
        for &q in &states {
            if !live.contains(&class[&q]) && (0..k).any(|c| live.contains(&class[&next(q, c)])) {
                live.insert(class[&q]);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if live.contains(&class[&d.initial()]) {
        live.len()
    } else {
        1
    }
}

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn all_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for c in 0..k {
                let mut v: Vec<usize> = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------- programs

/// Random well-formed executions over variables `x`, `y` with transactions;
/// some transactions may remain open at the end.
pub fn random_transactional_execution(
    r: &mut impl Rng,
    max_threads: usize,
    max_len: usize,
) -> ProgramExecution {
    let threads = r.gen_range(1..=max_threads);
    let len = r.gen_range(1..=max_len);
    let mut in_tx = vec![false; threads];
    let mut events = Vec::new();
    for _ in 0..len {
        let t = r.gen_range(0..threads);
        let name = format!("T{}", t + 1);
        let var = if r.gen_bool(0.6) { "x" } else { "y" };
        let access = |r: &mut dyn rand::RngCore| {
            if r.gen_bool(0.5) {
                ProgramEvent::read(&name, var)
            } else {
                ProgramEvent::write(&name, var)
            }
        };
        let e = if in_tx[t] {
            if r.gen_bool(0.3) {
                in_tx[t] = false;
                ProgramEvent::end(&name)
            } else {
                access(r)
            }
        } else if r.gen_bool(0.4) {
            in_tx[t] = true;
            ProgramEvent::begin(&name)
        } else {
            access(r)
        };
        events.push(e);
    }
    ProgramExecution::new(events)
}

/// Exhaustive serializability: enumerates every linear extension of the
/// conflict order and looks for one without an interrupted transaction.
pub fn brute_force_serializable(exec: &ProgramExecution) -> bool {
    let ev = &exec.events;
    let n = ev.len();
    let mut before = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            before[i][j] = atomicity_conflict(&ev[i], &ev[j]);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if before[i][k] && before[k][j] {
                    before[i][j] = true;
                }
            }
        }
    }
    // transaction id of every event inside a begin..end block
    let mut tx_of = vec![None; n];
    let mut open: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tx_count = 0;
    for (i, e) in ev.iter().enumerate() {
        let t = e.thread.0.as_str();
        match e.op {
            Op::Begin => {
                open.insert(t, tx_count);
                tx_count += 1;
                tx_of[i] = open.get(t).copied();
            }
            Op::End => {
                tx_of[i] = open.remove(t);
            }
            _ => tx_of[i] = open.get(t).copied(),
        }
    }
    let serial = |order: &[usize]| {
        // each transaction's events must be contiguous, except that an open
        // transaction extends to the end
        let mut closed_tx = vec![false; tx_count];
        let mut current: Option<usize> = None;
        for &e in order {
            match tx_of[e] {
                Some(t) => {
                    if closed_tx[t] {
                        return false;
                    }
                    if let Some(c) = current {
                        if c != t {
                            return false;
                        }
                    }
                    current = Some(t);
                    if matches!(ev[e].op, Op::End) {
                        closed_tx[t] = true;
                        current = None;
                    }
                }
                None => {
                    if current.is_some() {
                        return false;
                    }
                }
            }
        }
        true
    };
    let mut order = Vec::new();
    let mut placed = vec![false; n];
    fn search(
        n: usize,
        before: &[Vec<bool>],
        placed: &mut Vec<bool>,
        order: &mut Vec<usize>,
        serial: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if order.len() == n {
            return serial(order);
        }
        for e in 0..n {
            if !placed[e] && (0..n).all(|d| d == e || !before[d][e] || placed[d]) {
                placed[e] = true;
                order.push(e);
                let found = search(n, before, placed, order, serial);
                order.pop();
                placed[e] = false;
                if found {
                    return true;
                }
            }
        }
        false
    }
    search(n, &before, &mut placed, &mut order, &serial)
}

// ---------------------------------------------------------------- Zielonka

/// 1–3 processes, 2–4 actions with random non-empty domains.
pub fn random_alphabet(r: &mut impl Rng) -> DistributedAlphabet {
    let procs: Vec<String> = (0..r.gen_range(1..=3)).map(|i| format!("p{i}")).collect();
    let actions = r.gen_range(2..=4);
    let mut dom = Vec::new();
    for a in 0..actions {
        let mut d: BTreeSet<ProcessId> = procs
            .iter()
            .filter(|_| r.gen_bool(0.5))
            .map(|p| ProcessId::new(p.as_str()))
            .collect();
        if d.is_empty() {
            d.insert(ProcessId::new(procs.choose(r).unwrap().as_str()));
        }
        dom.push((ActionId::new(format!("a{a}")), d));
    }
    DistributedAlphabet::new(procs.iter().map(|p| ProcessId::new(p.as_str())), dom).unwrap()
}

/// Deterministic by construction: at most one transition per action and
/// local pre-state tuple. Up to 4 local states per process.
pub fn random_deterministic_automaton(
    r: &mut impl Rng,
    alphabet: &DistributedAlphabet,
) -> ZielonkaAutomaton {
    let procs: Vec<ProcessId> = alphabet.processes().iter().cloned().collect();
    let names = ["s0", "s1", "s2", "s3"];
    let sizes: Vec<usize> = procs.iter().map(|_| r.gen_range(1..=4)).collect();
    let mut b = ZielonkaAutomaton::builder(alphabet.clone());
    for (p, &m) in procs.iter().zip(&sizes) {
        b.process(p.as_str(), &names[..m], "s0", &[]).unwrap();
    }
    for (a, dom) in alphabet.domains() {
        let idx: Vec<usize> = dom
            .iter()
            .map(|p| procs.iter().position(|q| q == p).unwrap())
            .collect();
        for pre in tuples(&idx.iter().map(|&i| sizes[i]).collect::<Vec<_>>()) {
            if !r.gen_bool(0.7) {
                continue;
            }
            let post: Vec<usize> = idx.iter().map(|&i| r.gen_range(0..sizes[i])).collect();
            let pair = |v: &[usize]| -> Vec<(&str, &str)> {
                idx.iter()
                    .zip(v)
                    .map(|(&i, &s)| (procs[i].as_str(), names[s]))
                    .collect()
            };
            b.transition(a.as_str(), &pair(&pre), &pair(&post));
        }
    }
    if r.gen_bool(0.5) {
        for (p, &m) in procs.iter().zip(&sizes) {
            let ok: Vec<&str> = names[..m]
                .iter()
                .copied()
                .filter(|_| r.gen_bool(0.6))
                .collect();
            b.accept_local(p.as_str(), &ok);
        }
    } else {
        for g in tuples(&sizes) {
            if r.gen_bool(0.3) {
                let st: Vec<(&str, &str)> = procs
                    .iter()
                    .zip(&g)
                    .map(|(p, &s)| (p.as_str(), names[s]))
                    .collect();
                b.accept_global(&st);
            }
        }
    }
    b.build().unwrap()
}

/// All index tuples below the given bounds, in lexicographic order.
pub fn tuples(bounds: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &m in bounds {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..m).map(move |i| {
                    let mut u = t.clone();
                    u.push(i);
                    u
                })
            })
            .collect();
    }
    out
}

pub fn random_word(r: &mut impl Rng, actions: &[ActionId], len: usize) -> Word {
    (0..len)
        .map(|_| actions.choose(r).unwrap().clone())
        .collect()
}

// ---------------------------------------------------------------- gossip

pub struct TreeInstance {
    pub alphabet: DistributedAlphabet,
    pub tree: ProcessTree,
    pub gamma: BTreeSet<ActionId>,
    pub word: Word,
}

/// Random tree, actions whose domains are connected subtrees, random Γ and
/// a random word.
pub fn random_tree_instance(
    r: &mut impl Rng,
    max_procs: usize,
    max_events: usize,
    max_gamma: usize,
) -> TreeInstance {
    let n = r.gen_range(1..=max_procs);
    let pid = |i: usize| ProcessId::new(format!("p{i}"));
    let mut adj = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = r.gen_range(0..i);
        adj[i].push(parent);
        adj[parent].push(i);
        edges.push((pid(parent), pid(i)));
    }
    let tree = ProcessTree::from_edges(pid(0), &edges).unwrap();
    let actions = r.gen_range(1..=8);
    let mut dom = Vec::new();
    for a in 0..actions {
        let target = r.gen_range(1..=n);
        let mut set = BTreeSet::from([r.gen_range(0..n)]);
        while set.len() < target {
            let frontier: Vec<usize> = set
                .iter()
                .flat_map(|&v| adj[v].iter().copied())
                .filter(|u| !set.contains(u))
                .collect();
            set.insert(*frontier.choose(r).unwrap());
        }
        dom.push((
            ActionId::new(format!("a{a}")),
            set.into_iter().map(pid).collect(),
        ));
    }
    let alphabet = DistributedAlphabet::new((0..n).map(pid), dom).unwrap();
    let all: Vec<ActionId> = alphabet.actions().cloned().collect();
    let g = r.gen_range(0..=max_gamma.min(all.len()));
    let gamma = all.choose_multiple(r, g).cloned().collect();
    let len = r.gen_range(0..=max_events);
    let word = random_word(r, &all, len);
    TreeInstance {
        alphabet,
        tree,
        gamma,
        word,
    }
}
