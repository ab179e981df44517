//! Distributed reconstruction of happens-before over a set Γ of monitored
//! actions, for alphabets whose action domains are connected subtrees of a
//! fixed process tree.
//!
//! Every process keeps a small DAG holding, for each action of Γ, the most
//! recent occurrence it knows of, plus the strict order among those
//! occurrences. When an action executes, the processes of its domain pool
//! their DAGs, keep the newest occurrence per action, and (if the action is
//! monitored) append it above everything they know.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::trace::{
    induced_dependence, trace_of_word, ActionId, DistributedAlphabet, EventId, ProcessId,
    TraceOrder, Word,
};

/// A rooted tree over processes. `out(p)` is the number of children of `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessTree {
    root: ProcessId,
    parent: BTreeMap<ProcessId, Option<ProcessId>>,
    children: BTreeMap<ProcessId, Vec<ProcessId>>,
}

impl ProcessTree {
    /// Builds a tree from `(parent, child)` edges. Every node other than the
    /// root needs exactly one parent and must be reachable from the root.
    pub fn from_edges(root: ProcessId, edges: &[(ProcessId, ProcessId)]) -> Result<Self> {
        let mut parent: BTreeMap<ProcessId, Option<ProcessId>> =
            BTreeMap::from([(root.clone(), None)]);
        let mut children: BTreeMap<ProcessId, Vec<ProcessId>> =
            BTreeMap::from([(root.clone(), Vec::new())]);
        for (p, c) in edges {
            if c == &root {
                return Err(Error::TreeMismatch(format!(
                    "root `{root}` cannot have a parent"
                )));
            }
            if let Some(Some(prev)) = parent.get(c) {
                return Err(Error::TreeMismatch(format!(
                    "`{c}` has two parents, `{prev}` and `{p}`"
                )));
            }
            parent.insert(c.clone(), Some(p.clone()));
            parent.entry(p.clone()).or_insert(None);
            children.entry(p.clone()).or_default().push(c.clone());
            children.entry(c.clone()).or_default();
        }
        for ch in children.values_mut() {
            ch.sort();
        }
        let tree = ProcessTree {
            root,
            parent,
            children,
        };
        let reached = tree.bfs(&tree.root, |_| true);
        if reached.len() != tree.parent.len() {
            let stray = tree
                .parent
                .keys()
                .find(|p| !reached.contains(*p))
                .expect("some node unreachable");
            return Err(Error::TreeMismatch(format!(
                "`{stray}` is not connected to the root"
            )));
        }
        Ok(tree)
    }

    /// A path `names[0] - names[1] - ...` rooted at the first name.
    pub fn line(names: &[&str]) -> Result<Self> {
        let ids: Vec<ProcessId> = names.iter().map(|n| ProcessId::new(*n)).collect();
        let root = ids
            .first()
            .cloned()
            .ok_or_else(|| Error::TreeMismatch("empty tree".into()))?;
        let edges: Vec<_> = ids
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect();
        Self::from_edges(root, &edges)
    }

    pub fn root(&self) -> &ProcessId {
        &self.root
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ProcessId> {
        self.parent.keys()
    }

    pub fn contains(&self, p: &ProcessId) -> bool {
        self.parent.contains_key(p)
    }

    pub fn parent(&self, p: &ProcessId) -> Option<&ProcessId> {
        self.parent.get(p).and_then(Option::as_ref)
    }

    pub fn children(&self, p: &ProcessId) -> &[ProcessId] {
        self.children.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn out_degree(&self, p: &ProcessId) -> usize {
        self.children(p).len()
    }

    fn neighbors<'a>(&'a self, p: &'a ProcessId) -> impl Iterator<Item = &'a ProcessId> + 'a {
        self.parent(p).into_iter().chain(self.children(p))
    }

    fn bfs<'a>(
        &'a self,
        start: &'a ProcessId,
        allowed: impl Fn(&ProcessId) -> bool,
    ) -> BTreeSet<&'a ProcessId> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in self.neighbors(p) {
                if allowed(q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        seen
    }
}

/// Checks that the tree spans exactly the alphabet's processes and that
/// every action domain induces a connected subtree.
pub fn validate_tree_like(alphabet: &DistributedAlphabet, tree: &ProcessTree) -> Result<()> {
    let nodes: BTreeSet<&ProcessId> = tree.nodes().collect();
    let procs: BTreeSet<&ProcessId> = alphabet.processes().iter().collect();
    if let Some(p) = procs.symmetric_difference(&nodes).next() {
        return Err(Error::TreeMismatch(if procs.contains(p) {
            format!("process `{p}` is missing from the tree")
        } else {
            format!("tree node `{p}` is not a process of the alphabet")
        }));
    }
    for (a, dom) in alphabet.domains() {
        let start = dom.iter().next().expect("domains are non-empty");
        let reached = tree.bfs(start, |q| dom.contains(q));
        if let Some(missing) = dom.iter().find(|q| !reached.contains(q)) {
            return Err(Error::NotTreeLike {
                action: a.clone(),
                from: start.clone(),
                to: missing.clone(),
            });
        }
    }
    Ok(())
}

/// What one process knows: the latest known occurrence of each monitored
/// action, and the strict happens-before relation among those occurrences
/// (kept transitively closed).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KnowledgeDag {
    nodes: BTreeMap<ActionId, EventId>,
    before: BTreeSet<(ActionId, ActionId)>,
}

impl KnowledgeDag {
    pub fn new(nodes: BTreeMap<ActionId, EventId>, before: BTreeSet<(ActionId, ActionId)>) -> Self {
        KnowledgeDag { nodes, before }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &BTreeMap<ActionId, EventId> {
        &self.nodes
    }

    pub fn occurrence(&self, a: &ActionId) -> Option<EventId> {
        self.nodes.get(a).copied()
    }

    /// Strict order between the recorded occurrences of `a` and `b`.
    pub fn precedes(&self, a: &ActionId, b: &ActionId) -> bool {
        self.before.contains(&(a.clone(), b.clone()))
    }

    pub fn order(&self) -> &BTreeSet<(ActionId, ActionId)> {
        &self.before
    }

    /// Covering pairs of the order, sorted by event ids.
    pub fn edges(&self) -> Vec<(ActionId, ActionId)> {
        let mut out: Vec<(ActionId, ActionId)> = self
            .before
            .iter()
            .filter(|(x, z)| {
                !self.nodes.keys().any(|y| {
                    self.before.contains(&(x.clone(), y.clone()))
                        && self.before.contains(&(y.clone(), z.clone()))
                })
            })
            .cloned()
            .collect();
        out.sort_by_key(|(x, y)| (self.nodes[x], self.nodes[y]));
        out
    }

    fn nodes_by_event(&self) -> Vec<(&ActionId, EventId)> {
        let mut v: Vec<_> = self.nodes.iter().map(|(a, &e)| (a, e)).collect();
        v.sort_by_key(|&(_, e)| e);
        v
    }
}

impl fmt::Display for KnowledgeDag {
    /// Edges as `a->b`, then isolated nodes; `∅` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.nodes.is_empty() {
            return f.write_str("∅");
        }
        let edges = self.edges();
        let mut parts: Vec<String> = edges.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        for (a, _) in self.nodes_by_event() {
            if !edges.iter().any(|(x, y)| x == a || y == a) {
                parts.push(a.to_string());
            }
        }
        f.write_str(&parts.join(", "))
    }
}

#[derive(Debug)]
struct GossipContext {
    alphabet: DistributedAlphabet,
    tree: ProcessTree,
    gamma: BTreeSet<ActionId>,
}

/// Per-process knowledge after some prefix of an execution.
#[derive(Debug, Clone)]
pub struct GossipState {
    ctx: Arc<GossipContext>,
    dags: BTreeMap<ProcessId, KnowledgeDag>,
    /// Per process: event id of the last action shared with each child.
    frontier: BTreeMap<ProcessId, BTreeMap<ProcessId, EventId>>,
    last_event: Option<EventId>,
}

impl PartialEq for GossipState {
    fn eq(&self, other: &Self) -> bool {
        self.dags == other.dags
            && self.frontier == other.frontier
            && self.last_event == other.last_event
    }
}

/// Empty knowledge everywhere. Fails unless the alphabet is tree-like for
/// `tree` and `gamma` only contains actions of the alphabet.
pub fn gossip_init(
    alphabet: &DistributedAlphabet,
    tree: &ProcessTree,
    gamma: &BTreeSet<ActionId>,
) -> Result<GossipState> {
    validate_tree_like(alphabet, tree)?;
    if let Some(a) = gamma.iter().find(|a| !alphabet.contains(a)) {
        return Err(Error::UnknownAction(a.clone()));
    }
    let dags = alphabet
        .processes()
        .iter()
        .map(|p| (p.clone(), KnowledgeDag::default()))
        .collect();
    let frontier = alphabet
        .processes()
        .iter()
        .map(|p| (p.clone(), BTreeMap::new()))
        .collect();
    Ok(GossipState {
        ctx: Arc::new(GossipContext {
            alphabet: alphabet.clone(),
            tree: tree.clone(),
            gamma: gamma.clone(),
        }),
        dags,
        frontier,
        last_event: None,
    })
}

impl GossipState {
    pub fn gamma(&self) -> &BTreeSet<ActionId> {
        &self.ctx.gamma
    }

    pub fn tree(&self) -> &ProcessTree {
        &self.ctx.tree
    }

    pub fn processes(&self) -> impl Iterator<Item = &ProcessId> {
        self.dags.keys()
    }

    pub fn last_event(&self) -> Option<EventId> {
        self.last_event
    }

    pub fn knowledge_of(&self, p: &ProcessId) -> Result<KnowledgeDag> {
        self.dags
            .get(p)
            .cloned()
            .ok_or_else(|| Error::UnknownProcess(p.clone()))
    }

    pub(crate) fn knowledge_ref(&self, p: &ProcessId) -> &KnowledgeDag {
        &self.dags[p]
    }

    /// `(dag nodes, frontier records)` currently stored by `p`.
    pub fn storage(&self, p: &ProcessId) -> Result<(usize, usize)> {
        let dag = self
            .dags
            .get(p)
            .ok_or_else(|| Error::UnknownProcess(p.clone()))?;
        Ok((dag.len(), self.frontier[p].len()))
    }

    /// Executes action `a` as event `eid`; only processes of `dom(a)` change.
    pub fn step(&self, a: &ActionId, eid: EventId) -> Result<GossipState> {
        let mut next = self.clone();
        next.apply(a, eid)?;
        Ok(next)
    }

    pub fn apply(&mut self, a: &ActionId, eid: EventId) -> Result<()> {
        let dom = self.ctx.alphabet.dom(a)?.clone();
        if let Some(previous) = self.last_event {
            if eid <= previous {
                return Err(Error::NonMonotoneEvent { eid, previous });
            }
        }

        let parts: Vec<&KnowledgeDag> = dom.iter().map(|p| &self.dags[p]).collect();
        let mut nodes: BTreeMap<ActionId, EventId> = BTreeMap::new();
        for dag in &parts {
            for (b, &e) in &dag.nodes {
                let slot = nodes.entry(b.clone()).or_insert(e);
                *slot = (*slot).max(e);
            }
        }
        // An order pair survives if some participant saw both kept occurrences.
        let mut before = BTreeSet::new();
        for dag in &parts {
            for (x, y) in &dag.before {
                if dag.nodes[x] == nodes[x] && dag.nodes[y] == nodes[y] {
                    before.insert((x.clone(), y.clone()));
                }
            }
        }
        if self.ctx.gamma.contains(a) {
            nodes.remove(a);
            before.retain(|(x, y)| x != a && y != a);
            for b in nodes.keys() {
                before.insert((b.clone(), a.clone()));
            }
            nodes.insert(a.clone(), eid);
        }
        let merged = KnowledgeDag { nodes, before };

        for p in &dom {
            self.dags.insert(p.clone(), merged.clone());
            let shared: Vec<ProcessId> = self
                .ctx
                .tree
                .children(p)
                .iter()
                .filter(|c| dom.contains(*c))
                .cloned()
                .collect();
            let rec = self.frontier.get_mut(p).expect("known process");
            for c in shared {
                rec.insert(c, eid);
            }
        }
        self.last_event = Some(eid);
        Ok(())
    }
}

/// Snapshots before the first event and after each event; event ids are
/// word positions.
pub fn replay(
    exec: &Word,
    alphabet: &DistributedAlphabet,
    tree: &ProcessTree,
    gamma: &BTreeSet<ActionId>,
) -> Result<Vec<GossipState>> {
    let mut state = gossip_init(alphabet, tree, gamma)?;
    let mut out = vec![state.clone()];
    for (i, a) in exec.iter().enumerate() {
        if !alphabet.contains(a) {
            return Err(Error::UnknownLetter {
                position: i + 1,
                letter: a.clone(),
            });
        }
        state.apply(a, i + 1)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// Ground truth for per-process knowledge, computed from the full trace.
pub struct KnowledgeOracle<'a> {
    alphabet: &'a DistributedAlphabet,
    gamma: &'a BTreeSet<ActionId>,
    word: &'a Word,
    trace: TraceOrder,
}

impl<'a> KnowledgeOracle<'a> {
    pub fn new(
        word: &'a Word,
        alphabet: &'a DistributedAlphabet,
        gamma: &'a BTreeSet<ActionId>,
    ) -> Result<Self> {
        let trace = trace_of_word(word, &induced_dependence(alphabet))?;
        Ok(KnowledgeOracle {
            alphabet,
            gamma,
            word,
            trace,
        })
    }

    /// Knowledge of `p` after the first `upto` events: the causal past of
    /// all events `p` took part in, reduced to the latest occurrence of each
    /// monitored action, ordered by happens-before.
    pub fn knowledge(&self, p: &ProcessId, upto: usize) -> Result<KnowledgeDag> {
        if !self.alphabet.processes().contains(p) {
            return Err(Error::UnknownProcess(p.clone()));
        }
        let upto = upto.min(self.word.len());
        let mut past = BitSet::with_capacity(upto);
        for f in 0..upto {
            if self.alphabet.dom(&self.word.letters()[f])?.contains(p) {
                past.insert(f);
                past.union_with(self.trace.ancestor_set(f));
            }
        }
        let mut nodes: BTreeMap<ActionId, EventId> = BTreeMap::new();
        for e in past.iter() {
            let a = &self.word.letters()[e];
            if self.gamma.contains(a) {
                // ascending scan: the last write wins
                nodes.insert(a.clone(), e + 1);
            }
        }
        let mut before = BTreeSet::new();
        for (x, &ex) in &nodes {
            for (y, &ey) in &nodes {
                if self.trace.precedes(ex, ey)? {
                    before.insert((x.clone(), y.clone()));
                }
            }
        }
        Ok(KnowledgeDag { nodes, before })
    }
}

pub fn oracle_knowledge(
    exec: &Word,
    alphabet: &DistributedAlphabet,
    gamma: &BTreeSet<ActionId>,
    p: &ProcessId,
    upto: usize,
) -> Result<KnowledgeDag> {
    KnowledgeOracle::new(exec, alphabet, gamma)?.knowledge(p, upto)
}

/// Text table with one row per process and one column per snapshot after
/// the initial one. Unchanged cells print as `...`, except in the first
/// column.
pub fn render_table(
    snapshots: &[GossipState],
    column_labels: &[String],
    row_order: &[ProcessId],
) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(column_labels.iter().cloned());
    rows.push(header);
    for p in row_order {
        let mut row = vec![p.to_string()];
        for i in 1..snapshots.len() {
            let now = snapshots[i].knowledge_ref(p);
            let cell = if i > 1 && now == snapshots[i - 1].knowledge_ref(p) {
                "...".to_string()
            } else {
                now.to_string()
            };
            row.push(cell);
        }
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .map(|r| r.get(c).map_or(0, |s| s.chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s}{}", " ".repeat(widths[c] - s.chars().count())))
            .collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_alphabet() -> DistributedAlphabet {
        DistributedAlphabet::from_domains([
            ("beg(T1)", &["T1"][..]),
            ("en(T1)", &["T1"][..]),
            ("r(T1,x)", &["T1", "<T1,x>"][..]),
            ("w(T1,x)", &["T1", "<T1,x>", "<T2,x>"][..]),
            ("beg(T2)", &["T2"][..]),
            ("en(T2)", &["T2"][..]),
            ("w(T2,x)", &["T2", "<T1,x>", "<T2,x>"][..]),
        ])
        .unwrap()
    }

    fn line_tree() -> ProcessTree {
        ProcessTree::line(&["T1", "<T1,x>", "<T2,x>", "T2"]).unwrap()
    }

    #[test]
    fn line_tree_is_tree_like() {
        validate_tree_like(&line_alphabet(), &line_tree()).unwrap();
        assert_eq!(line_tree().out_degree(&"T2".into()), 0);
        assert_eq!(line_tree().out_degree(&"T1".into()), 1);
    }

    #[test]
    fn disconnected_domain_is_rejected() {
        // star with centre c; dom(a) = two leaves
        let tree = ProcessTree::from_edges(
            "c".into(),
            &[("c".into(), "l1".into()), ("c".into(), "l2".into())],
        )
        .unwrap();
        let alpha =
            DistributedAlphabet::from_domains([("a", &["l1", "l2"][..]), ("b", &["c"][..])])
                .unwrap();
        assert!(matches!(
            validate_tree_like(&alpha, &tree),
            Err(Error::NotTreeLike { .. })
        ));
        let singletons = DistributedAlphabet::from_domains([
            ("a", &["l1"][..]),
            ("b", &["c"][..]),
            ("d", &["l2"][..]),
        ])
        .unwrap();
        validate_tree_like(&singletons, &tree).unwrap();
    }

    #[test]
    fn malformed_trees() {
        let two_parents = ProcessTree::from_edges(
            "r".into(),
            &[
                ("r".into(), "a".into()),
                ("r".into(), "b".into()),
                ("b".into(), "a".into()),
            ],
        );
        assert!(two_parents.is_err());
        let detached = ProcessTree::from_edges("r".into(), &[("x".into(), "y".into())]);
        assert!(detached.is_err());
        let alpha = DistributedAlphabet::from_domains([("a", &["T1"][..])]).unwrap();
        assert!(matches!(
            validate_tree_like(&alpha, &line_tree()),
            Err(Error::TreeMismatch(_))
        ));
    }

    #[test]
    fn empty_gamma_stays_empty() {
        let w = Word::parse("beg(T1) r(T1,x) beg(T2) w(T2,x) w(T1,x) en(T1)");
        let snaps = replay(&w, &line_alphabet(), &line_tree(), &BTreeSet::new()).unwrap();
        assert_eq!(snaps.len(), 7);
        for s in &snaps {
            for p in s.processes() {
                assert!(s.knowledge_of(p).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn step_errors() {
        let st = gossip_init(&line_alphabet(), &line_tree(), &BTreeSet::new()).unwrap();
        assert!(st.step(&"nope".into(), 1).is_err());
        let st = st.step(&"beg(T1)".into(), 3).unwrap();
        assert_eq!(
            st.step(&"beg(T1)".into(), 3).unwrap_err(),
            Error::NonMonotoneEvent {
                eid: 3,
                previous: 3
            }
        );
        assert!(st.knowledge_of(&"Q".into()).is_err());
        let bad_gamma = BTreeSet::from([ActionId::new("zz")]);
        assert!(gossip_init(&line_alphabet(), &line_tree(), &bad_gamma).is_err());
    }

    #[test]
    fn newer_occurrence_replaces_older_one() {
        let gamma: BTreeSet<ActionId> = line_alphabet().actions().cloned().collect();
        let w = Word::parse("beg(T1) en(T1) beg(T1)");
        let snaps = replay(&w, &line_alphabet(), &line_tree(), &gamma).unwrap();
        let k = snaps[3].knowledge_of(&"T1".into()).unwrap();
        assert_eq!(k.occurrence(&"beg(T1)".into()), Some(3));
        assert!(k.precedes(&"en(T1)".into(), &"beg(T1)".into()));
        assert!(!k.precedes(&"beg(T1)".into(), &"en(T1)".into()));
    }
}
