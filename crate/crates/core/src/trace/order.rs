use std::fmt::Write as _;

use crate::bitset::BitSet;
use crate::error::{Error, Result};

use super::{ActionId, DependenceRelation, Word};

/// 1-based position of an event in the word it was built from.
pub type EventId = usize;

/// The labelled partial order of a word under a dependence relation.
///
/// Stores the transitive reduction of the strict order together with a
/// per-event set of strict predecessors, so `happens_before` is a bit lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceOrder {
    labels: Vec<ActionId>,
    // ancestors[j] = strict predecessors of event j (0-based)
    ancestors: Vec<BitSet>,
    // covering pairs, 1-based, sorted
    edges: Vec<(EventId, EventId)>,
}

/// Builds the trace of `w`: position `i` precedes `j` iff a chain of
/// increasing positions with consecutive dependent letters links them.
pub fn trace_of_word(w: &Word, dep: &DependenceRelation) -> Result<TraceOrder> {
    let idx = dep.index_word(w)?;
    let n = idx.len();
    let mut ancestors: Vec<BitSet> = Vec::with_capacity(n);
    for j in 0..n {
        let mut anc = BitSet::with_capacity(n);
        for i in (0..j).rev() {
            if anc.contains(i) || !dep.depends_idx(idx[i], idx[j]) {
                continue;
            }
            anc.insert(i);
            anc.union_with(&ancestors[i]);
        }
        ancestors.push(anc);
    }

    let mut edges = Vec::new();
    for (j, anc) in ancestors.iter().enumerate() {
        // Walk candidates from the latest down; an ancestor is a cover unless
        // it already sits below a previously chosen cover.
        let mut covered = BitSet::with_capacity(n);
        for i in (0..j).rev() {
            if anc.contains(i) && !covered.contains(i) {
                edges.push((i + 1, j + 1));
                covered.union_with(&ancestors[i]);
            }
        }
    }
    edges.sort_unstable();

    Ok(TraceOrder {
        labels: w.letters().to_vec(),
        ancestors,
        edges,
    })
}

impl TraceOrder {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: EventId) -> Result<&ActionId> {
        self.check(id)?;
        Ok(&self.labels[id - 1])
    }

    pub fn labels(&self) -> &[ActionId] {
        &self.labels
    }

    /// Covering pairs `(i, j)`, `i < j`, of the strict order.
    pub fn edges(&self) -> &[(EventId, EventId)] {
        &self.edges
    }

    fn check(&self, id: EventId) -> Result<()> {
        if id == 0 || id > self.labels.len() {
            Err(Error::EventOutOfRange {
                id,
                len: self.labels.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Reflexive happens-before.
    pub fn happens_before(&self, i: EventId, j: EventId) -> Result<bool> {
        self.check(i)?;
        self.check(j)?;
        Ok(i == j || self.ancestors[j - 1].contains(i - 1))
    }

    /// Strict happens-before.
    pub fn precedes(&self, i: EventId, j: EventId) -> Result<bool> {
        Ok(i != j && self.happens_before(i, j)?)
    }

    pub fn concurrent(&self, i: EventId, j: EventId) -> Result<bool> {
        Ok(i != j && !self.happens_before(i, j)? && !self.happens_before(j, i)?)
    }

    /// Strict predecessors of `id`, ascending.
    pub fn predecessors(&self, id: EventId) -> Result<Vec<EventId>> {
        self.check(id)?;
        Ok(self.ancestors[id - 1].iter().map(|i| i + 1).collect())
    }

    pub(crate) fn ancestor_set(&self, zero_based: usize) -> &BitSet {
        &self.ancestors[zero_based]
    }

    /// Enumerates the words whose trace is this order, in lexicographic order
    /// of event-id sequences, stopping after `limit` extensions.
    pub fn linear_extensions(&self, limit: usize) -> Result<LinearExtensions> {
        if limit == 0 {
            return Err(Error::InvalidLimit);
        }
        let n = self.len();
        let mut out = LinearExtensions::default();
        let mut missing: Vec<usize> = self.ancestors.iter().map(BitSet::len).collect();
        let mut placed = vec![false; n];
        let mut current = Vec::with_capacity(n);
        self.extend(&mut missing, &mut placed, &mut current, limit, &mut out);
        Ok(out)
    }

    fn extend(
        &self,
        missing: &mut [usize],
        placed: &mut [bool],
        current: &mut Vec<usize>,
        limit: usize,
        out: &mut LinearExtensions,
    ) {
        if out.truncated {
            return;
        }
        let n = placed.len();
        if current.len() == n {
            if out.orders.len() == limit {
                out.truncated = true;
                return;
            }
            out.orders.push(current.iter().map(|i| i + 1).collect());
            out.words
                .push(current.iter().map(|&i| self.labels[i].clone()).collect());
            return;
        }
        for e in 0..n {
            if placed[e] || missing[e] != 0 {
                continue;
            }
            placed[e] = true;
            current.push(e);
            let succ: Vec<usize> = (e + 1..n)
                .filter(|&k| self.ancestors[k].contains(e))
                .collect();
            for &k in &succ {
                missing[k] -= 1;
            }
            self.extend(missing, placed, current, limit, out);
            for &k in &succ {
                missing[k] += 1;
            }
            current.pop();
            placed[e] = false;
            if out.truncated {
                return;
            }
        }
    }

    /// DOT rendering of the covering relation, nodes labelled `id:action`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph trace {\n");
        for (i, a) in self.labels.iter().enumerate() {
            let label = format!("{}:{}", i + 1, a).replace('"', "\\\"");
            let _ = writeln!(s, "  e{} [label=\"{}\"];", i + 1, label);
        }
        for (i, j) in &self.edges {
            let _ = writeln!(s, "  e{i} -> e{j};");
        }
        s.push_str("}\n");
        s
    }
}

/// Result of [`TraceOrder::linear_extensions`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearExtensions {
    pub words: Vec<Word>,
    /// The same extensions as 1-based event-id sequences.
    pub orders: Vec<Vec<EventId>>,
    /// Set when more than `limit` extensions exist.
    pub truncated: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(actions: &[&str], pairs: &[(&str, &str)]) -> DependenceRelation {
        DependenceRelation::from_unordered_pairs(
            actions.iter().map(|a| ActionId::new(*a)),
            pairs
                .iter()
                .map(|(a, b)| (ActionId::new(*a), ActionId::new(*b))),
        )
        .unwrap()
    }

    #[test]
    fn two_letter_words() {
        let indep = rel(&["a", "b"], &[]);
        let t = trace_of_word(&Word::parse("a b"), &indep).unwrap();
        assert!(t.edges().is_empty());
        assert!(t.concurrent(1, 2).unwrap());

        let dep = rel(&["a", "b"], &[("a", "b")]);
        let t = trace_of_word(&Word::parse("a b"), &dep).unwrap();
        assert_eq!(t.edges(), &[(1, 2)]);
        assert!(!t.concurrent(1, 2).unwrap());
    }

    #[test]
    fn empty_word_and_reflexivity() {
        let d = rel(&["a"], &[]);
        let t = trace_of_word(&Word::default(), &d).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.to_dot(), "digraph trace {\n}\n");
        let t = trace_of_word(&Word::parse("a"), &d).unwrap();
        assert!(t.happens_before(1, 1).unwrap());
        assert!(!t.concurrent(1, 1).unwrap());
        assert_eq!(t.to_dot(), "digraph trace {\n  e1 [label=\"1:a\"];\n}\n");
    }

    #[test]
    fn out_of_range_and_unknown_letters() {
        let d = rel(&["a"], &[]);
        let t = trace_of_word(&Word::parse("a"), &d).unwrap();
        assert_eq!(
            t.happens_before(0, 1),
            Err(Error::EventOutOfRange { id: 0, len: 1 })
        );
        assert!(t.concurrent(1, 2).is_err());
        assert_eq!(
            trace_of_word(&Word::parse("a z"), &d),
            Err(Error::UnknownLetter {
                position: 2,
                letter: "z".into()
            })
        );
    }

    #[test]
    fn reduction_skips_transitive_pairs() {
        // a - b - c chain, a D c as well: edge (1,3) is implied.
        let d = rel(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        let t = trace_of_word(&Word::parse("a b c"), &d).unwrap();
        assert_eq!(t.edges(), &[(1, 2), (2, 3)]);
        assert!(t.precedes(1, 3).unwrap());
    }

    #[test]
    fn extensions_of_small_orders() {
        let d = rel(&["a", "b"], &[]);
        let t = trace_of_word(&Word::parse("a b"), &d).unwrap();
        let ext = t.linear_extensions(10).unwrap();
        assert_eq!(ext.words, vec![Word::parse("a b"), Word::parse("b a")]);
        assert!(!ext.truncated);
        let ext = t.linear_extensions(1).unwrap();
        assert_eq!(ext.words.len(), 1);
        assert!(ext.truncated);
        assert_eq!(t.linear_extensions(0), Err(Error::InvalidLimit));

        let chain = rel(&["a"], &[]);
        let t = trace_of_word(&Word::parse("a a a a"), &chain).unwrap();
        assert_eq!(t.linear_extensions(100).unwrap().words.len(), 1);
    }
}
