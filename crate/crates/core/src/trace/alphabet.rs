use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            /// Panics on an empty name; use [`Self::try_new`] for untrusted input.
            pub fn new(name: impl Into<String>) -> Self {
                Self::try_new(name).expect(concat!(stringify!($name), " must be non-empty"))
            }

            pub fn try_new(name: impl Into<String>) -> Option<Self> {
                let name = name.into();
                (!name.is_empty()).then_some(Self(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self::new(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// Name of an action (a letter of the alphabet).
    ActionId
);
name_type!(
    /// Name of a process of a distributed alphabet.
    ProcessId
);

/// Actions together with the set of processes that jointly execute each one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributedAlphabet {
    processes: BTreeSet<ProcessId>,
    dom: BTreeMap<ActionId, BTreeSet<ProcessId>>,
}

impl DistributedAlphabet {
    pub fn new(
        processes: impl IntoIterator<Item = ProcessId>,
        dom: impl IntoIterator<Item = (ActionId, BTreeSet<ProcessId>)>,
    ) -> Result<Self> {
        let processes: BTreeSet<_> = processes.into_iter().collect();
        let mut map = BTreeMap::new();
        for (action, procs) in dom {
            if procs.is_empty() {
                return Err(Error::InvalidAlphabet(format!(
                    "empty domain for `{action}`"
                )));
            }
            if let Some(p) = procs.iter().find(|p| !processes.contains(*p)) {
                return Err(Error::InvalidAlphabet(format!(
                    "domain of `{action}` mentions undeclared process `{p}`"
                )));
            }
            if map.insert(action.clone(), procs).is_some() {
                return Err(Error::InvalidAlphabet(format!(
                    "duplicate action `{action}`"
                )));
            }
        }
        Ok(DistributedAlphabet {
            processes,
            dom: map,
        })
    }

    /// Convenience constructor from string slices, processes inferred from domains.
    pub fn from_domains<'a>(
        entries: impl IntoIterator<Item = (&'a str, &'a [&'a str])>,
    ) -> Result<Self> {
        let dom: Vec<(ActionId, BTreeSet<ProcessId>)> = entries
            .into_iter()
            .map(|(a, ps)| {
                (
                    ActionId::new(a),
                    ps.iter().map(|p| ProcessId::new(*p)).collect(),
                )
            })
            .collect();
        let processes: BTreeSet<ProcessId> =
            dom.iter().flat_map(|(_, ps)| ps.iter().cloned()).collect();
        Self::new(processes, dom)
    }

    pub fn processes(&self) -> &BTreeSet<ProcessId> {
        &self.processes
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionId> {
        self.dom.keys()
    }

    pub fn contains(&self, action: &ActionId) -> bool {
        self.dom.contains_key(action)
    }

    pub fn dom(&self, action: &ActionId) -> Result<&BTreeSet<ProcessId>> {
        self.dom
            .get(action)
            .ok_or_else(|| Error::UnknownAction(action.clone()))
    }

    pub fn domains(&self) -> impl Iterator<Item = (&ActionId, &BTreeSet<ProcessId>)> {
        self.dom.iter()
    }

    pub fn len(&self) -> usize {
        self.dom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dom.is_empty()
    }
}

/// A binary relation over a finite action scope, meant to be reflexive and
/// symmetric. Arbitrary relations can be represented so that
/// [`validate_dependence`] has something to reject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceRelation {
    index: BTreeMap<ActionId, usize>,
    names: Vec<ActionId>,
    // row-major |names| x |names|
    matrix: Vec<bool>,
}

impl DependenceRelation {
    /// Builds the reflexive, symmetric relation generated by `pairs`.
    pub fn from_unordered_pairs<A, P>(actions: A, pairs: P) -> Result<Self>
    where
        A: IntoIterator<Item = ActionId>,
        P: IntoIterator<Item = (ActionId, ActionId)>,
    {
        let mut rel = Self::empty(actions);
        for i in 0..rel.names.len() {
            rel.set(i, i);
        }
        for (a, b) in pairs {
            let (i, j) = (rel.require(&a)?, rel.require(&b)?);
            rel.set(i, j);
            rel.set(j, i);
        }
        Ok(rel)
    }

    /// Builds exactly the given ordered pairs, with no closure applied.
    pub fn from_ordered_pairs<A, P>(actions: A, pairs: P) -> Result<Self>
    where
        A: IntoIterator<Item = ActionId>,
        P: IntoIterator<Item = (ActionId, ActionId)>,
    {
        let mut rel = Self::empty(actions);
        for (a, b) in pairs {
            let (i, j) = (rel.require(&a)?, rel.require(&b)?);
            rel.set(i, j);
        }
        Ok(rel)
    }

    fn empty(actions: impl IntoIterator<Item = ActionId>) -> Self {
        let names: Vec<ActionId> = actions
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let n = names.len();
        DependenceRelation {
            index,
            names,
            matrix: vec![false; n * n],
        }
    }

    fn require(&self, a: &ActionId) -> Result<usize> {
        self.index
            .get(a)
            .copied()
            .ok_or_else(|| Error::UnknownAction(a.clone()))
    }

    fn set(&mut self, i: usize, j: usize) {
        let n = self.names.len();
        self.matrix[i * n + j] = true;
    }

    /// Actions in scope, sorted by name.
    pub fn actions(&self) -> &[ActionId] {
        &self.names
    }

    pub fn index_of(&self, a: &ActionId) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn contains_action(&self, a: &ActionId) -> bool {
        self.index.contains_key(a)
    }

    #[inline]
    pub(crate) fn depends_idx(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.names.len() + j]
    }

    /// `a D b`; false when either action is out of scope.
    pub fn depends(&self, a: &ActionId, b: &ActionId) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.depends_idx(i, j),
            _ => false,
        }
    }

    pub fn independent(&self, a: &ActionId, b: &ActionId) -> bool {
        !self.depends(a, b)
    }

    /// All ordered pairs in the relation, in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (&ActionId, &ActionId)> {
        let n = self.names.len();
        (0..n)
            .flat_map(move |i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.depends_idx(i, j))
            .map(|(i, j)| (&self.names[i], &self.names[j]))
    }

    /// Maps each letter of `w` to its index, rejecting letters out of scope.
    pub(crate) fn index_word(&self, w: &Word) -> Result<Vec<usize>> {
        w.iter()
            .enumerate()
            .map(|(pos, a)| {
                self.index_of(a).ok_or_else(|| Error::UnknownLetter {
                    position: pos + 1,
                    letter: a.clone(),
                })
            })
            .collect()
    }
}

/// `a D b` iff their domains intersect.
pub fn induced_dependence(alphabet: &DistributedAlphabet) -> DependenceRelation {
    let actions: Vec<&ActionId> = alphabet.actions().collect();
    let mut pairs = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        for b in &actions[i..] {
            let (da, db) = (&alphabet.dom[*a], &alphabet.dom[*b]);
            if !da.is_disjoint(db) {
                pairs.push(((*a).clone(), (*b).clone()));
            }
        }
    }
    DependenceRelation::from_unordered_pairs(actions.into_iter().cloned(), pairs)
        .expect("pairs drawn from the alphabet itself")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DependenceViolation {
    #[error("not reflexive at {0}")]
    NotReflexive(ActionId),
    #[error("not symmetric at ({0},{1})")]
    NotSymmetric(ActionId, ActionId),
    #[error("action {0} is outside the relation's scope")]
    OutOfScope(ActionId),
}

/// Checks reflexivity over `actions` and symmetry, reporting the first offence.
pub fn validate_dependence<'a>(
    rel: &DependenceRelation,
    actions: impl IntoIterator<Item = &'a ActionId>,
) -> Result<(), DependenceViolation> {
    for a in actions {
        match rel.index_of(a) {
            None => return Err(DependenceViolation::OutOfScope(a.clone())),
            Some(i) if !rel.depends_idx(i, i) => {
                return Err(DependenceViolation::NotReflexive(a.clone()))
            }
            _ => {}
        }
    }
    let n = rel.names.len();
    for i in 0..n {
        for j in 0..n {
            if rel.depends_idx(i, j) && !rel.depends_idx(j, i) {
                return Err(DependenceViolation::NotSymmetric(
                    rel.names[i].clone(),
                    rel.names[j].clone(),
                ));
            }
        }
    }
    Ok(())
}

/// A finite sequence of actions. Positions are 1-based in every public API.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<ActionId>);

impl Word {
    pub fn new(letters: Vec<ActionId>) -> Self {
        Word(letters)
    }

    /// Splits on whitespace.
    pub fn parse(s: &str) -> Self {
        Word(s.split_whitespace().map(ActionId::new).collect())
    }

    pub fn letters(&self) -> &[ActionId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ActionId> {
        self.0.iter()
    }

    /// Letter at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> Option<&ActionId> {
        pos.checked_sub(1).and_then(|i| self.0.get(i))
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn push(&mut self, a: ActionId) {
        self.0.push(a);
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromIterator<ActionId> for Word {
    fn from_iter<I: IntoIterator<Item = ActionId>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a ActionId;
    type IntoIter = std::slice::Iter<'a, ActionId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
