use serde::Serialize;

use crate::error::Result;

use super::{trace_of_word, ActionId, DependenceRelation, EventId, Word};

/// Events grouped into steps of pairwise concurrent events; each event sits
/// one step above its highest strict predecessor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoataNormalForm {
    /// Event ids per step, each step ordered by action name.
    pub steps: Vec<Vec<EventId>>,
    /// The labels of `steps`, position for position.
    pub labels: Vec<Vec<ActionId>>,
}

impl FoataNormalForm {
    /// The canonical representative word: steps concatenated.
    pub fn to_word(&self) -> Word {
        self.labels.iter().flatten().cloned().collect()
    }
}

pub fn foata_normal_form(w: &Word, dep: &DependenceRelation) -> Result<FoataNormalForm> {
    let trace = trace_of_word(w, dep)?;
    let n = trace.len();
    let mut level = vec![0usize; n];
    for j in 0..n {
        level[j] = trace
            .ancestor_set(j)
            .iter()
            .map(|i| level[i] + 1)
            .max()
            .unwrap_or(0);
    }
    let depth = level.iter().max().map_or(0, |m| m + 1);
    let mut steps: Vec<Vec<EventId>> = vec![Vec::new(); depth];
    for (e, &l) in level.iter().enumerate() {
        steps[l].push(e + 1);
    }
    let labels_of = trace.labels();
    for step in &mut steps {
        step.sort_by(|&a, &b| labels_of[a - 1].cmp(&labels_of[b - 1]).then(a.cmp(&b)));
    }
    let labels = steps
        .iter()
        .map(|s| s.iter().map(|&e| labels_of[e - 1].clone()).collect())
        .collect();
    Ok(FoataNormalForm { steps, labels })
}

/// Two words are equivalent iff their normal forms agree label for label.
pub fn trace_equivalent(w1: &Word, w2: &Word, dep: &DependenceRelation) -> Result<bool> {
    if w1.len() != w2.len() {
        // still validate letters so unknown actions are reported consistently
        foata_normal_form(w1, dep)?;
        foata_normal_form(w2, dep)?;
        return Ok(false);
    }
    Ok(foata_normal_form(w1, dep)?.labels == foata_normal_form(w2, dep)?.labels)
}
