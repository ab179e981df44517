//! Dependence alphabets, traces of words and happens-before queries.
//!
//! A word over a dependence alphabet determines a labelled partial order:
//! events are word positions, and position `i` precedes position `j` when a
//! chain of pairwise dependent letters leads from `i` to `j` in word order.

mod alphabet;
mod foata;
mod order;

pub use alphabet::{
    induced_dependence, validate_dependence, ActionId, DependenceRelation, DependenceViolation,
    DistributedAlphabet, ProcessId, Word,
};
pub use foata::{foata_normal_form, trace_equivalent, FoataNormalForm};
pub use order::{trace_of_word, EventId, LinearExtensions, TraceOrder};
