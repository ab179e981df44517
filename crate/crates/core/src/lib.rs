//! Runtime verification of concurrent programs through Mazurkiewicz traces.
//!
//! * [`trace`]: distributed alphabets, dependence, trace orders, Foata form.
//! * [`lang`]: DFAs, minimization and trace-closure checking.
//! * [`program`]: program events, conflict relations and standard alphabets.
//! * [`monitors`]: race, atomicity and serializability checks.
//! * [`zielonka`]: asynchronous automata, global expansion and products.
//! * [`gossip`]: per-process happens-before knowledge on tree alphabets.
//! * [`cli`]: file formats and the `tracemon` command line.

#![allow(clippy::needless_range_loop)]

mod bitset;
pub mod cli;
pub mod error;
pub mod gossip;
pub mod lang;
pub mod monitors;
pub mod program;
pub mod trace;
pub mod zielonka;

pub use error::{Error, Result};
