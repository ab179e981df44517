//! Compiles compare-and-swap programs into a Zielonka automaton with one
//! process per thread and per variable, and explores its global runs.
//!
//! ```bash
//! cargo run --example zielonka_cas
//! ```

use tracemon::trace::Word;
use tracemon::zielonka::{
    cas_system, Instruction, SharedVariable, ThreadProgram, DEFAULT_STATE_BUDGET,
};

fn claim(thread: &str) -> ThreadProgram {
    ThreadProgram {
        name: thread.into(),
        instructions: vec![Instruction::Cas {
            var: "x".into(),
            old: "0".into(),
            new: "1".into(),
            into: "y".into(),
        }],
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x = SharedVariable {
        name: "x".into(),
        domain: vec!["0".into(), "1".into(), "2".into()],
        initial: "0".into(),
    };

    // One CAS: success from 0, failure leaves 1 and 2 untouched.
    let single = cas_system(&[claim("T")], std::slice::from_ref(&x))?;
    for t in single.transitions() {
        println!("{}: {:?} -> {:?}", t.action, t.pre, t.post);
    }

    // Two threads race for the same slot.
    let race = cas_system(&[claim("T1"), claim("T2")], &[x])?;
    let g = race.global_automaton(DEFAULT_STATE_BUDGET)?;
    println!("{} reachable global states", g.states.len());
    for s in &g.states {
        println!("  {}", race.describe(s));
    }
    let w = Word::parse("y=CAS(T2,x,0,1)@0 y=CAS(T1,x,0,1)@0");
    println!("{w}: {:?}", race.run(&w)?);
    assert!(race.check_trace_closed(DEFAULT_STATE_BUDGET)?.is_none());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
