//! Minimizes a DFA and checks whether its language is closed under
//! commuting independent letters; prints a witness when it is not.
//!
//! ```bash
//! cargo run --example trace_closure
//! ```

use tracemon::lang::{is_trace_closed, minimize, Dfa};
use tracemon::trace::{ActionId, DependenceRelation};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ab = [ActionId::new("a"), ActionId::new("b")];
    let independent = DependenceRelation::from_unordered_pairs(ab.clone(), [])?;

    // exactly "a b"
    let only_ab = Dfa::from_named(
        ab.clone(),
        &["0", "1", "2"],
        "0",
        &["2"],
        &[("0", "a".into(), "1"), ("1", "b".into(), "2")],
    )?;
    match is_trace_closed(&only_ab, &independent)? {
        Some(w) => {
            let (x, y) = w.words();
            let (yes, no) = if only_ab.accepts(&x)? { (x, y) } else { (y, x) };
            println!("not closed: `{yes}` is accepted, `{no}` is not");
        }
        None => println!("closed"),
    }

    // same number of a's and b's modulo 2, with a redundant state
    let parity = Dfa::from_named(
        ab.clone(),
        &["even", "odd", "even2"],
        "even",
        &["even", "even2"],
        &[
            ("even", "a".into(), "odd"),
            ("even", "b".into(), "odd"),
            ("odd", "a".into(), "even2"),
            ("odd", "b".into(), "even2"),
            ("even2", "a".into(), "odd"),
            ("even2", "b".into(), "odd"),
        ],
    )?;
    println!(
        "parity: {} states, {} after minimization",
        parity.num_states(),
        minimize(&parity).num_states()
    );
    assert!(is_trace_closed(&parity, &independent)?.is_none());
    println!("parity language is closed");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
