//! Replays tree gossip on the line T1 - <T1,x> - <T2,x> - T2 and prints
//! what each process knows after every step, next to the exact answer.
//!
//! ```bash
//! cargo run --example gossip_tree
//! ```

use std::collections::BTreeSet;

use tracemon::gossip::{oracle_knowledge, render_table, replay, ProcessTree};
use tracemon::trace::{ActionId, DistributedAlphabet, ProcessId, Word};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let alphabet = DistributedAlphabet::from_domains([
        ("beg(T1)", &["T1"][..]),
        ("r(T1,x)", &["T1", "<T1,x>"][..]),
        ("w(T1,x)", &["T1", "<T1,x>", "<T2,x>"][..]),
        ("en(T1)", &["T1"][..]),
        ("beg(T2)", &["T2"][..]),
        ("w(T2,x)", &["T2", "<T1,x>", "<T2,x>"][..]),
        ("en(T2)", &["T2"][..]),
    ])?;
    let order = ["T1", "<T1,x>", "<T2,x>", "T2"];
    let tree = ProcessTree::line(&order)?;
    let gamma: BTreeSet<ActionId> = alphabet.actions().cloned().collect();

    let w = Word::parse("beg(T1) r(T1,x) beg(T2) w(T2,x) w(T1,x) en(T1)");
    let snapshots = replay(&w, &alphabet, &tree, &gamma)?;
    let labels: Vec<String> = ["1", "2", "5", "6", "3", "4"].map(String::from).to_vec();
    let rows: Vec<ProcessId> = order.iter().map(|p| ProcessId::new(*p)).collect();
    print!("{}", render_table(&snapshots, &labels, &rows));

    let t1 = ProcessId::new("T1");
    let known = snapshots.last().expect("non-empty").knowledge_of(&t1)?;
    assert_eq!(
        known,
        oracle_knowledge(&w, &alphabet, &gamma, &t1, w.len())?
    );
    println!(
        "T1 knows beg(T1) < w(T2,x) < w(T1,x): {}",
        known.precedes(&"beg(T1)".into(), &"w(T2,x)".into())
            && known.precedes(&"w(T2,x)".into(), &"w(T1,x)".into())
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
