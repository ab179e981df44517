//! Attaches a locally rejecting monitor to a program automaton. The
//! process-wise product keeps the distribution: each process pairs its own
//! program state with its own monitor state.
//!
//! ```bash
//! cargo run --example monitor_product
//! ```

use tracemon::trace::{DistributedAlphabet, Word};
use tracemon::zielonka::{product_processwise, ZielonkaAutomaton, DEFAULT_STATE_BUDGET};

fn alphabet() -> Result<DistributedAlphabet, tracemon::Error> {
    DistributedAlphabet::from_domains([
        ("a", &["p"][..]),
        ("b", &["p", "q"][..]),
        ("c", &["q"][..]),
    ])
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Program: p may do `a` once, `b` synchronizes p and q, q may do `c`.
    let mut b = ZielonkaAutomaton::builder(alphabet()?);
    b.process("p", &["0", "1"], "0", &[])?;
    b.process("q", &["0"], "0", &[])?;
    b.transition("a", &[("p", "0")], &[("p", "1")])
        .transition("b", &[("p", "0"), ("q", "0")], &[("p", "0"), ("q", "0")])
        .transition("b", &[("p", "1"), ("q", "0")], &[("p", "1"), ("q", "0")])
        .transition("c", &[("q", "0")], &[("q", "0")]);
    let program = b.build()?;

    // Monitor: `c` is only allowed after some `b` that followed an `a`.
    let mut m = ZielonkaAutomaton::builder(alphabet()?);
    m.process("p", &["idle", "armed"], "idle", &[])?;
    m.process("q", &["wait", "ok", "bad"], "wait", &["bad"])?;
    for (pp, qq, qq2) in [
        ("idle", "wait", "wait"),
        ("armed", "wait", "ok"),
        ("idle", "ok", "ok"),
        ("armed", "ok", "ok"),
    ] {
        m.transition("b", &[("p", pp), ("q", qq)], &[("p", pp), ("q", qq2)]);
    }
    m.transition("a", &[("p", "idle")], &[("p", "armed")])
        .transition("a", &[("p", "armed")], &[("p", "armed")])
        .transition("c", &[("q", "wait")], &[("q", "bad")])
        .transition("c", &[("q", "ok")], &[("q", "ok")])
        .accept_local("q", &["wait", "ok"]);
    let monitor = m.build()?;

    let report = monitor.check_locally_rejecting(DEFAULT_STATE_BUDGET)?;
    println!("monitor locally rejecting: {}", report.is_ok());

    let product = product_processwise(&program, &monitor)?;
    for w in ["a b c", "c", "b a c"] {
        let w = Word::parse(w);
        println!("{w}: {:?}", product.run(&w)?);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
