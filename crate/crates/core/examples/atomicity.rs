//! Two transactions on `x`: the interleaving where T2 writes between T1's
//! read and write has no equivalent serial order. The pattern monitor and
//! the exact serializability search agree on it.
//!
//! ```bash
//! cargo run --example atomicity
//! ```

use tracemon::monitors::{
    detect_atomicity_violations, is_serializable, Serializability, TransactionEnd,
};
use tracemon::program::{ConflictMode, ProgramEvent, ProgramExecution};
use tracemon::trace::{foata_normal_form, induced_dependence};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let interleaved = ProgramExecution::new(vec![
        ProgramEvent::begin("T1").at("1"),
        ProgramEvent::read("T1", "x").at("2"),
        ProgramEvent::begin("T2").at("5"),
        ProgramEvent::write("T2", "x").at("6"),
        ProgramEvent::end("T2").at("7"),
        ProgramEvent::write("T1", "x").at("3"),
        ProgramEvent::end("T1").at("4"),
    ]);

    let site = |id: usize| interleaved.event(id).site.clone().unwrap_or_default();
    for v in detect_atomicity_violations(&interleaved)? {
        let end = match v.end {
            TransactionEnd::Closed(b) => site(b),
            TransactionEnd::Open => "open".into(),
        };
        println!(
            "{}: begin {} .. end {} interrupted by {} on line {}",
            v.transaction_thread,
            site(v.begin),
            end,
            v.interloper_thread,
            site(v.interloper)
        );
    }
    assert_eq!(
        is_serializable(&interleaved, 10_000)?,
        Serializability::Violating
    );

    let alphabet = tracemon::program::standard_alphabet(&interleaved, ConflictMode::Atomicity)?;
    let steps = foata_normal_form(&interleaved.word(), &induced_dependence(&alphabet))?;
    let steps: Vec<String> = steps
        .labels
        .iter()
        .map(|s| s.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(" "))
        .collect();
    println!("steps of the trace: {}", steps.join(" | "));

    // Running T2 after T1 commits is serial.
    let mut serial = interleaved.events.clone();
    let t2: Vec<_> = serial.drain(2..5).collect();
    serial.extend(t2);
    let serial = ProgramExecution::new(serial);
    assert!(detect_atomicity_violations(&serial)?.is_empty());
    assert_eq!(
        is_serializable(&serial, 10_000)?,
        Serializability::Serializable
    );
    println!("serial order: no findings");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
