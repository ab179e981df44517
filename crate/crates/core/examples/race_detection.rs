//! Finds the unsynchronized access in a list-insertion/deletion log: the
//! lock protects only one side, so the head read and the head write race.
//!
//! ```bash
//! cargo run --example race_detection
//! ```

use tracemon::monitors::detect_races;
use tracemon::program::{ProgramEvent, ProgramExecution};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let exec = ProgramExecution::new(vec![
        ProgramEvent::write("T1", "t1").at("1"),
        ProgramEvent::write("T1", "t1.data").at("2"),
        ProgramEvent::read("T1", "head").at("3"),
        ProgramEvent::read("T2", "head").at("7"),
        ProgramEvent::acquire("T2", "lock").at("8"),
        ProgramEvent::write("T2", "head").at("9"),
    ]);

    let races = detect_races(&exec)?;
    for r in &races {
        let site = |id: usize| exec.event(id).site.clone().unwrap_or_default();
        println!(
            "race on {}: line {} ({}) || line {} ({})",
            r.variable,
            site(r.first),
            r.kinds.0,
            site(r.second),
            r.kinds.1
        );
    }
    assert_eq!(races.len(), 1);

    // Holding the lock around the read as well orders the two accesses.
    let fixed = ProgramExecution::new(vec![
        ProgramEvent::acquire("T1", "lock"),
        ProgramEvent::read("T1", "head"),
        ProgramEvent::release("T1", "lock"),
        ProgramEvent::acquire("T2", "lock"),
        ProgramEvent::write("T2", "head"),
        ProgramEvent::release("T2", "lock"),
    ]);
    assert!(detect_races(&fixed)?.is_empty());
    println!("with the read under the lock: no race");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
