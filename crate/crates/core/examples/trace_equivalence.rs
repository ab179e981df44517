//! Builds the trace of a word, compares words up to commutation, and writes
//! the partial order as DOT.
//!
//! ```bash
//! cargo run --example trace_equivalence
//! ```

use tracemon::trace::{
    foata_normal_form, induced_dependence, trace_equivalent, trace_of_word, DistributedAlphabet,
    Word,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // a and b run on separate processes, c synchronizes both.
    let alphabet = DistributedAlphabet::from_domains([
        ("a", &["p"][..]),
        ("b", &["q"][..]),
        ("c", &["p", "q"][..]),
    ])?;
    let dep = induced_dependence(&alphabet);

    let w1 = Word::parse("a b c a");
    let w2 = Word::parse("b a c a");
    let w3 = Word::parse("a c b a");
    println!("{w1} ~ {w2}: {}", trace_equivalent(&w1, &w2, &dep)?);
    println!("{w1} ~ {w3}: {}", trace_equivalent(&w1, &w3, &dep)?);
    assert!(trace_equivalent(&w1, &w2, &dep)?);
    assert!(!trace_equivalent(&w1, &w3, &dep)?);

    let nf = foata_normal_form(&w1, &dep)?;
    println!("normal form: {}", nf.to_word());

    let t = trace_of_word(&w1, &dep)?;
    println!("1 before 4: {}", t.happens_before(1, 4)?);
    println!("1 || 2: {}", t.concurrent(1, 2)?);
    let ext = t.linear_extensions(10)?;
    println!("{} linearizations", ext.words.len());
    print!("{}", t.to_dot());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
