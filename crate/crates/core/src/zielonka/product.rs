use crate::error::{Error, Result};

use super::{Acceptance, LocalStates, Transition, ZielonkaAutomaton};

/// Runs a monitor alongside a program: process `p` of the product holds a
/// pair of local states, an action fires when both components can fire it,
/// and a pair is rejecting when the monitor's component is.
pub fn product_processwise(
    program: &ZielonkaAutomaton,
    monitor: &ZielonkaAutomaton,
) -> Result<ZielonkaAutomaton> {
    check_same_alphabet(program, monitor)?;

    let mut locals = Vec::new();
    let mut right_sizes = Vec::new();
    for p in 0..program.processes().len() {
        let (lp, lm) = (program.locals(p), monitor.locals(p));
        let m = lm.names.len();
        let mut names = Vec::with_capacity(lp.names.len() * m);
        let mut rejecting = std::collections::BTreeSet::new();
        for (i, s) in lp.names.iter().enumerate() {
            for (j, t) in lm.names.iter().enumerate() {
                names.push(format!("({s},{t})"));
                if lm.rejecting.contains(&j) {
                    rejecting.insert(i * m + j);
                }
            }
        }
        locals.push(LocalStates {
            names,
            initial: lp.initial * m + lm.initial,
            rejecting,
        });
        right_sizes.push(m);
    }

    let mut transitions = Vec::new();
    for a in program.actions() {
        let dom = program.domain_indices(a)?;
        let tps = program.transitions().iter().filter(|t| &t.action == a);
        for tp in tps {
            for tm in monitor.transitions().iter().filter(|t| &t.action == a) {
                let pair = |x: &[usize], y: &[usize]| -> Vec<usize> {
                    dom.iter()
                        .zip(x.iter().zip(y))
                        .map(|(&p, (&i, &j))| i * right_sizes[p] + j)
                        .collect()
                };
                transitions.push(Transition {
                    action: a.clone(),
                    pre: pair(&tp.pre, &tm.pre),
                    post: pair(&tp.post, &tm.post),
                });
            }
        }
    }

    let acceptance = Acceptance::Product {
        left: Box::new(program.acceptance().clone()),
        right: Box::new(monitor.acceptance().clone()),
        right_sizes,
    };
    ZielonkaAutomaton::from_parts(program.alphabet().clone(), locals, transitions, acceptance)
}

fn check_same_alphabet(x: &ZielonkaAutomaton, y: &ZielonkaAutomaton) -> Result<()> {
    let (px, py) = (x.alphabet().processes(), y.alphabet().processes());
    if let Some(p) = px.symmetric_difference(py).next() {
        return Err(Error::structural(format!(
            "process `{p}` belongs to only one of the automata"
        )));
    }
    for (a, d) in x.alphabet().domains() {
        match y.alphabet().dom(a) {
            Err(_) => {
                return Err(Error::structural(format!(
                    "action `{a}` missing from the monitor"
                )))
            }
            Ok(d2) if d2 != d => {
                return Err(Error::structural(format!(
                    "action `{a}` has different domains"
                )))
            }
            _ => {}
        }
    }
    if let Some(a) = y.alphabet().actions().find(|a| !x.alphabet().contains(a)) {
        return Err(Error::structural(format!(
            "action `{a}` missing from the program"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{DistributedAlphabet, Word};
    use crate::zielonka::RunOutcome;

    fn alpha() -> DistributedAlphabet {
        DistributedAlphabet::from_domains([("a", &["p"][..]), ("c", &["p", "q"][..])]).unwrap()
    }

    fn program() -> ZielonkaAutomaton {
        let mut b = ZielonkaAutomaton::builder(alpha());
        b.process("p", &["0", "1"], "0", &[]).unwrap();
        b.process("q", &["0"], "0", &[]).unwrap();
        b.transition("a", &[("p", "0")], &[("p", "1")])
            .transition("a", &[("p", "1")], &[("p", "0")])
            .transition("c", &[("p", "1"), ("q", "0")], &[("p", "1"), ("q", "0")])
            .accept_local("p", &["1"]);
        b.build().unwrap()
    }

    #[test]
    fn identity_monitor_preserves_language() {
        let mut b = ZielonkaAutomaton::builder(alpha());
        b.process("p", &["m"], "m", &[]).unwrap();
        b.process("q", &["m"], "m", &[]).unwrap();
        b.transition("a", &[("p", "m")], &[("p", "m")]).transition(
            "c",
            &[("p", "m"), ("q", "m")],
            &[("p", "m"), ("q", "m")],
        );
        let id = b.build().unwrap();
        let (pr, prod) = (program(), product_processwise(&program(), &id).unwrap());
        assert_eq!(prod.transitions().len(), pr.transitions().len());
        for w in ["", "a", "a c", "a a", "a c c", "c"] {
            let w = Word::parse(w);
            assert_eq!(pr.run(&w).unwrap(), prod.run(&w).unwrap(), "{w}");
        }
    }

    #[test]
    fn missing_monitor_transition_disables_action() {
        let mut b = ZielonkaAutomaton::builder(alpha());
        b.process("p", &["m"], "m", &[]).unwrap();
        b.process("q", &["m"], "m", &[]).unwrap();
        b.transition("a", &[("p", "m")], &[("p", "m")]);
        let prod = product_processwise(&program(), &b.build().unwrap()).unwrap();
        assert_eq!(prod.run(&Word::parse("a c")).unwrap(), RunOutcome::Stuck(2));
    }

    #[test]
    fn mismatched_alphabets_are_named() {
        let other =
            DistributedAlphabet::from_domains([("a", &["p"][..]), ("c", &["p", "r"][..])]).unwrap();
        let mut b = ZielonkaAutomaton::builder(other);
        b.process("p", &["m"], "m", &[]).unwrap();
        b.process("r", &["m"], "m", &[]).unwrap();
        let err = product_processwise(&program(), &b.build().unwrap()).unwrap_err();
        assert!(
            err.to_string().contains("`q`") || err.to_string().contains("`r`"),
            "{err}"
        );
    }
}
