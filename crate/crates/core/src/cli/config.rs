//! TOML configuration documents: automata, DFAs, dependence relations and
//! process trees, plus plain word files.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gossip::ProcessTree;
use crate::lang::Dfa;
use crate::trace::{ActionId, DependenceRelation, DistributedAlphabet, ProcessId, Word};
use crate::zielonka::{cas_system, SharedVariable, ThreadProgram, ZielonkaAutomaton};

fn parse_toml<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| {
            text[..s.start.min(text.len())].matches('\n').count() + 1
        });
        Error::Parse {
            line,
            reason: e.message().to_string(),
        }
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessSection {
    name: String,
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    rejecting: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionSection {
    name: String,
    domain: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionSection {
    action: String,
    pre: BTreeMap<String, String>,
    post: BTreeMap<String, String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcceptanceSection {
    global: Option<Vec<BTreeMap<String, String>>>,
    local: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CasSection {
    #[serde(default)]
    thread: Vec<ThreadProgram>,
    #[serde(default)]
    variable: Vec<SharedVariable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonDoc {
    #[serde(default)]
    process: Vec<ProcessSection>,
    #[serde(default)]
    action: Vec<ActionSection>,
    #[serde(default)]
    transition: Vec<TransitionSection>,
    acceptance: Option<AcceptanceSection>,
    cas: Option<CasSection>,
}

/// Reads an automaton: either explicit `[[process]]`, `[[action]]`,
/// `[[transition]]` and optional `[acceptance]` sections, or a `[cas]`
/// section describing thread programs over finite-domain variables.
pub fn parse_automaton(text: &str) -> Result<ZielonkaAutomaton> {
    let doc: AutomatonDoc = parse_toml(text)?;
    if let Some(cas) = doc.cas {
        if !doc.process.is_empty()
            || !doc.action.is_empty()
            || !doc.transition.is_empty()
            || doc.acceptance.is_some()
        {
            return Err(Error::structural(
                "`[cas]` cannot be combined with explicit sections",
            ));
        }
        return cas_system(&cas.thread, &cas.variable);
    }
    check_names(
        doc.process
            .iter()
            .flat_map(|p| std::iter::once(&p.name).chain(&p.states))
            .chain(
                doc.action
                    .iter()
                    .flat_map(|a| std::iter::once(&a.name).chain(&a.domain)),
            )
            .chain(doc.transition.iter().flat_map(|t| {
                std::iter::once(&t.action)
                    .chain(t.pre.keys())
                    .chain(t.post.keys())
            })),
    )?;
    let alphabet = DistributedAlphabet::new(
        doc.process.iter().map(|p| ProcessId::new(p.name.as_str())),
        doc.action.iter().map(|a| {
            (
                ActionId::new(a.name.as_str()),
                a.domain
                    .iter()
                    .map(|p| ProcessId::new(p.as_str()))
                    .collect(),
            )
        }),
    )?;
    let mut b = ZielonkaAutomaton::builder(alphabet);
    for p in &doc.process {
        let states: Vec<&str> = p.states.iter().map(String::as_str).collect();
        let rejecting: Vec<&str> = p.rejecting.iter().map(String::as_str).collect();
        b.process(&p.name, &states, &p.initial, &rejecting)?;
    }
    let pairs = |m: &BTreeMap<String, String>| -> Vec<(String, String)> {
        m.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    };
    for t in &doc.transition {
        let (pre, post) = (pairs(&t.pre), pairs(&t.post));
        b.transition(&t.action, &borrow_pairs(&pre), &borrow_pairs(&post));
    }
    let acc = doc.acceptance.unwrap_or_default();
    check_names(
        acc.global
            .iter()
            .flatten()
            .flat_map(|m| m.keys())
            .chain(acc.local.iter().flat_map(|m| m.keys())),
    )?;
    if let Some(global) = &acc.global {
        for s in global {
            b.accept_global(&borrow_pairs(&pairs(s)));
        }
    }
    if let Some(local) = &acc.local {
        for (p, states) in local {
            let states: Vec<&str> = states.iter().map(String::as_str).collect();
            b.accept_local(p, &states);
        }
    }
    b.build()
}

fn check_names<'a>(names: impl IntoIterator<Item = &'a String>) -> Result<()> {
    if names.into_iter().any(|n| n.is_empty()) {
        return Err(Error::structural("empty process, action or state name"));
    }
    Ok(())
}

fn borrow_pairs(v: &[(String, String)]) -> Vec<(&str, &str)> {
    v.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DfaDoc {
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    accepting: Vec<String>,
    #[serde(default)]
    transitions: Vec<(String, String, String)>,
}

/// `alphabet`, `states`, `initial`, `accepting` and `transitions` given as
/// `[from, letter, to]` triples; missing transitions go to an implicit sink.
pub fn parse_dfa(text: &str) -> Result<Dfa> {
    let doc: DfaDoc = parse_toml(text)?;
    check_names(
        doc.alphabet
            .iter()
            .chain(doc.transitions.iter().map(|(_, a, _)| a)),
    )?;
    let transitions: Vec<(String, ActionId, String)> = doc
        .transitions
        .into_iter()
        .map(|(f, a, t)| (f, ActionId::new(a), t))
        .collect();
    Dfa::from_named(
        doc.alphabet.into_iter().map(ActionId::new),
        &doc.states,
        &doc.initial,
        &doc.accepting,
        &transitions,
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DependenceDoc {
    actions: Option<Vec<String>>,
    #[serde(default)]
    dependent: Vec<(String, String)>,
    domains: Option<BTreeMap<String, Vec<String>>>,
}

/// Either `actions` with unordered `dependent` pairs (reflexivity and
/// symmetry are added), or a `[domains]` table inducing the dependence.
pub fn parse_dependence(text: &str) -> Result<DependenceRelation> {
    let doc: DependenceDoc = parse_toml(text)?;
    check_names(
        doc.actions
            .iter()
            .flatten()
            .chain(doc.dependent.iter().flat_map(|(a, b)| [a, b]))
            .chain(
                doc.domains
                    .iter()
                    .flat_map(|d| d.iter().flat_map(|(a, ps)| std::iter::once(a).chain(ps))),
            ),
    )?;
    match (doc.actions, doc.domains) {
        (Some(actions), None) => DependenceRelation::from_unordered_pairs(
            actions.into_iter().map(ActionId::new),
            doc.dependent
                .into_iter()
                .map(|(a, b)| (ActionId::new(a), ActionId::new(b))),
        ),
        (None, Some(domains)) if doc.dependent.is_empty() => Ok(crate::trace::induced_dependence(
            &alphabet_from_domains(&domains)?,
        )),
        _ => Err(Error::structural(
            "give either `actions` with `dependent` pairs or a `[domains]` table",
        )),
    }
}

fn alphabet_from_domains(domains: &BTreeMap<String, Vec<String>>) -> Result<DistributedAlphabet> {
    let processes: Vec<ProcessId> = domains
        .values()
        .flatten()
        .map(|p| ProcessId::new(p.as_str()))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    DistributedAlphabet::new(
        processes,
        domains.iter().map(|(a, d)| {
            (
                ActionId::new(a.as_str()),
                d.iter().map(|p| ProcessId::new(p.as_str())).collect(),
            )
        }),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    root: String,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

/// `root` plus `[parent, child]` edges.
pub fn parse_tree(text: &str) -> Result<ProcessTree> {
    let doc: TreeDoc = parse_toml(text)?;
    check_names(std::iter::once(&doc.root).chain(doc.edges.iter().flat_map(|(p, c)| [p, c])))?;
    let edges: Vec<(ProcessId, ProcessId)> = doc
        .edges
        .into_iter()
        .map(|(p, c)| (ProcessId::new(p), ProcessId::new(c)))
        .collect();
    ProcessTree::from_edges(ProcessId::new(doc.root), &edges)
}

/// One action per line; blank lines and `#` comments are skipped.
pub fn parse_word_file(text: &str) -> Result<Word> {
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(ActionId::new)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zielonka::RunOutcome;

    const TOGGLE: &str = r#"
[[process]]
name = "P"
states = ["off", "on"]
initial = "off"

[[action]]
name = "flip"
domain = ["P"]

[[transition]]
action = "flip"
pre = { P = "off" }
post = { P = "on" }

[acceptance]
local = { P = ["on"] }
"#;

    #[test]
    fn explicit_automaton() {
        let z = parse_automaton(TOGGLE).unwrap();
        assert_eq!(z.run(&Word::parse("flip")).unwrap(), RunOutcome::Accepted);
        assert_eq!(z.run(&Word::parse("")).unwrap(), RunOutcome::Rejected);
        assert_eq!(
            z.run(&Word::parse("flip flip")).unwrap(),
            RunOutcome::Stuck(2)
        );
    }

    #[test]
    fn cas_automaton() {
        let text = r#"
[[cas.variable]]
name = "x"
domain = ["0", "1"]
initial = "0"

[[cas.thread]]
name = "T"
instructions = [{ op = "cas", var = "x", old = "0", new = "1", into = "y" }]
"#;
        let z = parse_automaton(text).unwrap();
        assert_eq!(z.processes().len(), 2);
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_automaton("[[process]]\nname = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_dependence("actions = [\"a\"]\n[domains]\na = [\"P\"]\n").is_err());
    }

    #[test]
    fn dfa_dependence_and_tree() {
        let d = parse_dfa("alphabet=[\"a\"]\nstates=[\"0\"]\ninitial=\"0\"\naccepting=[\"0\"]\ntransitions=[[\"0\",\"a\",\"0\"]]\n").unwrap();
        assert!(d.accepts(&Word::parse("a a")).unwrap());
        let dep = parse_dependence("[domains]\na = [\"P\"]\nb = [\"Q\"]\n").unwrap();
        assert!(dep.independent(&"a".into(), &"b".into()));
        let t = parse_tree("root = \"A\"\nedges = [[\"A\", \"B\"]]\n").unwrap();
        assert_eq!(t.children(&"A".into()).len(), 1);
        assert_eq!(
            parse_word_file("a\n\n# c\n b \n").unwrap(),
            Word::parse("a b")
        );
    }
}
