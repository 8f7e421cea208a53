//! Problem instances: an automaton file that may also carry `S = ...` and
//! `R = ...` directive lines, and the explicit acceptor format used by
//! `R = @file.dfa`.
//!
//! ```text
//! alphabet: 0 1 a ⊥
//! states: q e z
//! S = {e,z}
//! R = Q*
//! ...
//! ```

use std::collections::HashMap;

use crate::automaton::SAutomaton;
use crate::error::{Error, Result};
use crate::lang::{parse_regex, Dfa, Nfa};
use crate::text::{column_of, parse_automaton_with, strip_comment};

/// Maximal number of states when determinizing a user-supplied language.
pub const MAX_LANGUAGE_STATES: usize = 1 << 16;

/// How the language `R ⊆ Q*` was given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RSpec {
    /// `Q*`
    All,
    Regex(String),
    /// `@path`, resolved by the caller.
    File(String),
}

impl RSpec {
    pub fn parse(text: &str) -> RSpec {
        let text = text.trim();
        if text == "Q*" {
            RSpec::All
        } else if let Some(path) = text.strip_prefix('@') {
            RSpec::File(path.trim().to_string())
        } else {
            RSpec::Regex(text.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub automaton: SAutomaton,
    pub s: Option<Vec<usize>>,
    pub r: RSpec,
}

fn directive(line: &str) -> Option<(char, &str)> {
    let t = line.trim_start();
    let mut chars = t.chars();
    let key = chars.next()?;
    if key != 'S' && key != 'R' {
        return None;
    }
    chars.as_str().trim_start().strip_prefix('=').map(|rest| (key, rest))
}

/// Parses `{e,z}`, `e,z` or `Q` into sorted state indices.
pub fn parse_subset(t: &SAutomaton, text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text == "Q" && t.state_index("Q").is_none() {
        return Ok((0..t.num_states()).collect());
    }
    let inner = text
        .strip_prefix('{')
        .and_then(|x| x.strip_suffix('}'))
        .unwrap_or(text);
    let mut out = Vec::new();
    for name in inner.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let i = t
            .state_index(name)
            .ok_or_else(|| Error::input(format!("unknown state {name:?} in subset")))?;
        out.push(i);
    }
    if out.is_empty() {
        return Err(Error::input("empty state subset"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    let automaton = parse_automaton_with(text, |l| directive(l).is_some())?;
    let mut s = None;
    let mut r = RSpec::All;
    let (mut seen_s, mut seen_r) = (false, false);
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let Some((key, rest)) = directive(line) else { continue };
        let col = column_of(line, line.len() - line.trim_start().len());
        let seen = if key == 'S' { &mut seen_s } else { &mut seen_r };
        if *seen {
            return Err(Error::parse(i + 1, col, format!("{key} given twice")));
        }
        *seen = true;
        if key == 'S' {
            s = Some(parse_subset(&automaton, rest).map_err(|e| Error::parse(i + 1, col, e.to_string()))?);
        } else {
            r = RSpec::parse(rest);
            if let RSpec::Regex(re) = &r {
                parse_regex(re, automaton.states()).map_err(|e| Error::parse(i + 1, col, e.to_string()))?;
            }
        }
    }
    Ok(ProblemInstance { automaton, s, r })
}

/// Resolves the description of `R` to a complete DFA over the states of `t`.
/// `load` reads the file of an `@path` description.
pub fn resolve_language(
    t: &SAutomaton,
    spec: &RSpec,
    load: impl FnOnce(&str) -> Result<String>,
) -> Result<Dfa> {
    match spec {
        RSpec::All => Ok(Dfa {
            num_letters: t.num_states(),
            trans: vec![0; t.num_states()],
            initial: 0,
            accepting: vec![true],
        }),
        RSpec::Regex(re) => parse_regex(re, t.states())?
            .to_nfa(t.num_states())
            .determinize(MAX_LANGUAGE_STATES),
        RSpec::File(path) => parse_dfa(&load(path)?, t),
    }
}

/// Explicit acceptor over the states of `t`:
///
/// ```text
/// initial: c0
/// accepting: c0 c1
/// c0 q -> c1
/// ```
///
/// Classes are declared by use; missing transitions go to a rejecting sink.
pub fn parse_dfa(text: &str, t: &SAutomaton) -> Result<Dfa> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let intern = |name: &str, ids: &mut HashMap<String, usize>| {
        let n = ids.len();
        *ids.entry(name.to_string()).or_insert(n)
    };
    let mut initial = None;
    let mut accepting = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::parse(i + 1, 1, msg);
        if let Some(rest) = line.strip_prefix("initial:") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 1 || initial.is_some() {
                return Err(err("expected exactly one initial class".into()));
            }
            initial = Some(intern(toks[0], &mut ids));
        } else if let Some(rest) = line.strip_prefix("accepting:") {
            for tok in rest.split_whitespace() {
                accepting.push(intern(tok, &mut ids));
            }
        } else {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[2] != "->" {
                return Err(err("expected a transition of the form `c p -> d`".into()));
            }
            let p = t
                .state_index(toks[1])
                .ok_or_else(|| err(format!("unknown state {:?}", toks[1])))?;
            let from = intern(toks[0], &mut ids);
            let to = intern(toks[3], &mut ids);
            if edges.insert((from, p), to).is_some() {
                return Err(err(format!("duplicate transition for ({}, {})", toks[0], toks[1])));
            }
        }
    }
    let initial = initial.ok_or_else(|| Error::parse(1, 1, "missing `initial:` line"))?;
    let n = ids.len();
    let mut nfa = Nfa::new(t.num_states());
    for c in 0..n {
        nfa.add_state(accepting.contains(&c));
    }
    for (&(from, p), &to) in &edges {
        nfa.add_edge(from, p, to);
    }
    nfa.initial = vec![initial];
    nfa.determinize(MAX_LANGUAGE_STATES)
}
