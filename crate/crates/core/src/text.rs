//! Line-oriented text format for automata.
//!
//! ```text
//! # adding machine
//! alphabet: 0 1
//! states: q e
//! q 0 -> 1 e
//! q 1 -> 0 q
//! e 0 -> 0 e
//! e 1 -> 1 e
//! ```
//!
//! A transition line `p a -> b q` means `p --a/b--> q`. Every `(state, letter)`
//! pair must occur exactly once.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automaton::{check_name, SAutomaton};
use crate::error::{Error, Result};

/// Removes a trailing `#` comment.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// 1-based column of a byte offset.
pub(crate) fn column_of(line: &str, byte: usize) -> usize {
    line[..byte.min(line.len())].chars().count() + 1
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((column_of(line, s), &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((column_of(line, s), &line[s..]));
    }
    out
}

fn parse_names(line_no: usize, line: &str, offset: usize) -> Result<Vec<String>> {
    let mut names: Vec<String> = Vec::new();
    for (col, tok) in tokens(&line[offset..]) {
        let col = col + column_of(line, offset) - 1;
        check_name(tok).map_err(|e| Error::parse(line_no, col, e.to_string()))?;
        if names.iter().any(|n| n == tok) {
            return Err(Error::parse(line_no, col, format!("duplicate identifier {tok:?}")));
        }
        names.push(tok.to_string());
    }
    if names.is_empty() {
        return Err(Error::parse(line_no, offset + 1, "empty declaration"));
    }
    Ok(names)
}

/// Parses an automaton. Lines for which `skip` returns true are ignored
/// (used by the instance parser for its directives).
pub(crate) fn parse_automaton_with(text: &str, skip: impl Fn(&str) -> bool) -> Result<SAutomaton> {
    let mut letters: Option<Vec<String>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut delta: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = strip_comment(raw);
        let trimmed = line.trim_start();
        if trimmed.trim().is_empty() || skip(trimmed) {
            continue;
        }
        let lead = line.len() - trimmed.len();
        if let Some(_rest) = trimmed.strip_prefix("alphabet:") {
            if letters.is_some() {
                return Err(Error::parse(line_no, column_of(line, lead), "alphabet declared twice"));
            }
            letters = Some(parse_names(line_no, line, lead + "alphabet:".len())?);
            continue;
        }
        if let Some(_rest) = trimmed.strip_prefix("states:") {
            if states.is_some() {
                return Err(Error::parse(line_no, column_of(line, lead), "states declared twice"));
            }
            states = Some(parse_names(line_no, line, lead + "states:".len())?);
            continue;
        }
        let (Some(qs), Some(ls)) = (&states, &letters) else {
            return Err(Error::parse(
                line_no,
                column_of(line, lead),
                "transition before `alphabet:` and `states:` declarations",
            ));
        };
        let toks = tokens(line);
        if toks.len() != 5 || toks[2].1 != "->" {
            return Err(Error::parse(
                line_no,
                column_of(line, lead),
                "expected a transition of the form `p a -> b q`",
            ));
        }
        let find = |names: &[String], (col, tok): (usize, &str), what: &str| {
            names
                .iter()
                .position(|n| n == tok)
                .ok_or_else(|| Error::parse(line_no, col, format!("unknown {what} {tok:?}")))
        };
        let p = find(qs, toks[0], "state")?;
        let a = find(ls, toks[1], "letter")?;
        let b = find(ls, toks[3], "letter")?;
        let q = find(qs, toks[4], "state")?;
        if delta.insert((p, a), (b, q)).is_some() {
            return Err(Error::parse(
                line_no,
                toks[0].0,
                format!("duplicate transition for ({}, {})", qs[p], ls[a]),
            ));
        }
    }
    let letters = letters.ok_or_else(|| Error::parse(last_line.max(1), 1, "missing `alphabet:` declaration"))?;
    let states = states.ok_or_else(|| Error::parse(last_line.max(1), 1, "missing `states:` declaration"))?;
    let mut table = Vec::with_capacity(states.len() * letters.len());
    for p in 0..states.len() {
        for a in 0..letters.len() {
            match delta.get(&(p, a)) {
                Some(&t) => table.push(t),
                None => {
                    return Err(Error::parse(
                        last_line.max(1),
                        1,
                        format!("incomplete transition function: missing ({}, {})", states[p], letters[a]),
                    ))
                }
            }
        }
    }
    SAutomaton::new(states, letters, table).map_err(|e| Error::parse(1, 1, e.to_string()))
}

pub fn parse_automaton(text: &str) -> Result<SAutomaton> {
    parse_automaton_with(text, |_| false)
}

/// Canonical serialization: declarations first, then transitions in state-major order.
pub fn serialize_automaton(t: &SAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alphabet: {}", t.letters().join(" "));
    let _ = writeln!(out, "states: {}", t.states().join(" "));
    for p in 0..t.num_states() {
        for a in 0..t.num_letters() {
            let (b, q) = t.step(p, a);
            let _ = writeln!(
                out,
                "{} {} -> {} {}",
                t.state_name(p),
                t.letter_name(a),
                t.letter_name(b),
                t.state_name(q)
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADDING: &str = "alphabet: 0 1\nstates: q e\nq 0 -> 1 e\nq 1 -> 0 q\ne 0 -> 0 e\ne 1 -> 1 e\n";

    #[test]
    fn round_trip() {
        let t = parse_automaton(ADDING).unwrap();
        assert_eq!(t.num_states(), 2);
        assert_eq!(t.num_letters(), 2);
        assert_eq!(serialize_automaton(&t), ADDING);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\nalphabet: 0 1  # letters\nstates: q e\nq 0 -> 1 e\nq 1 -> 0 q\ne 0 -> 0 e\ne 1 -> 1 e\n";
        assert_eq!(parse_automaton(text).unwrap(), parse_automaton(ADDING).unwrap());
    }

    #[test]
    fn missing_pair_is_incomplete() {
        let text = "alphabet: 0 1\nstates: q e\nq 0 -> 1 e\ne 0 -> 0 e\ne 1 -> 1 e\n";
        let err = parse_automaton(text).unwrap_err().to_string();
        assert!(err.contains("incomplete"), "{err}");
        assert!(err.contains("(q, 1)"), "{err}");
    }

    #[test]
    fn duplicate_pair_rejected() {
        let text = "alphabet: 0 1\nstates: q e\nq 0 -> 1 e\nq 0 -> 0 e\n";
        match parse_automaton(text).unwrap_err() {
            Error::Parse { line, column, message } => {
                assert_eq!((line, column), (4, 1));
                assert!(message.contains("duplicate"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_identifier_has_column() {
        let text = "alphabet: 0 1\nstates: q e\nq 0 -> 2 e\n";
        match parse_automaton(text).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 8)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn states_and_letters_must_differ() {
        let text = "alphabet: q 1\nstates: q\nq q -> q q\nq 1 -> 1 q\n";
        assert!(parse_automaton(text).is_err());
    }
}
