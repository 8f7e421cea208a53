//! Bundled example automata.

use crate::automaton::SAutomaton;
use crate::instance::{parse_instance, ProblemInstance};

pub const ADDING_MACHINE: &str = include_str!("../corpus/adding_machine.aut");
pub const U1: &str = include_str!("../corpus/u1.aut");
pub const COMBINED: &str = include_str!("../corpus/combined.aut");
pub const IDENTITY: &str = include_str!("../corpus/identity.aut");
pub const RANDOM1: &str = include_str!("../corpus/random1.aut");
pub const RANDOM2: &str = include_str!("../corpus/random2.aut");
pub const RANDOM3: &str = include_str!("../corpus/random3.aut");
pub const RANDOM4: &str = include_str!("../corpus/random4.aut");
pub const RANDOM5: &str = include_str!("../corpus/random5.aut");

/// `(name, text)` of every bundled file.
pub const ALL: &[(&str, &str)] = &[
    ("adding_machine", ADDING_MACHINE),
    ("u1", U1),
    ("combined", COMBINED),
    ("identity", IDENTITY),
    ("random1", RANDOM1),
    ("random2", RANDOM2),
    ("random3", RANDOM3),
    ("random4", RANDOM4),
    ("random5", RANDOM5),
];

pub fn instance(text: &str) -> ProblemInstance {
    parse_instance(text).expect("bundled corpus file parses")
}

pub fn adding_machine() -> SAutomaton {
    instance(ADDING_MACHINE).automaton
}

pub fn u1() -> SAutomaton {
    instance(U1).automaton
}

pub fn combined() -> SAutomaton {
    instance(COMBINED).automaton
}

pub fn identity() -> SAutomaton {
    instance(IDENTITY).automaton
}
