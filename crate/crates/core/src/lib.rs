//! Automaton semigroups: actions of complete letter-to-letter transducers,
//! orbit growth, expansion relations and a decision procedure for finiteness
//! under bounded activity.

pub mod activity;
pub mod automaton;
pub mod canon;
pub mod corpus;
pub mod decision;
pub mod error;
pub mod expansion;
pub mod instance;
pub mod lang;
pub mod orbits;
mod machine;
pub mod semigroup;
pub mod text;

pub use automaton::{LetterWord, SAutomaton, StateWord};
pub use error::{Error, Result};
pub use instance::{parse_instance, ProblemInstance, RSpec};
pub use lang::{Dfa, Nfa};
pub use semigroup::{saturate, Enumeration, FiniteSemigroup, SaturatedAutomaton};
pub use text::{parse_automaton, serialize_automaton};
