//! Complete S-automata (deterministic, complete, letter-to-letter transducers),
//! their action on words and the usual constructions on them.
//!
//! States and letters are addressed by their index in declaration order. A
//! [`StateWord`] is written the way it acts: the rightmost state reads the
//! input first, so `q p ∘ u = q ∘ (p ∘ u)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Separator used when naming tuple states of powers and compositions.
pub const TUPLE_SEPARATOR: char = '.';

/// Largest number of states a constructed power or composition may have.
pub const MAX_CONSTRUCTED_STATES: usize = 1 << 22;

/// Characters that may not appear in state or letter names.
const RESERVED: &[char] = &['#', ',', '{', '}', '(', ')', '|', '*', '+', '?', '=', ':', '@', '"'];

/// A finite sequence of states acting on letter words.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateWord(pub Vec<usize>);

/// A finite sequence of letters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterWord(pub Vec<usize>);

macro_rules! word_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn empty() -> Self {
                $ty(Vec::new())
            }

            pub fn concat(&self, other: &$ty) -> $ty {
                let mut v = self.0.clone();
                v.extend_from_slice(&other.0);
                $ty(v)
            }

            pub fn pushed(&self, x: usize) -> $ty {
                let mut v = self.0.clone();
                v.push(x);
                $ty(v)
            }
        }

        impl Deref for $ty {
            type Target = [usize];
            fn deref(&self) -> &[usize] {
                &self.0
            }
        }

        impl From<Vec<usize>> for $ty {
            fn from(v: Vec<usize>) -> Self {
                $ty(v)
            }
        }

        impl From<&[usize]> for $ty {
            fn from(v: &[usize]) -> Self {
                $ty(v.to_vec())
            }
        }
    };
}

word_impls!(StateWord);
word_impls!(LetterWord);

/// A complete S-automaton `(Q, Σ, δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SAutomaton {
    states: Vec<String>,
    letters: Vec<String>,
    /// `delta[p * |Σ| + a] = (output letter, next state)`.
    delta: Vec<(usize, usize)>,
}

pub(crate) fn check_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::input("empty identifier"));
    }
    if name.contains("->") || name.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c)) {
        return Err(Error::input(format!("invalid identifier {name:?}")));
    }
    Ok(())
}

impl SAutomaton {
    /// Builds an automaton from names and a dense transition table indexed by
    /// `state * |Σ| + letter`.
    pub fn new(states: Vec<String>, letters: Vec<String>, delta: Vec<(usize, usize)>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::input("automaton needs at least one state"));
        }
        if letters.is_empty() {
            return Err(Error::input("automaton needs at least one letter"));
        }
        let mut seen = HashSet::new();
        for name in states.iter().chain(letters.iter()) {
            check_name(name)?;
            if !seen.insert(name.as_str()) {
                return Err(Error::input(format!(
                    "identifier {name:?} declared twice (states and letters must be distinct)"
                )));
            }
        }
        if delta.len() != states.len() * letters.len() {
            return Err(Error::input("transition table does not cover Q × Σ"));
        }
        if delta.iter().any(|&(b, q)| b >= letters.len() || q >= states.len()) {
            return Err(Error::input("transition references an unknown identifier"));
        }
        Ok(SAutomaton {
            states,
            letters,
            delta,
        })
    }

    /// Builds an automaton from a transition function over indices.
    pub fn from_fn(
        states: Vec<String>,
        letters: Vec<String>,
        f: impl Fn(usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        let k = letters.len();
        let delta = (0..states.len() * k).map(|i| f(i / k, i % k)).collect();
        Self::new(states, letters, delta)
    }

    /// Same as [`SAutomaton::new`] but skips name validation; used for
    /// constructed automata whose names are derived from validated ones.
    fn new_derived(states: Vec<String>, letters: Vec<String>, delta: Vec<(usize, usize)>) -> Self {
        debug_assert_eq!(delta.len(), states.len() * letters.len());
        SAutomaton {
            states,
            letters,
            delta,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn state_name(&self, p: usize) -> &str {
        &self.states[p]
    }

    pub fn letter_name(&self, a: usize) -> &str {
        &self.letters[a]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|s| s == name)
    }

    /// The transition `p --a/b--> q`, returned as `(b, q)`.
    #[inline]
    pub fn step(&self, p: usize, a: usize) -> (usize, usize) {
        self.delta[p * self.letters.len() + a]
    }

    fn check_states(&self, p: &[usize]) -> Result<()> {
        match p.iter().find(|&&q| q >= self.states.len()) {
            Some(q) => Err(Error::input(format!("unknown state index {q}"))),
            None => Ok(()),
        }
    }

    fn check_letters(&self, u: &[usize]) -> Result<()> {
        match u.iter().find(|&&a| a >= self.letters.len()) {
            Some(a) => Err(Error::input(format!("unknown letter index {a}"))),
            None => Ok(()),
        }
    }

    /// Runs `p` on `u` in place and writes the end state of every entry into
    /// `ends` (which must have the length of `p`).
    pub(crate) fn run_in_place(&self, p: &[usize], buf: &mut [usize], ends: &mut [usize]) {
        for j in (0..p.len()).rev() {
            let mut s = p[j];
            for x in buf.iter_mut() {
                let (b, n) = self.step(s, *x);
                *x = b;
                s = n;
            }
            ends[j] = s;
        }
    }

    /// Reads a single letter with the state sequence `p`, returning the
    /// output letter and `p · a`.
    #[inline]
    pub(crate) fn step_word(&self, p: &[usize], a: usize) -> (usize, Vec<usize>) {
        let mut next = vec![0; p.len()];
        let mut c = a;
        for j in (0..p.len()).rev() {
            let (b, n) = self.step(p[j], c);
            next[j] = n;
            c = b;
        }
        (c, next)
    }

    pub(crate) fn act_unchecked(&self, p: &[usize], u: &[usize]) -> Vec<usize> {
        let mut buf = u.to_vec();
        for &q in p.iter().rev() {
            let mut s = q;
            for x in buf.iter_mut() {
                let (b, n) = self.step(s, *x);
                *x = b;
                s = n;
            }
        }
        buf
    }

    /// `p ∘ u`.
    pub fn act(&self, p: &StateWord, u: &LetterWord) -> Result<LetterWord> {
        self.check_states(p)?;
        self.check_letters(u)?;
        Ok(LetterWord(self.act_unchecked(p, u)))
    }

    /// `p · u`, the dual action.
    pub fn dual_act(&self, p: &StateWord, u: &LetterWord) -> Result<StateWord> {
        Ok(self.run(p, u)?.1)
    }

    /// Both `p ∘ u` and `p · u`.
    pub fn run(&self, p: &StateWord, u: &LetterWord) -> Result<(LetterWord, StateWord)> {
        self.check_states(p)?;
        self.check_letters(u)?;
        let mut buf = u.0.clone();
        let mut ends = vec![0; p.len()];
        self.run_in_place(p, &mut buf, &mut ends);
        Ok((LetterWord(buf), StateWord(ends)))
    }

    /// Decides `p =_T q` by exploring the reachable pairs of tuple states.
    pub fn equal_actions(&self, p: &StateWord, q: &StateWord) -> Result<bool> {
        self.check_states(p)?;
        self.check_states(q)?;
        Ok(self.equal_actions_unchecked(p, q))
    }

    pub(crate) fn equal_actions_unchecked(&self, p: &[usize], q: &[usize]) -> bool {
        if p == q {
            return true;
        }
        let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert((p.to_vec(), q.to_vec()));
        queue.push_back((p.to_vec(), q.to_vec()));
        while let Some((x, y)) = queue.pop_front() {
            for a in 0..self.letters.len() {
                let (ox, nx) = self.step_word(&x, a);
                let (oy, ny) = self.step_word(&y, a);
                if ox != oy {
                    return false;
                }
                if nx != ny && !seen.contains(&(nx.clone(), ny.clone())) {
                    seen.insert((nx.clone(), ny.clone()));
                    queue.push_back((nx, ny));
                }
            }
        }
        true
    }

    /// Composition `T2 ∘ T1` (this automaton is `T2`): state `p2.p1` acts as
    /// `p2 ∘ (p1 ∘ u)`. State `(p2, p1)` has index `p2 * |Q1| + p1`.
    pub fn compose(&self, t1: &SAutomaton) -> Result<SAutomaton> {
        if self.letters != t1.letters {
            return Err(Error::input("composition requires identical alphabets"));
        }
        let n = self.num_states() * t1.num_states();
        if n > MAX_CONSTRUCTED_STATES {
            return Err(Error::resource(format!("composition would have {n} states")));
        }
        let n1 = t1.num_states();
        let k = self.num_letters();
        let mut states = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n * k);
        for p2 in 0..self.num_states() {
            for p1 in 0..n1 {
                states.push(format!("{}{TUPLE_SEPARATOR}{}", self.states[p2], t1.states[p1]));
                for a in 0..k {
                    let (b, q1) = t1.step(p1, a);
                    let (c, q2) = self.step(p2, b);
                    delta.push((c, q2 * n1 + q1));
                }
            }
        }
        Ok(SAutomaton::new_derived(states, self.letters.clone(), delta))
    }

    /// The `k`-th power. The tuple state for the word `p` (of length `k`) has
    /// index `Σ p[i] · |Q|^(k-1-i)`; see [`SAutomaton::tuple_index`].
    pub fn power(&self, k: usize) -> Result<SAutomaton> {
        if k == 0 {
            return Err(Error::input("power exponent must be at least 1"));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Index of the tuple state of `p` inside `self.power(p.len())`.
    pub fn tuple_index(&self, p: &StateWord) -> usize {
        p.iter().fold(0, |acc, &q| acc * self.num_states() + q)
    }

    /// Disjoint union. States of `t2` are appended after the states of `self`
    /// (so state `i` of `t2` becomes `self.num_states() + i`); colliding names
    /// get primes appended.
    pub fn union(&self, t2: &SAutomaton) -> Result<SAutomaton> {
        if self.letters != t2.letters {
            return Err(Error::input("union requires identical alphabets"));
        }
        let mut taken: HashSet<String> = self.states.iter().chain(self.letters.iter()).cloned().collect();
        let mut states = self.states.clone();
        for name in &t2.states {
            let mut fresh = name.clone();
            while taken.contains(&fresh) {
                fresh.push('\'');
            }
            taken.insert(fresh.clone());
            states.push(fresh);
        }
        let off = self.num_states();
        let mut delta = self.delta.clone();
        delta.extend(t2.delta.iter().map(|&(b, q)| (b, q + off)));
        Ok(SAutomaton::new_derived(states, self.letters.clone(), delta))
    }

    /// The dual automaton: states and letters swap roles, and
    /// `a --p/q--> b` whenever `p --a/b--> q`.
    pub fn dual(&self) -> SAutomaton {
        let nq = self.num_states();
        let mut delta = vec![(0, 0); self.num_letters() * nq];
        for p in 0..nq {
            for a in 0..self.num_letters() {
                let (b, q) = self.step(p, a);
                delta[a * nq + p] = (q, b);
            }
        }
        SAutomaton::new_derived(self.letters.clone(), self.states.clone(), delta)
    }

    /// Merges states with equal action (Moore partition refinement on the
    /// signature `a ↦ (output, block of successor)`). Each block is named after
    /// its first member; the returned map sends every old state to its block.
    pub fn minimize(&self) -> (SAutomaton, Vec<usize>) {
        let k = self.num_letters();
        let n = self.num_states();
        let mut block = renumber((0..n).map(|p| (0..k).map(|a| self.step(p, a).0).collect::<Vec<_>>()));
        let mut count = block.iter().max().map_or(0, |m| m + 1);
        loop {
            let next = renumber((0..n).map(|p| {
                let mut sig = vec![block[p]];
                for a in 0..k {
                    let (b, q) = self.step(p, a);
                    sig.push(b);
                    sig.push(block[q]);
                }
                sig
            }));
            let next_count = next.iter().max().map_or(0, |m| m + 1);
            block = next;
            if next_count == count {
                break;
            }
            count = next_count;
        }
        let mut rep = vec![usize::MAX; count];
        for p in 0..n {
            if rep[block[p]] == usize::MAX {
                rep[block[p]] = p;
            }
        }
        let states = rep.iter().map(|&p| self.states[p].clone()).collect();
        let mut delta = Vec::with_capacity(count * k);
        for &p in &rep {
            for a in 0..k {
                let (b, q) = self.step(p, a);
                delta.push((b, block[q]));
            }
        }
        (SAutomaton::new_derived(states, self.letters.clone(), delta), block)
    }

    /// The part of the union of all powers reachable from the given state
    /// words, with every tuple turned into one state. Length-one tuples keep
    /// their original name. Returns the automaton and the index of each root.
    pub fn tuple_closure(&self, roots: &[StateWord]) -> Result<(SAutomaton, Vec<usize>)> {
        if roots.iter().any(|r| r.is_empty()) {
            return Err(Error::input("empty state word cannot become a state"));
        }
        for r in roots {
            self.check_states(r)?;
        }
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut root_ids = Vec::new();
        for r in roots {
            let id = *index.entry(r.0.clone()).or_insert_with(|| {
                tuples.push(r.0.clone());
                queue.push_back(tuples.len() - 1);
                tuples.len() - 1
            });
            root_ids.push(id);
        }
        let k = self.num_letters();
        let mut delta_rows: Vec<Vec<(usize, usize)>> = Vec::new();
        while let Some(i) = queue.pop_front() {
            let t = tuples[i].clone();
            let mut row = Vec::with_capacity(k);
            for a in 0..k {
                let (b, next) = self.step_word(&t, a);
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if tuples.len() >= MAX_CONSTRUCTED_STATES {
                            return Err(Error::resource("tuple closure too large"));
                        }
                        tuples.push(next.clone());
                        index.insert(next, tuples.len() - 1);
                        queue.push_back(tuples.len() - 1);
                        tuples.len() - 1
                    }
                };
                row.push((b, j));
            }
            if delta_rows.len() <= i {
                delta_rows.resize(i + 1, Vec::new());
            }
            delta_rows[i] = row;
        }
        let names = tuples.iter().map(|t| self.tuple_name(t)).collect();
        let delta = delta_rows.into_iter().flatten().collect();
        Ok((SAutomaton::new_derived(names, self.letters.clone(), delta), root_ids))
    }

    pub(crate) fn tuple_name(&self, t: &[usize]) -> String {
        let mut s = String::new();
        for (i, &q) in t.iter().enumerate() {
            if i > 0 {
                s.push(TUPLE_SEPARATOR);
            }
            s.push_str(&self.states[q]);
        }
        s
    }

    /// Parses a state word written with the state names, either separated by
    /// whitespace or commas, or juxtaposed (longest match first).
    pub fn parse_state_word(&self, text: &str) -> Result<StateWord> {
        tokenize_names(text, &self.states).map(StateWord)
    }

    pub fn parse_letter_word(&self, text: &str) -> Result<LetterWord> {
        tokenize_names(text, &self.letters).map(LetterWord)
    }

    pub fn format_state_word(&self, p: &[usize]) -> String {
        format_names(p, &self.states)
    }

    pub fn format_letter_word(&self, u: &[usize]) -> String {
        format_names(u, &self.letters)
    }

    /// Graphviz rendering, one edge per transition labelled `a/b`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "  s{i} [label=\"{}\"];", escape(s));
        }
        for p in 0..self.num_states() {
            for a in 0..self.num_letters() {
                let (b, q) = self.step(p, a);
                let _ = writeln!(
                    out,
                    "  s{p} -> s{q} [label=\"{}/{}\"];",
                    escape(&self.letters[a]),
                    escape(&self.letters[b])
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Assigns dense ids to signatures in order of first appearance.
fn renumber<T: Eq + std::hash::Hash>(sigs: impl Iterator<Item = T>) -> Vec<usize> {
    let mut ids: HashMap<T, usize> = HashMap::new();
    sigs.map(|s| {
        let next = ids.len();
        *ids.entry(s).or_insert(next)
    })
    .collect()
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(crate) fn tokenize_names(text: &str, names: &[String]) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() || text == "ε" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for chunk in text.split(|c: char| c.is_whitespace() || c == ',').filter(|c| !c.is_empty()) {
        if let Some(i) = names.iter().position(|n| n == chunk) {
            out.push(i);
            continue;
        }
        let mut rest = chunk;
        while !rest.is_empty() {
            let best = names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((i, n)) => {
                    out.push(i);
                    rest = &rest[n.len()..];
                }
                None => return Err(Error::input(format!("unknown identifier at {rest:?}"))),
            }
        }
    }
    Ok(out)
}

pub(crate) fn format_names(w: &[usize], names: &[String]) -> String {
    let compact = w.iter().all(|&i| names[i].chars().count() == 1);
    let sep = if compact { "" } else { " " };
    w.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join(sep)
}
