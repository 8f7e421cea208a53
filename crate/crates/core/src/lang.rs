//! Finite acceptors for languages of finite words: NFAs with ε-moves,
//! complete DFAs, subset construction, minimization and a small regular
//! expression syntax over named symbols.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};

/// Nondeterministic acceptor over letters `0..num_letters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub num_letters: usize,
    pub edges: Vec<Vec<(usize, usize)>>,
    pub eps: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
}

impl Nfa {
    pub fn new(num_letters: usize) -> Self {
        Nfa {
            num_letters,
            edges: Vec::new(),
            eps: Vec::new(),
            initial: Vec::new(),
            accepting: Vec::new(),
        }
    }

    pub fn add_state(&mut self, accepting: bool) -> usize {
        self.edges.push(Vec::new());
        self.eps.push(Vec::new());
        self.accepting.push(accepting);
        self.edges.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, letter: usize, to: usize) {
        self.edges[from].push((letter, to));
    }

    pub fn add_eps(&mut self, from: usize, to: usize) {
        self.eps[from].push(to);
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    /// Subset construction. The result is complete (the empty subset becomes
    /// a rejecting sink when it is reachable).
    pub fn determinize(&self, max_states: usize) -> Result<Dfa> {
        let k = self.num_letters;
        let mut start: BTreeSet<usize> = self.initial.iter().copied().collect();
        self.closure(&mut start);
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let start: Vec<usize> = start.into_iter().collect();
        index.insert(start.clone(), 0);
        subsets.push(start);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < subsets.len() {
            let cur = subsets[i].clone();
            let mut targets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
            for &s in &cur {
                for &(a, t) in &self.edges[s] {
                    targets[a].insert(t);
                }
            }
            for mut t in targets {
                self.closure(&mut t);
                let t: Vec<usize> = t.into_iter().collect();
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        if subsets.len() >= max_states {
                            return Err(Error::resource(format!(
                                "subset construction exceeds {max_states} states"
                            )));
                        }
                        index.insert(t.clone(), subsets.len());
                        subsets.push(t);
                        subsets.len() - 1
                    }
                };
                trans.push(id);
            }
            i += 1;
        }
        let accepting = subsets
            .iter()
            .map(|s| s.iter().any(|&q| self.accepting[q]))
            .collect();
        Ok(Dfa {
            num_letters: k,
            trans,
            initial: 0,
            accepting,
        })
    }

    /// Whether some initial run on `word` ends in an accepting state.
    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut cur: BTreeSet<usize> = self.initial.iter().copied().collect();
        self.closure(&mut cur);
        for &a in word {
            let mut next = BTreeSet::new();
            for &s in &cur {
                for &(b, t) in &self.edges[s] {
                    if a == b {
                        next.insert(t);
                    }
                }
            }
            self.closure(&mut next);
            cur = next;
        }
        cur.iter().any(|&s| self.accepting[s])
    }
}

/// Complete deterministic acceptor; `trans[state * num_letters + letter]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub num_letters: usize,
    pub trans: Vec<usize>,
    pub initial: usize,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    #[inline]
    pub fn next(&self, state: usize, letter: usize) -> usize {
        self.trans[state * self.num_letters + letter]
    }

    pub fn run(&self, word: &[usize]) -> usize {
        word.iter().fold(self.initial, |s, &a| self.next(s, a))
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        self.accepting[self.run(word)]
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut n = Nfa::new(self.num_letters);
        for s in 0..self.num_states() {
            n.add_state(self.accepting[s]);
        }
        for s in 0..self.num_states() {
            for a in 0..self.num_letters {
                n.add_edge(s, a, self.next(s, a));
            }
        }
        n.initial = vec![self.initial];
        n
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for a in 0..self.num_letters {
                let t = self.next(s, a);
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// States from which an accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut preds = vec![Vec::new(); n];
        for s in 0..n {
            for a in 0..self.num_letters {
                preds[self.next(s, a)].push(s);
            }
        }
        let mut seen: Vec<bool> = self.accepting.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// The minimal complete DFA for the same language, with states numbered in
    /// BFS order from the initial state (letters in index order).
    pub fn minimize(&self) -> Dfa {
        let k = self.num_letters;
        let reach = self.reachable();
        let live: Vec<usize> = (0..self.num_states()).filter(|&s| reach[s]).collect();
        let mut block: HashMap<usize, usize> = live.iter().map(|&s| (s, self.accepting[s] as usize)).collect();
        let mut count = live.iter().map(|s| block[s]).collect::<BTreeSet<_>>().len();
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = HashMap::new();
            for &s in &live {
                let mut sig = vec![block[&s]];
                sig.extend((0..k).map(|a| block[&self.next(s, a)]));
                let fresh = ids.len();
                next.insert(s, *ids.entry(sig).or_insert(fresh));
            }
            let c = ids.len();
            block = next;
            if c == count {
                break;
            }
            count = c;
        }
        // renumber blocks in BFS order
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut reps = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        order.insert(block[&self.initial], 0);
        reps.push(self.initial);
        while let Some(s) = queue.pop_front() {
            for a in 0..k {
                let t = self.next(s, a);
                let b = block[&t];
                if let std::collections::hash_map::Entry::Vacant(e) = order.entry(b) {
                    e.insert(reps.len());
                    reps.push(t);
                    queue.push_back(t);
                }
            }
        }
        let mut trans = Vec::with_capacity(reps.len() * k);
        for &r in &reps {
            for a in 0..k {
                trans.push(order[&block[&self.next(r, a)]]);
            }
        }
        Dfa {
            num_letters: k,
            trans,
            initial: 0,
            accepting: reps.iter().map(|&r| self.accepting[r]).collect(),
        }
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            accepting: self.accepting.iter().map(|a| !a).collect(),
            ..self.clone()
        }
    }

    /// Minimal acceptor of the reversed language.
    pub fn reversed(&self, max_states: usize) -> Result<Dfa> {
        let mut n = Nfa::new(self.num_letters);
        for s in 0..self.num_states() {
            n.add_state(s == self.initial);
        }
        for s in 0..self.num_states() {
            for a in 0..self.num_letters {
                n.add_edge(self.next(s, a), a, s);
            }
        }
        n.initial = (0..self.num_states()).filter(|&s| self.accepting[s]).collect();
        Ok(n.determinize(max_states)?.minimize())
    }

    /// Minimal acceptor of the image under the letter map `map` into
    /// `0..num_letters`.
    pub fn map_letters(&self, map: &[usize], num_letters: usize, max_states: usize) -> Result<Dfa> {
        let mut n = Nfa::new(num_letters);
        for s in 0..self.num_states() {
            n.add_state(self.accepting[s]);
        }
        for s in 0..self.num_states() {
            for (a, &b) in map.iter().enumerate() {
                n.add_edge(s, b, self.next(s, a));
            }
        }
        n.initial = vec![self.initial];
        Ok(n.determinize(max_states)?.minimize())
    }

    /// The same transition graph read as an NFA started in all of `initial`.
    pub fn from_states_nfa(&self, initial: Vec<usize>) -> Nfa {
        let mut n = self.to_nfa();
        n.initial = initial;
        n
    }
}

/// Abstract syntax of regular expressions over symbol indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Nothing,
    Epsilon,
    Symbol(usize),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    /// Thompson construction.
    pub fn to_nfa(&self, num_letters: usize) -> Nfa {
        let mut n = Nfa::new(num_letters);
        let s = n.add_state(false);
        let f = n.add_state(true);
        self.build(&mut n, s, f);
        n.initial = vec![s];
        n
    }

    fn build(&self, n: &mut Nfa, from: usize, to: usize) {
        match self {
            Regex::Nothing => {}
            Regex::Epsilon => n.add_eps(from, to),
            Regex::Symbol(a) => n.add_edge(from, *a, to),
            Regex::Concat(parts) => {
                let mut cur = from;
                for (i, p) in parts.iter().enumerate() {
                    let nxt = if i + 1 == parts.len() { to } else { n.add_state(false) };
                    p.build(n, cur, nxt);
                    cur = nxt;
                }
                if parts.is_empty() {
                    n.add_eps(from, to);
                }
            }
            Regex::Alt(parts) => {
                for p in parts {
                    p.build(n, from, to);
                }
            }
            Regex::Star(inner) => {
                let hub = n.add_state(false);
                n.add_eps(from, hub);
                n.add_eps(hub, to);
                let back = n.add_state(false);
                inner.build(n, hub, back);
                n.add_eps(back, hub);
            }
        }
    }
}

/// Parses a regular expression whose atoms are the given symbol names.
///
/// Syntax: juxtaposition for concatenation, `|`, postfix `*`, `+`, `?`,
/// parentheses, `ε` for the empty word, `∅` for the empty language and `Q`
/// for "any symbol" (unless a symbol is literally named `Q`). Symbols are
/// matched longest first; whitespace separates tokens.
pub fn parse_regex(text: &str, names: &[String]) -> Result<Regex> {
    let mut p = RegexParser {
        text,
        pos: 0,
        names,
    };
    let r = p.alt()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected input"));
    }
    Ok(r)
}

struct RegexParser<'a> {
    text: &'a str,
    pos: usize,
    names: &'a [String],
}

impl RegexParser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::parse(1, self.text[..self.pos].chars().count() + 1, format!("regex: {msg}"))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn alt(&mut self) -> Result<Regex> {
        let mut parts = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            parts.push(self.concat()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Regex::Alt(parts) })
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.repeat()?);
        }
        Ok(match parts.len() {
            0 => Regex::Epsilon,
            1 => parts.pop().unwrap(),
            _ => Regex::Concat(parts),
        })
    }

    fn repeat(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    r = Regex::Star(Box::new(r));
                }
                Some('+') => {
                    self.pos += 1;
                    r = Regex::Concat(vec![r.clone(), Regex::Star(Box::new(r))]);
                }
                Some('?') => {
                    self.pos += 1;
                    r = Regex::Alt(vec![Regex::Epsilon, r]);
                }
                _ => return Ok(r),
            }
        }
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some(c @ ('*' | '+' | '?' | ')' | '|')) => Err(self.error(&format!("unexpected `{c}`"))),
            Some(_) => {
                let rest = self.rest();
                let best = self
                    .names
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| rest.starts_with(n.as_str()))
                    .max_by_key(|(_, n)| n.len());
                if let Some((i, n)) = best {
                    self.pos += n.len();
                    return Ok(Regex::Symbol(i));
                }
                for (kw, value) in [
                    ("ε", Regex::Epsilon),
                    ("∅", Regex::Nothing),
                    ("Q", Regex::Alt((0..self.names.len()).map(Regex::Symbol).collect())),
                ] {
                    if rest.starts_with(kw) {
                        self.pos += kw.len();
                        return Ok(value);
                    }
                }
                Err(self.error("unknown symbol"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn min_dfa(re: &str, n: &[String]) -> Dfa {
        parse_regex(re, n).unwrap().to_nfa(n.len()).determinize(1 << 16).unwrap().minimize()
    }

    #[test]
    fn regex_class_counts() {
        let n = names(&["q", "e"]);
        assert_eq!(min_dfa("Q*", &n).num_states(), 1);
        assert_eq!(min_dfa("q*", &n).num_states(), 2);
        let d = min_dfa("(q|e)*q", &n);
        assert_eq!(d.num_states(), 2);
        assert!(!d.accepting[d.initial]);
        assert!(d.accepts(&[1, 0]));
        assert!(!d.accepts(&[0, 1]));
    }

    #[test]
    fn longest_match_atoms() {
        let n = names(&["q", "q.q", "e"]);
        let r = parse_regex("q.q e", &n).unwrap();
        assert_eq!(r, Regex::Concat(vec![Regex::Symbol(1), Regex::Symbol(2)]));
    }

    #[test]
    fn regex_errors_have_columns() {
        let n = names(&["q", "e"]);
        match parse_regex("q(e", &n).unwrap_err() {
            Error::Parse { column, .. } => assert_eq!(column, 4),
            e => panic!("{e:?}"),
        }
        assert!(parse_regex("qx", &n).is_err());
        assert!(parse_regex("*q", &n).is_err());
    }

    #[test]
    fn nfa_agrees_with_dfa() {
        let n = names(&["a", "b"]);
        let r = parse_regex("(ab|b)*a?", &n).unwrap();
        let nfa = r.to_nfa(2);
        let dfa = nfa.determinize(1000).unwrap();
        let min = dfa.minimize();
        let mut words = vec![vec![]];
        for len in 1..=6 {
            for code in 0..(1usize << len) {
                words.push((0..len).map(|i| (code >> i) & 1).collect());
            }
        }
        for w in &words {
            assert_eq!(nfa.accepts(w), dfa.accepts(w));
            assert_eq!(dfa.accepts(w), min.accepts(w), "{w:?}");
        }
    }
}
