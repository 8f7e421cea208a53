//! Languages `R ⊆ Q*`, orbital transducers `T ∘ w`, the product
//! `T ∘ w × R`, `R`-orbit sizes and expandability.
//!
//! A state sequence `r = r_ℓ…r_1` acts with `r_1` first, so walking a run in
//! `T ∘ w` from the root reads `r` from the right. The product therefore
//! tracks classes of the reversed language; its class component still
//! advances by the input letter and a product state is accepting iff the
//! input read so far lies in `R`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::automaton::{escape, LetterWord, SAutomaton, MAX_CONSTRUCTED_STATES};
use crate::error::{Error, Result};
use crate::instance::MAX_LANGUAGE_STATES;
use crate::lang::{parse_regex, Dfa};
use crate::semigroup::SaturatedAutomaton;

/// Minimal complete acceptor of `R` together with the minimal acceptor of
/// its reversal, which drives the product construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NerodeDfa {
    pub dfa: Dfa,
    pub reversed: Dfa,
}

impl NerodeDfa {
    pub fn new(dfa: &Dfa) -> Result<Self> {
        let dfa = dfa.minimize();
        let reversed = dfa.reversed(MAX_LANGUAGE_STATES)?;
        Ok(NerodeDfa { dfa, reversed })
    }

    /// `Q*` over `num_states` letters.
    pub fn all(num_states: usize) -> Self {
        let dfa = Dfa {
            num_letters: num_states,
            trans: vec![0; num_states],
            initial: 0,
            accepting: vec![true],
        };
        NerodeDfa {
            reversed: dfa.clone(),
            dfa,
        }
    }

    /// Number of Myhill–Nerode classes of `R`.
    pub fn num_classes(&self) -> usize {
        self.dfa.num_states()
    }

    /// Number of classes tracked by product machines.
    pub fn product_classes(&self) -> usize {
        self.reversed.num_states()
    }

    pub fn num_letters(&self) -> usize {
        self.dfa.num_letters
    }

    pub fn contains(&self, r: &[usize]) -> bool {
        self.dfa.accepts(r)
    }

    /// The same language over the states of a saturated automaton, each
    /// original state replaced by its image.
    pub fn lift(&self, sa: &SaturatedAutomaton) -> Result<NerodeDfa> {
        if self.num_letters() != sa.original.num_states() {
            return Err(Error::input("language alphabet does not match the automaton"));
        }
        let lifted = self
            .dfa
            .map_letters(&sa.origin_map, sa.automaton.num_states(), MAX_LANGUAGE_STATES)?;
        NerodeDfa::new(&lifted)
    }
}

/// Minimal acceptor of a regular expression over the state names of `t`.
pub fn nerode(t: &SAutomaton, regex: &str) -> Result<NerodeDfa> {
    let nfa = parse_regex(regex, t.states())?.to_nfa(t.num_states());
    NerodeDfa::new(&nfa.determinize(MAX_LANGUAGE_STATES)?)
}

/// Whether every suffix of a word of `R` is in `R`.
pub fn is_suffix_closed(d: &NerodeDfa) -> bool {
    let dfa = &d.dfa;
    let reach = dfa.reachable();
    let coreach = dfa.coreachable();
    let useful: Vec<usize> = (0..dfa.num_states()).filter(|&s| reach[s] && coreach[s]).collect();
    if useful.is_empty() {
        return true;
    }
    // subset of states reached by the suffix acceptor, paired with the state of R
    let start = (useful.clone(), dfa.initial);
    let mut seen: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((set, r)) = queue.pop_front() {
        if set.iter().any(|&s| dfa.accepting[s]) && !dfa.accepting[r] {
            return false;
        }
        for a in 0..dfa.num_letters {
            let mut next: Vec<usize> = set.iter().map(|&s| dfa.next(s, a)).filter(|&s| coreach[s]).collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                continue;
            }
            let item = (next, dfa.next(r, a));
            if seen.insert(item.clone()) {
                queue.push_back(item);
            }
        }
    }
    true
}

/// `T ∘ w`: the orbit `Q* ∘ w` with `u --p / p·u--> p∘u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitalTransducer {
    pub words: Vec<LetterWord>,
    pub num_inputs: usize,
    /// `trans[u * num_inputs + p] = (p · u, index of p ∘ u)`.
    pub trans: Vec<(usize, usize)>,
}

impl OrbitalTransducer {
    pub fn root(&self) -> &LetterWord {
        &self.words[0]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    #[inline]
    pub fn step(&self, u: usize, p: usize) -> (usize, usize) {
        self.trans[u * self.num_inputs + p]
    }
}

pub fn orbital_transducer(t: &SAutomaton, w: &LetterWord) -> Result<OrbitalTransducer> {
    if let Some(&a) = w.iter().find(|&&a| a >= t.num_letters()) {
        return Err(Error::input(format!("unknown letter index {a}")));
    }
    let nq = t.num_states();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut words = vec![w.clone()];
    index.insert(w.0.clone(), 0);
    let mut trans = Vec::new();
    let mut i = 0;
    while i < words.len() {
        for p in 0..nq {
            let mut buf = words[i].0.clone();
            let mut end = [0];
            t.run_in_place(&[p], &mut buf, &mut end);
            let id = match index.get(&buf) {
                Some(&id) => id,
                None => {
                    if words.len() >= MAX_CONSTRUCTED_STATES {
                        return Err(Error::resource("orbit exceeds the size limit"));
                    }
                    index.insert(buf.clone(), words.len());
                    words.push(LetterWord(buf));
                    words.len() - 1
                }
            };
            trans.push((end[0], id));
        }
        i += 1;
    }
    Ok(OrbitalTransducer {
        words,
        num_inputs: nq,
        trans,
    })
}

/// Reachable part of `T ∘ w × R`; state 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductMachine {
    /// `(orbit word index, class of the reversed language)`.
    pub states: Vec<(usize, usize)>,
    pub num_inputs: usize,
    /// `trans[s * num_inputs + p] = (output p · u, target)`.
    pub trans: Vec<(usize, usize)>,
    pub accepting: Vec<bool>,
}

impl ProductMachine {
    #[inline]
    pub fn step(&self, s: usize, p: usize) -> (usize, usize) {
        self.trans[s * self.num_inputs + p]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Endpoint of the run on the input `r` (read from the right).
    pub fn run(&self, r: &[usize]) -> usize {
        r.iter().rev().fold(0, |s, &p| self.step(s, p).1)
    }

    pub fn to_dot(&self, o: &OrbitalTransducer, t: &SAutomaton) -> String {
        let mut out = String::from("digraph product {\n  rankdir=LR;\n");
        for (i, &(u, c)) in self.states.iter().enumerate() {
            let shape = if self.accepting[i] { "doublecircle" } else { "circle" };
            let label = format!("{}, C{}", t.format_letter_word(&o.words[u]), c);
            let _ = writeln!(out, "  s{i} [label=\"{}\", shape={shape}];", escape(&label));
        }
        for s in 0..self.len() {
            for p in 0..self.num_inputs {
                let (q, v) = self.step(s, p);
                let label = format!("{}/{}", t.state_name(p), t.state_name(q));
                let _ = writeln!(out, "  s{s} -> s{v} [label=\"{}\"];", escape(&label));
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn product_with_r(o: &OrbitalTransducer, d: &NerodeDfa) -> Result<ProductMachine> {
    if d.num_letters() != o.num_inputs {
        return Err(Error::input("language alphabet does not match the automaton"));
    }
    let rev = &d.reversed;
    let nq = o.num_inputs;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut states = vec![(0, rev.initial)];
    index.insert((0, rev.initial), 0);
    let mut trans = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (u, c) = states[i];
        for p in 0..nq {
            let (q, v) = o.step(u, p);
            let key = (v, rev.next(c, p));
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    if states.len() >= MAX_CONSTRUCTED_STATES {
                        return Err(Error::resource("product machine exceeds the size limit"));
                    }
                    index.insert(key, states.len());
                    states.push(key);
                    states.len() - 1
                }
            };
            trans.push((q, id));
        }
        i += 1;
    }
    let accepting = states.iter().map(|&(_, c)| rev.accepting[c]).collect();
    Ok(ProductMachine {
        states,
        num_inputs: nq,
        trans,
        accepting,
    })
}

/// `|R ∘ w|`.
pub fn r_orbit_size(t: &SAutomaton, w: &LetterWord, d: &NerodeDfa) -> Result<usize> {
    let o = orbital_transducer(t, w)?;
    let pm = product_with_r(&o, d)?;
    Ok(orbit_of_product(&pm).len())
}

/// Orbit words carried by accepting product states.
pub(crate) fn orbit_of_product(pm: &ProductMachine) -> BTreeSet<usize> {
    pm.states
        .iter()
        .zip(&pm.accepting)
        .filter(|(_, &acc)| acc)
        .map(|(&(u, _), _)| u)
        .collect()
}

/// `|R ∘ w| < |R ∘ wx|`.
pub fn expands(t: &SAutomaton, w: &LetterWord, x: &LetterWord, d: &NerodeDfa) -> Result<bool> {
    if x.is_empty() {
        return Ok(false);
    }
    Ok(r_orbit_size(t, w, d)? < r_orbit_size(t, &w.concat(x), d)?)
}

/// Shortest, then lexicographically least, `x` with `|x| ≤ maxlen` that
/// `R`-expands `w`.
pub fn find_expander(t: &SAutomaton, w: &LetterWord, d: &NerodeDfa, maxlen: usize) -> Result<Option<LetterWord>> {
    let base = r_orbit_size(t, w, d)?;
    let k = t.num_letters();
    for len in 1..=maxlen {
        let mut x = vec![0usize; len];
        loop {
            let x_word = LetterWord(x.clone());
            if r_orbit_size(t, &w.concat(&x_word), d)? > base {
                return Ok(Some(x_word));
            }
            let mut i = len;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                x[i] += 1;
                if x[i] < k {
                    break;
                }
                x[i] = 0;
            }
            if x.iter().all(|&a| a == 0) {
                break;
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn lw(t: &SAutomaton, s: &str) -> LetterWord {
        t.parse_letter_word(s).unwrap()
    }

    /// `{r ∘ w : r ∈ R, |r| ≤ bound}` by enumeration.
    fn orbit_brute(t: &SAutomaton, w: &LetterWord, d: &NerodeDfa, bound: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        let mut layer: Vec<Vec<usize>> = vec![vec![]];
        for len in 0..=bound {
            for r in &layer {
                if d.contains(r) {
                    out.insert(t.act_unchecked(r, w));
                }
            }
            if len < bound {
                layer = layer
                    .iter()
                    .flat_map(|r| (0..t.num_states()).map(move |p| [r.as_slice(), &[p]].concat()))
                    .collect();
            }
        }
        out
    }

    #[test]
    fn nerode_examples() {
        let t = corpus::adding_machine();
        let all = nerode(&t, "Q*").unwrap();
        assert_eq!(all.num_classes(), 1);
        assert!(all.dfa.accepting[all.dfa.initial]);
        assert_eq!(nerode(&t, "q*").unwrap().num_classes(), 2);
        let d = nerode(&t, "(q|e)*q").unwrap();
        assert_eq!(d.num_classes(), 2);
        assert!(!d.dfa.accepting[d.dfa.initial]);
        assert!(nerode(&t, "x*").is_err());
        assert!(nerode(&t, "(q").is_err());
    }

    #[test]
    fn suffix_closedness() {
        let t = corpus::adding_machine();
        assert!(is_suffix_closed(&nerode(&t, "Q*").unwrap()));
        assert!(!is_suffix_closed(&nerode(&t, "qq").unwrap()));
        assert!(!is_suffix_closed(&nerode(&t, "(q|e)*q").unwrap()));
        assert!(is_suffix_closed(&nerode(&t, "e*q*").unwrap()));
        assert!(!is_suffix_closed(&nerode(&t, "q*e*q").unwrap()));
        assert!(is_suffix_closed(&nerode(&t, "∅").unwrap()));
    }

    #[test]
    fn orbital_transducer_examples() {
        let t = corpus::adding_machine();
        let o = orbital_transducer(&t, &lw(&t, "00")).unwrap();
        let words: BTreeSet<String> = o.words.iter().map(|w| t.format_letter_word(w)).collect();
        assert_eq!(words, ["00", "01", "10", "11"].iter().map(|s| s.to_string()).collect());
        let o = orbital_transducer(&t, &LetterWord::empty()).unwrap();
        assert_eq!(o.len(), 1);
        assert!((0..2).all(|p| o.step(0, p).1 == 0));
        let c = corpus::combined();
        let o = orbital_transducer(&c, &lw(&c, "a")).unwrap();
        let words: BTreeSet<String> = o.words.iter().map(|w| c.format_letter_word(w)).collect();
        assert_eq!(words, ["a", "⊥"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn products_and_orbit_sizes() {
        let t = corpus::adding_machine();
        let all = NerodeDfa::all(2);
        let o = orbital_transducer(&t, &lw(&t, "00")).unwrap();
        let pm = product_with_r(&o, &all).unwrap();
        assert_eq!(pm.len(), o.len());
        assert_eq!(r_orbit_size(&t, &lw(&t, "00"), &all).unwrap(), 4);
        assert_eq!(r_orbit_size(&t, &LetterWord::empty(), &all).unwrap(), 1);
        assert_eq!(r_orbit_size(&t, &lw(&t, "0"), &nerode(&t, "ε").unwrap()).unwrap(), 1);
        let qstar = nerode(&t, "q*").unwrap();
        let o = orbital_transducer(&t, &lw(&t, "0")).unwrap();
        let pm = product_with_r(&o, &qstar).unwrap();
        assert!(pm.len() <= o.len() * qstar.product_classes());
        assert_eq!(pm.states[0], (0, qstar.reversed.initial));
        assert!(product_with_r(&o, &NerodeDfa::all(3)).is_err());
    }

    #[test]
    fn run_characterization() {
        let t = corpus::adding_machine();
        for re in ["Q*", "q*", "e*q*", "q e* q", "(q|e)*q"] {
            let d = nerode(&t, re).unwrap();
            for w in ["0", "01", "110"] {
                let w = lw(&t, w);
                let o = orbital_transducer(&t, &w).unwrap();
                let pm = product_with_r(&o, &d).unwrap();
                for r in all_words(2, 4) {
                    let s = pm.run(&r);
                    assert_eq!(o.words[pm.states[s].0].0, t.act_unchecked(&r, &w));
                    assert_eq!(pm.accepting[s], d.contains(&r));
                }
                let brute = orbit_brute(&t, &w, &d, 8);
                assert_eq!(r_orbit_size(&t, &w, &d).unwrap(), brute.len(), "{re}");
            }
        }
    }

    fn all_words(k: usize, max: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..max {
            layer = layer
                .iter()
                .flat_map(|r: &Vec<usize>| (0..k).map(move |p| [r.as_slice(), &[p]].concat()))
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    #[test]
    fn expandability() {
        let t = corpus::adding_machine();
        let all = NerodeDfa::all(2);
        assert!(expands(&t, &lw(&t, "0"), &lw(&t, "0"), &all).unwrap());
        assert!(!expands(&t, &lw(&t, "0"), &LetterWord::empty(), &all).unwrap());
        assert_eq!(find_expander(&t, &lw(&t, "0"), &all, 2).unwrap(), Some(lw(&t, "0")));
        assert_eq!(find_expander(&t, &LetterWord::empty(), &all, 1).unwrap(), Some(lw(&t, "0")));
        let id = corpus::identity();
        let all1 = NerodeDfa::all(1);
        assert!(!expands(&id, &lw(&id, "01"), &lw(&id, "1"), &all1).unwrap());
        assert_eq!(find_expander(&id, &lw(&id, "0"), &all1, 5).unwrap(), None);
    }
}
