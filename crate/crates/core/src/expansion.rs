//! The expansion relation `E_w` and its finite relation acceptor `A_w`.
//!
//! Output words of runs in `T ∘ w` grow to the left: the letter produced by
//! the first step is the rightmost one. The acceptor reads state words in the
//! same order, from the last letter to the first, and the tag of an
//! `S`-block state is the element of the block read so far.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::activity::automaton_active_acceptor;
use crate::automaton::{escape, LetterWord, StateWord};
use crate::error::{Error, Result};
use crate::orbits::{orbital_transducer, product_with_r, NerodeDfa};
use crate::semigroup::SaturatedAutomaton;

/// Cap on enumerated active words and oracle states.
pub const MAX_ENUMERATION: usize = 1 << 20;

/// `A(n)`, read off the automaton-level active acceptor.
pub fn active_words_of_length(sa: &SaturatedAutomaton, n: usize) -> Result<BTreeSet<LetterWord>> {
    let dfa = automaton_active_acceptor(sa).nfa.determinize(crate::activity::MAX_SUBSET_STATES)?;
    let coreach = dfa.coreachable();
    // states that reach acceptance in exactly the remaining number of steps
    let ns = dfa.num_states();
    let mut can: Vec<Vec<bool>> = vec![dfa.accepting.clone()];
    for _ in 0..n {
        let prev = can.last().unwrap();
        let next = (0..ns)
            .map(|s| coreach[s] && (0..dfa.num_letters).any(|a| prev[dfa.next(s, a)]))
            .collect();
        can.push(next);
    }
    let mut out = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(dfa.initial, Vec::new())];
    while let Some((s, word)) = stack.pop() {
        let remaining = n - word.len();
        if !can[remaining][s] {
            continue;
        }
        if remaining == 0 {
            if out.len() >= MAX_ENUMERATION {
                return Err(Error::resource("too many active words"));
            }
            out.insert(LetterWord(word));
            continue;
        }
        for a in 0..dfa.num_letters {
            let mut w = word.clone();
            w.push(a);
            stack.push((dfa.next(s, a), w));
        }
    }
    Ok(out)
}

/// Prepends `x` to a normal form, merging with a leading `S`-block.
fn prepend(sa: &SaturatedAutomaton, x: usize, nf: &[usize]) -> Vec<usize> {
    match (sa.element_of[x], nf.first().and_then(|&y| sa.element_of[y])) {
        (Some(a), Some(b)) => {
            let mut out = nf.to_vec();
            out[0] = sa.s_states[sa.semigroup.table[a][b]];
            out
        }
        _ => {
            let mut out = Vec::with_capacity(nf.len() + 1);
            out.push(x);
            out.extend_from_slice(nf);
            out
        }
    }
}

/// `E_w` restricted to words of length at most `maxlen`, stored as pairs of
/// normal forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionRelation {
    pub maxlen: usize,
    pub pairs: BTreeSet<(StateWord, StateWord)>,
}

impl ExpansionRelation {
    pub fn contains(&self, sa: &SaturatedAutomaton, p: &StateWord, q: &StateWord) -> bool {
        let (p, q) = (sa.normal_form(p), sa.normal_form(q));
        self.pairs.contains(&(p, q))
    }
}

/// Exhaustive computation of `E_w` from its definition: every run from the
/// root of `T ∘ w × R` is followed keeping only the normal form of its output,
/// which never gets shorter as the run grows, so the search space is finite.
pub fn expansion_relation_bruteforce(
    sa: &SaturatedAutomaton,
    w: &LetterWord,
    d: &NerodeDfa,
    maxlen: usize,
) -> Result<ExpansionRelation> {
    let o = orbital_transducer(&sa.automaton, w)?;
    let pm = product_with_r(&o, d)?;
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((0, Vec::new()));
    queue.push_back((0usize, Vec::new()));
    let mut at: HashMap<usize, BTreeSet<Vec<usize>>> = HashMap::new();
    while let Some((s, nf)) = queue.pop_front() {
        if pm.accepting[s] && !nf.is_empty() {
            at.entry(pm.states[s].0).or_default().insert(nf.clone());
        }
        for p in 0..pm.num_inputs {
            let (out, t) = pm.step(s, p);
            let next = prepend(sa, out, &nf);
            if next.len() > maxlen {
                continue;
            }
            let item = (t, next);
            if !seen.contains(&item) {
                if seen.len() >= MAX_ENUMERATION {
                    return Err(Error::resource("expansion oracle exceeds the size limit"));
                }
                seen.insert(item.clone());
                queue.push_back(item);
            }
        }
    }
    let mut pairs = BTreeSet::new();
    for nfs in at.values() {
        for a in nfs {
            for b in nfs {
                pairs.insert((StateWord(a.clone()), StateWord(b.clone())));
            }
        }
    }
    Ok(ExpansionRelation { maxlen, pairs })
}

/// A state `(u, tag, C, D)` of `A_w`; classes are those tracked by product
/// machines.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpansionState {
    pub word: LetterWord,
    /// `None` for `ε`, otherwise a state of `S`.
    pub tag: Option<usize>,
    pub in_class: usize,
    pub out_class: usize,
}

/// Nondeterministic finite relation acceptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfra {
    pub num_letters: usize,
    pub edges: Vec<Vec<(usize, usize)>>,
    pub initial: usize,
    /// Symmetric acceptance relation as sorted pairs.
    pub accept: Vec<(usize, usize)>,
}

impl Nfra {
    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    fn ends(&self, word: &[usize]) -> Vec<bool> {
        let mut cur = vec![false; self.num_states()];
        cur[self.initial] = true;
        for &a in word.iter().rev() {
            let mut next = vec![false; self.num_states()];
            for (s, _) in cur.iter().enumerate().filter(|(_, &b)| b) {
                for &(b, t) in &self.edges[s] {
                    if a == b {
                        next[t] = true;
                    }
                }
            }
            cur = next;
        }
        cur
    }

    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph nfra {\n  rankdir=LR;\n");
        for s in 0..self.num_states() {
            let shape = if s == self.initial { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  z{s} [shape={shape}];");
        }
        for (s, es) in self.edges.iter().enumerate() {
            for &(a, t) in es {
                let _ = writeln!(out, "  z{s} -> z{t} [label=\"{}\"];", escape(&names[a]));
            }
        }
        for &(a, b) in self.accept.iter().filter(|(a, b)| a <= b) {
            let _ = writeln!(out, "  z{a} -> z{b} [style=dashed, dir=none];");
        }
        out.push_str("}\n");
        out
    }
}

/// `𝒲`: per state of `A_w`, the orbit words it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessMap {
    pub states: Vec<ExpansionState>,
    pub sets: Vec<BTreeSet<LetterWord>>,
}

/// Acceptance: some initial run on `p` and some on `q` end in `F`-related
/// states. Empty words are never accepted.
pub fn nfra_accepts(a: &Nfra, p: &StateWord, q: &StateWord) -> bool {
    if p.is_empty() || q.is_empty() {
        return false;
    }
    let (x, y) = (a.ends(p), a.ends(q));
    a.accept.iter().any(|&(s, t)| x[s] && y[t])
}

/// Builds `A_w`. When `k` is given, the size bound `(K+1)N(|S|N+1)` is
/// checked.
pub fn build_nfra(sa: &SaturatedAutomaton, w: &LetterWord, d: &NerodeDfa, k: Option<u64>) -> Result<(Nfra, WitnessMap)> {
    let active = active_words_of_length(sa, w.len())?;
    build_nfra_with(sa, w, d, k, &active)
}

pub(crate) fn build_nfra_with(
    sa: &SaturatedAutomaton,
    w: &LetterWord,
    d: &NerodeDfa,
    k: Option<u64>,
    active: &BTreeSet<LetterWord>,
) -> Result<(Nfra, WitnessMap)> {
    if d.num_letters() != sa.automaton.num_states() {
        return Err(Error::input("language alphabet does not match the saturated automaton"));
    }
    let t = &sa.automaton;
    let o = orbital_transducer(t, w)?;
    let pm = product_with_r(&o, d)?;
    let n = d.product_classes();
    let ns = sa.s_states.len();
    let mut words = vec![w.clone()];
    words.extend(active.iter().filter(|u| *u != w).cloned());
    let nw = words.len();
    let size = nw * n * (1 + ns * n);
    if let Some(k) = k {
        let bound = (k as u128 + 1) * n as u128 * (ns as u128 * n as u128 + 1);
        if size as u128 > bound {
            return Err(Error::precondition(format!(
                "acceptor has {size} states, above the activity bound {bound}"
            )));
        }
    }
    if size > crate::automaton::MAX_CONSTRUCTED_STATES {
        return Err(Error::resource("relation acceptor exceeds the size limit"));
    }
    let orbit_index: HashMap<&[usize], usize> = o.words.iter().enumerate().map(|(i, u)| (u.0.as_slice(), i)).collect();
    let product_index: HashMap<(usize, usize), usize> =
        pm.states.iter().enumerate().map(|(i, &st)| (st, i)).collect();
    let eps = |u: usize, c: usize| u * n + c;
    let base = nw * n;
    let tagged = |u: usize, e: usize, c: usize, dd: usize| base + ((u * ns + e) * n + c) * n + dd;

    let mut states = Vec::with_capacity(size);
    for (ui, u) in words.iter().enumerate() {
        for c in 0..n {
            debug_assert_eq!(states.len(), eps(ui, c));
            states.push(ExpansionState {
                word: u.clone(),
                tag: None,
                in_class: c,
                out_class: c,
            });
        }
    }
    for (ui, u) in words.iter().enumerate() {
        for e in 0..ns {
            for c in 0..n {
                for dd in 0..n {
                    debug_assert_eq!(states.len(), tagged(ui, e, c, dd));
                    states.push(ExpansionState {
                        word: u.clone(),
                        tag: Some(sa.s_states[e]),
                        in_class: c,
                        out_class: dd,
                    });
                }
            }
        }
    }

    // 𝒲 as sets of product states
    let mut witness: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); size];
    for (ui, u) in words.iter().enumerate() {
        let Some(&oi) = orbit_index.get(u.0.as_slice()) else { continue };
        for c in 0..n {
            let Some(&start) = product_index.get(&(oi, c)) else { continue };
            witness[eps(ui, c)].insert(start);
            let mut seen: HashSet<(usize, usize)> = HashSet::new();
            let mut queue = VecDeque::new();
            for p in 0..pm.num_inputs {
                let (out, y) = pm.step(start, p);
                if let Some(g) = sa.element_of[out] {
                    if seen.insert((y, g)) {
                        queue.push_back((y, g));
                    }
                }
            }
            while let Some((y, g)) = queue.pop_front() {
                witness[tagged(ui, g, c, pm.states[y].1)].insert(y);
                for p in 0..pm.num_inputs {
                    let (out, y2) = pm.step(y, p);
                    if let Some(h) = sa.element_of[out] {
                        let item = (y2, sa.semigroup.table[h][g]);
                        if seen.insert(item) {
                            queue.push_back(item);
                        }
                    }
                }
            }
        }
    }

    let word_index: HashMap<&[usize], usize> = words.iter().enumerate().map(|(i, u)| (u.0.as_slice(), i)).collect();
    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); size];
    for (ui, _) in words.iter().enumerate() {
        for c in 0..n {
            for (e, &s) in sa.s_states.iter().enumerate() {
                for dd in 0..n {
                    edges[eps(ui, c)].insert((s, tagged(ui, e, c, dd)));
                    for (f, &tt) in sa.s_states.iter().enumerate() {
                        let g = sa.semigroup.table[f][e];
                        edges[tagged(ui, e, c, dd)].insert((tt, tagged(ui, g, c, dd)));
                    }
                }
            }
        }
    }
    for z in 0..size {
        for &y in &witness[z] {
            debug_assert_eq!(pm.states[y].1, states[z].out_class);
            for p in 0..pm.num_inputs {
                let (out, y2) = pm.step(y, p);
                if sa.is_s_state(out) {
                    continue;
                }
                let (v, e) = pm.states[y2];
                let vi = *word_index
                    .get(o.words[v].0.as_slice())
                    .expect("targets of non-S outputs are active words");
                edges[z].insert((out, eps(vi, e)));
            }
        }
    }

    let mut by_word: HashMap<usize, Vec<usize>> = HashMap::new();
    for z in 0..size {
        if !d.reversed.accepting[states[z].out_class] {
            continue;
        }
        let mut ws: BTreeSet<usize> = BTreeSet::new();
        for &y in &witness[z] {
            ws.insert(pm.states[y].0);
        }
        for u in ws {
            by_word.entry(u).or_default().push(z);
        }
    }
    let mut accept: BTreeSet<(usize, usize)> = BTreeSet::new();
    for zs in by_word.values() {
        for &a in zs {
            for &b in zs {
                accept.insert((a, b));
            }
        }
    }

    let nfra = Nfra {
        num_letters: t.num_states(),
        edges: edges.into_iter().map(|e| e.into_iter().collect()).collect(),
        initial: eps(0, d.reversed.initial),
        accept: accept.into_iter().collect(),
    };
    let sets = witness
        .iter()
        .map(|ys| ys.iter().map(|&y| o.words[pm.states[y].0].clone()).collect())
        .collect();
    Ok((nfra, WitnessMap { states, sets }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::semigroup::{saturate, DEFAULT_CAP};

    fn setup(text: &str) -> (SaturatedAutomaton, NerodeDfa) {
        let inst = corpus::instance(text);
        let sa = saturate(&inst.automaton, &inst.s.unwrap(), DEFAULT_CAP).unwrap();
        let d = NerodeDfa::all(sa.automaton.num_states());
        (sa, d)
    }

    #[test]
    fn active_words() {
        let (sa, _) = setup(corpus::ADDING_MACHINE);
        let a = active_words_of_length(&sa, 3).unwrap();
        assert_eq!(a.into_iter().collect::<Vec<_>>(), vec![LetterWord(vec![0, 0, 0])]);
        assert_eq!(active_words_of_length(&sa, 0).unwrap().len(), 1);
        let (sa, _) = setup(corpus::U1);
        assert!(active_words_of_length(&sa, 3).unwrap().is_empty());
    }

    #[test]
    fn adding_machine_relation() {
        let (sa, d) = setup(corpus::ADDING_MACHINE);
        let w = sa.automaton.parse_letter_word("0").unwrap();
        let sw = |s: &str| sa.automaton.parse_state_word(s).unwrap();
        let rel = expansion_relation_bruteforce(&sa, &w, &d, 3).unwrap();
        assert!(rel.contains(&sa, &sw("e"), &sw("e")));
        assert!(rel.contains(&sa, &sw("e"), &sw("eqe")));
        assert!(rel.contains(&sa, &sw("eqe"), &sw("e")));
        assert!(!rel.contains(&sa, &sw("q"), &sw("e")));
        let (a, wm) = build_nfra(&sa, &w, &d, Some(1)).unwrap();
        assert_eq!(wm.sets[a.initial], BTreeSet::from([w.clone()]));
        assert!(nfra_accepts(&a, &sw("e"), &sw("eqe")));
        assert!(!nfra_accepts(&a, &sw("q"), &sw("e")));
        assert!(nfra_accepts(&a, &sw("e"), &sw("e")));
    }

    #[test]
    fn unrealizable_states_accept_nothing() {
        let inst = corpus::instance(corpus::ADDING_MACHINE);
        let sa = saturate(&inst.automaton, &inst.s.unwrap(), DEFAULT_CAP).unwrap();
        let d = crate::orbits::nerode(&inst.automaton, "q*").unwrap().lift(&sa).unwrap();
        let w = sa.automaton.parse_letter_word("01").unwrap();
        let (a, wm) = build_nfra(&sa, &w, &d, None).unwrap();
        for (z, set) in wm.sets.iter().enumerate() {
            if set.is_empty() {
                assert!(a.accept.iter().all(|&(x, y)| x != z && y != z));
            }
        }
    }

    fn words(k: usize, max: usize) -> Vec<StateWord> {
        let mut out = Vec::new();
        let mut layer = vec![vec![]];
        for _ in 0..max {
            layer = layer
                .iter()
                .flat_map(|r: &Vec<usize>| (0..k).map(move |p| [r.as_slice(), &[p]].concat()))
                .collect();
            out.extend(layer.iter().cloned().map(StateWord));
        }
        out
    }

    #[test]
    fn acceptor_matches_oracle() {
        for (name, text) in corpus::ALL {
            let inst = corpus::instance(text);
            let sa = saturate(&inst.automaton, &inst.s.unwrap(), DEFAULT_CAP).unwrap();
            let first = inst.automaton.state_name(0).to_string();
            for re in ["Q*".to_string(), format!("{first}*"), format!("(Q{first})*")] {
                let d = crate::orbits::nerode(&inst.automaton, &re).unwrap().lift(&sa).unwrap();
                for len in 0..=2 {
                    for w in words(sa.automaton.num_letters(), len).into_iter().map(|p| LetterWord(p.0)).chain(
                        (len == 0).then(LetterWord::empty),
                    ) {
                        let rel = expansion_relation_bruteforce(&sa, &w, &d, 3).unwrap();
                        let (a, _) = build_nfra(&sa, &w, &d, None).unwrap();
                        let ws = words(sa.automaton.num_states(), 3);
                        for p in &ws {
                            for q in &ws {
                                assert_eq!(
                                    nfra_accepts(&a, p, q),
                                    rel.contains(&sa, p, q),
                                    "{name} {re} w={:?} p={:?} q={:?}",
                                    w,
                                    p,
                                    q
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}
