//! Acceptors for `S`-active words and the growth class of their languages.

use std::collections::{BTreeSet, HashMap};

use crate::automaton::{StateWord, MAX_CONSTRUCTED_STATES};
use crate::error::{Error, Result};
use crate::lang::{Dfa, Nfa};
use crate::semigroup::SaturatedAutomaton;

/// Cap on the subset construction in [`growth_class`].
pub const MAX_SUBSET_STATES: usize = 1 << 20;

/// Cap on `|Q|·|Σ|^n` for the exhaustive oracles.
pub const BRUTE_FORCE_LIMIT: usize = 1 << 24;

/// An acceptor over `Σ` whose states are state sequences of some power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordNfa {
    pub nfa: Nfa,
    pub labels: Vec<StateWord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Finite,
    Polynomial(usize),
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthReport {
    pub class: GrowthClass,
    pub bounded: bool,
    pub sup_count: Option<u64>,
}

/// Acceptor of `A_p = {p ∘ u : p · u ∉ S⁺}`, reading the outputs.
pub fn active_word_acceptor(sa: &SaturatedAutomaton, p: &StateWord) -> Result<WordNfa> {
    if p.is_empty() {
        return Err(Error::input("the state sequence must be nonempty"));
    }
    let t = &sa.automaton;
    if let Some(&x) = p.iter().find(|&&x| x >= t.num_states()) {
        return Err(Error::input(format!("unknown state index {x}")));
    }
    let mut nfa = Nfa::new(t.num_letters());
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut labels: Vec<StateWord> = Vec::new();
    let mut add = |w: Vec<usize>, nfa: &mut Nfa, labels: &mut Vec<StateWord>| -> Result<(usize, bool)> {
        if let Some(&i) = index.get(&w) {
            return Ok((i, false));
        }
        if labels.len() >= MAX_CONSTRUCTED_STATES {
            return Err(Error::resource("active-word acceptor is too large"));
        }
        let i = nfa.add_state(sa.splus_element(&w).is_none());
        index.insert(w.clone(), i);
        labels.push(StateWord(w));
        Ok((i, true))
    };
    let (root, _) = add(p.0.clone(), &mut nfa, &mut labels)?;
    nfa.initial = vec![root];
    let mut i = 0;
    while i < labels.len() {
        for a in 0..t.num_letters() {
            let (b, next) = t.step_word(&labels[i], a);
            let (j, _) = add(next, &mut nfa, &mut labels)?;
            nfa.add_edge(i, b, j);
        }
        i += 1;
    }
    Ok(WordNfa { nfa, labels })
}

/// Acceptor of `⋃_q A_q` over the states of the saturated automaton.
pub fn automaton_active_acceptor(sa: &SaturatedAutomaton) -> WordNfa {
    let t = &sa.automaton;
    let mut nfa = Nfa::new(t.num_letters());
    for p in 0..t.num_states() {
        nfa.add_state(!sa.is_s_state(p));
    }
    for p in 0..t.num_states() {
        for a in 0..t.num_letters() {
            let (b, q) = t.step(p, a);
            nfa.add_edge(p, b, q);
        }
    }
    nfa.initial = (0..t.num_states()).collect();
    WordNfa {
        nfa,
        labels: (0..t.num_states()).map(|p| StateWord(vec![p])).collect(),
    }
}

/// Strongly connected components of the graph restricted to `alive`
/// (iterative Tarjan). Components come out in reverse topological order.
pub(crate) fn sccs(n: usize, succ: &dyn Fn(usize) -> Vec<usize>, alive: &[bool]) -> Vec<Vec<usize>> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if !alive[root] || index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, next, pos)) = work.last_mut() {
            let v = *v;
            if *pos < next.len() {
                let w = next[*pos];
                *pos += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some((u, _, _)) = work.last() {
                    low[*u] = low[*u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Growth of `n ↦ |L ∩ Σⁿ|` for the language of an acceptor.
pub fn growth_class(nfa: &Nfa) -> Result<GrowthReport> {
    let dfa = nfa.determinize(MAX_SUBSET_STATES)?;
    growth_class_dfa(&dfa)
}

pub fn growth_class_dfa(dfa: &Dfa) -> Result<GrowthReport> {
    let n = dfa.num_states();
    let k = dfa.num_letters;
    let reach = dfa.reachable();
    let coreach = dfa.coreachable();
    let alive: Vec<bool> = (0..n).map(|s| reach[s] && coreach[s]).collect();
    let succ = |s: usize| (0..k).map(|a| dfa.next(s, a)).collect::<Vec<_>>();
    let comps = sccs(n, &succ, &alive);
    let mut comp_of = vec![usize::MAX; n];
    for (c, comp) in comps.iter().enumerate() {
        for &s in comp {
            comp_of[s] = c;
        }
    }
    let mut cyclic = vec![false; comps.len()];
    for (c, comp) in comps.iter().enumerate() {
        let internal = comp
            .iter()
            .map(|&s| succ(s).into_iter().filter(|&t| alive[t] && comp_of[t] == c).count())
            .sum::<usize>();
        if internal > comp.len() {
            return Ok(GrowthReport {
                class: GrowthClass::Exponential,
                bounded: false,
                sup_count: None,
            });
        }
        cyclic[c] = internal > 0;
    }
    // components are in reverse topological order: successors come first
    let mut best = vec![0usize; comps.len()];
    for (c, comp) in comps.iter().enumerate() {
        let mut m = 0;
        for &s in comp {
            for t in succ(s) {
                if alive[t] && comp_of[t] != c {
                    m = m.max(best[comp_of[t]]);
                }
            }
        }
        best[c] = m + usize::from(cyclic[c]);
    }
    let depth = best.iter().copied().max().unwrap_or(0);
    let class = match depth {
        0 => GrowthClass::Finite,
        d => GrowthClass::Polynomial(d - 1),
    };
    let bounded = depth <= 1;
    let sup_count = if bounded { Some(sup_of_counts(dfa, &alive)) } else { None };
    Ok(GrowthReport {
        class,
        bounded,
        sup_count,
    })
}

/// Maximum of the per-length word counts, for a language with bounded counts.
fn sup_of_counts(dfa: &Dfa, alive: &[bool]) -> u64 {
    let n = dfa.num_states();
    if !alive.get(dfa.initial).copied().unwrap_or(false) {
        return 0;
    }
    let mut v = vec![0u64; n];
    v[dfa.initial] = 1;
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    let mut sup = 0;
    while seen.insert(v.clone(), ()).is_none() {
        let count: u64 = (0..n).filter(|&s| dfa.accepting[s]).map(|s| v[s]).sum();
        sup = sup.max(count);
        let mut next = vec![0u64; n];
        for s in (0..n).filter(|&s| alive[s] && v[s] > 0) {
            for a in 0..dfa.num_letters {
                let t = dfa.next(s, a);
                if alive[t] {
                    next[t] += v[s];
                }
            }
        }
        v = next;
    }
    sup
}

/// Number of words of each length `0..=max_len` accepted by `nfa`.
pub fn count_words(nfa: &Nfa, max_len: usize) -> Result<Vec<u64>> {
    let dfa = nfa.determinize(MAX_SUBSET_STATES)?;
    let n = dfa.num_states();
    let mut v = vec![0u64; n];
    v[dfa.initial] = 1;
    let mut out = Vec::with_capacity(max_len + 1);
    for _ in 0..=max_len {
        out.push((0..n).filter(|&s| dfa.accepting[s]).map(|s| v[s]).sum());
        let mut next = vec![0u64; n];
        for s in 0..n {
            for a in 0..dfa.num_letters {
                next[dfa.next(s, a)] += v[s];
            }
        }
        v = next;
    }
    Ok(out)
}

/// `A(n)` by exhaustive enumeration of states and inputs.
pub fn active_set(sa: &SaturatedAutomaton, n: usize) -> Result<BTreeSet<Vec<usize>>> {
    let t = &sa.automaton;
    let total = (t.num_letters() as u128).pow(n as u32) * t.num_states() as u128;
    if total > BRUTE_FORCE_LIMIT as u128 {
        return Err(Error::input(format!("brute force over length {n} exceeds the limit")));
    }
    let mut out = BTreeSet::new();
    let k = t.num_letters();
    let mut u = vec![0usize; n];
    loop {
        for q in 0..t.num_states() {
            let mut buf = u.clone();
            let mut end = [0];
            t.run_in_place(&[q], &mut buf, &mut end);
            if !sa.is_s_state(end[0]) {
                out.insert(buf);
            }
        }
        // next word in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            u[i] += 1;
            if u[i] < k {
                break;
            }
            u[i] = 0;
        }
    }
}

/// `|A(n)|` by exhaustive enumeration.
pub fn count_active(sa: &SaturatedAutomaton, n: usize) -> Result<usize> {
    Ok(active_set(sa, n)?.len())
}

pub fn is_bounded_activity(sa: &SaturatedAutomaton) -> Result<bool> {
    Ok(growth_class(&automaton_active_acceptor(sa).nfa)?.bounded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::semigroup::{saturate, DEFAULT_CAP};

    fn sat(t: &crate::SAutomaton, names: &[&str]) -> SaturatedAutomaton {
        let s: Vec<usize> = names.iter().map(|n| t.state_index(n).unwrap()).collect();
        saturate(t, &s, DEFAULT_CAP).unwrap()
    }

    fn single_letter_nfa(words: &[&[usize]], k: usize, star: Option<usize>) -> Nfa {
        let mut n = Nfa::new(k);
        let s = n.add_state(star.is_some() || words.iter().any(|w| w.is_empty()));
        n.initial = vec![s];
        if let Some(a) = star {
            n.add_edge(s, a, s);
        }
        for w in words.iter().filter(|w| !w.is_empty()) {
            let mut cur = s;
            for (i, &a) in w.iter().enumerate() {
                let next = n.add_state(i + 1 == w.len());
                n.add_edge(cur, a, next);
                cur = next;
            }
        }
        n
    }

    #[test]
    fn adding_machine_active_words() {
        let t = corpus::adding_machine();
        let sa = sat(&t, &["e"]);
        let q = StateWord(vec![sa.origin_map[0]]);
        let a = active_word_acceptor(&sa, &q).unwrap();
        for n in 0..=8 {
            assert!(a.nfa.accepts(&vec![0; n]));
            assert_eq!(count_words(&a.nfa, 8).unwrap()[n], 1);
        }
        let e = StateWord(vec![sa.origin_map[1]]);
        let a = active_word_acceptor(&sa, &e).unwrap();
        assert_eq!(count_words(&a.nfa, 8).unwrap(), vec![0; 9]);
        assert!(active_word_acceptor(&sa, &StateWord(vec![])).is_err());
        assert_eq!(count_active(&sa, 3).unwrap(), 1);
        assert_eq!(count_active(&sa, 0).unwrap(), 1);
        assert!(active_set(&sa, 3).unwrap().contains(&vec![0, 0, 0]));
        let r = growth_class(&automaton_active_acceptor(&sa).nfa).unwrap();
        assert_eq!(r.class, GrowthClass::Polynomial(0));
        assert_eq!(r.sup_count, Some(1));
        assert!(is_bounded_activity(&sa).unwrap());
    }

    #[test]
    fn combined_automaton_activity() {
        let c = corpus::combined();
        let sa = sat(&c, &["e", "z"]);
        let z = StateWord(vec![sa.origin_map[2]]);
        let a = active_word_acceptor(&sa, &z).unwrap();
        assert_eq!(count_words(&a.nfa, 6).unwrap(), vec![0; 7]);
        let all = automaton_active_acceptor(&sa);
        assert_eq!(count_words(&all.nfa, 8).unwrap(), vec![1; 9]);
        assert!(is_bounded_activity(&sa).unwrap());
        let se = sat(&c, &["e"]);
        let r = growth_class(&automaton_active_acceptor(&se).nfa).unwrap();
        assert_eq!(r.class, GrowthClass::Exponential);
        assert!(!r.bounded && r.sup_count.is_none());
        let sz = sat(&c, &["z"]);
        assert_eq!(growth_class(&automaton_active_acceptor(&sz).nfa).unwrap().class, GrowthClass::Exponential);
    }

    #[test]
    fn full_subset_is_never_active() {
        for text in [corpus::U1, corpus::IDENTITY] {
            let inst = corpus::instance(text);
            let s = inst.s.unwrap();
            let sa = saturate(&inst.automaton, &s, DEFAULT_CAP).unwrap();
            assert_eq!(count_words(&automaton_active_acceptor(&sa).nfa, 5).unwrap(), vec![0; 6]);
            assert_eq!(count_active(&sa, 4).unwrap(), 0);
            assert_eq!(growth_class(&automaton_active_acceptor(&sa).nfa).unwrap().sup_count, Some(0));
        }
    }

    #[test]
    fn growth_examples() {
        let r = growth_class(&single_letter_nfa(&[], 2, Some(0))).unwrap();
        assert_eq!(r, GrowthReport { class: GrowthClass::Polynomial(0), bounded: true, sup_count: Some(1) });
        let mut all = Nfa::new(2);
        let s = all.add_state(true);
        all.initial = vec![s];
        all.add_edge(s, 0, s);
        all.add_edge(s, 1, s);
        assert_eq!(growth_class(&all).unwrap().class, GrowthClass::Exponential);
        let fin = single_letter_nfa(&[&[0], &[1], &[0, 1]], 2, None);
        let r = growth_class(&fin).unwrap();
        assert_eq!(r, GrowthReport { class: GrowthClass::Finite, bounded: true, sup_count: Some(2) });
        // 0*1* grows linearly
        let mut lin = Nfa::new(2);
        let a = lin.add_state(true);
        let b = lin.add_state(true);
        lin.initial = vec![a];
        lin.add_edge(a, 0, a);
        lin.add_edge(a, 1, b);
        lin.add_edge(b, 1, b);
        let r = growth_class(&lin).unwrap();
        assert_eq!(r.class, GrowthClass::Polynomial(1));
        assert!(!r.bounded);
        assert_eq!(growth_class(&Nfa::new(1)).unwrap().class, GrowthClass::Finite);
    }

    #[test]
    fn nfa_and_dfa_reports_agree() {
        let fin = single_letter_nfa(&[&[0], &[1, 1], &[0, 1, 0]], 2, Some(1));
        let dfa = fin.determinize(100).unwrap();
        assert_eq!(growth_class(&fin).unwrap(), growth_class(&dfa.to_nfa()).unwrap());
    }
}
