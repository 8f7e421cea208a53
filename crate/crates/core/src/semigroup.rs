//! Closed subsets of states, enumeration of the finite subsemigroups they
//! generate, the saturation step that gives every element of `S⁺` a unique
//! state, and normal forms in the free product `(S⁺/=_T) ⋆ P⁺`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::automaton::{LetterWord, SAutomaton, StateWord};
use crate::error::{Error, Result};
use crate::machine::Machine;

/// Default bound on the number of elements enumerated for a subsemigroup.
pub const DEFAULT_CAP: usize = 10_000;

/// A finite semigroup with its Cayley table.
///
/// `elements[i]` is the shortlex-least product of generators representing
/// element `i` and `table[i][j]` is the element represented by
/// `elements[i]` followed by `elements[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup {
    pub elements: Vec<StateWord>,
    pub table: Vec<Vec<usize>>,
    /// `(generator, element)` for every generator, in generator order.
    pub generator_map: Vec<(usize, usize)>,
}

/// Outcome of a capped enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Enumeration {
    Finite(FiniteSemigroup),
    ExceedsCap,
}

impl Enumeration {
    pub fn finite(&self) -> Option<&FiniteSemigroup> {
        match self {
            Enumeration::Finite(s) => Some(s),
            Enumeration::ExceedsCap => None,
        }
    }
}

impl FiniteSemigroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    #[inline]
    pub fn product(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn element_of_generator(&self, g: usize) -> Option<usize> {
        self.generator_map.iter().find(|(h, _)| *h == g).map(|&(_, e)| e)
    }

    /// Element represented by a product of generators.
    pub fn evaluate(&self, word: &[usize]) -> Option<usize> {
        let mut it = word.iter();
        let mut e = self.element_of_generator(*it.next()?)?;
        for &g in it {
            e = self.table[e][self.element_of_generator(g)?];
        }
        Some(e)
    }

    pub fn is_associative(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.table[self.table[a][b]][c] == self.table[a][self.table[b][c]]))
        })
    }

    /// Builds a semigroup from an explicit table; generator `g` is element
    /// `generators[g]`. Element representatives are words over generator
    /// positions.
    pub fn from_table(table: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::input("table must be square with entries in range"));
        }
        if generators.iter().any(|&g| g >= n) {
            return Err(Error::input("generator outside the table"));
        }
        let mut rep: Vec<Option<StateWord>> = vec![None; n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for (g, &e) in generators.iter().enumerate() {
            if rep[e].is_none() {
                rep[e] = Some(StateWord(vec![g]));
                order.push(e);
                queue.push_back(e);
            }
        }
        while let Some(x) = queue.pop_front() {
            for (g, &e) in generators.iter().enumerate() {
                let y = table[x][e];
                if rep[y].is_none() {
                    rep[y] = Some(rep[x].as_ref().unwrap().pushed(g));
                    order.push(y);
                    queue.push_back(y);
                }
            }
        }
        if order.len() != n {
            return Err(Error::input("generators do not generate the whole table"));
        }
        // renumber in discovery (shortlex) order
        let mut pos = vec![0; n];
        for (i, &e) in order.iter().enumerate() {
            pos[e] = i;
        }
        let elements = order.iter().map(|&e| rep[e].clone().unwrap()).collect();
        let table = order
            .iter()
            .map(|&a| order.iter().map(|&b| pos[table[a][b]]).collect())
            .collect();
        let generator_map = generators.iter().enumerate().map(|(g, &e)| (g, pos[e])).collect();
        Ok(FiniteSemigroup {
            elements,
            table,
            generator_map,
        })
    }

    /// Size of the cyclic subsemigroup generated by `x` and its index.
    fn cyclic_profile(&self, x: usize) -> (usize, usize) {
        let mut seen = HashMap::new();
        let mut cur = x;
        let mut k = 0;
        while !seen.contains_key(&cur) {
            seen.insert(cur, k);
            cur = self.table[cur][x];
            k += 1;
        }
        (k, seen[&cur])
    }
}

fn check_subset(t: &SAutomaton, s: &[usize]) -> Result<()> {
    match s.iter().find(|&&p| p >= t.num_states()) {
        Some(p) => Err(Error::input(format!("unknown state index {p}"))),
        None => Ok(()),
    }
}

/// `S · a ⊆ S` for every letter `a` (which implies `S · Σ* ⊆ S`).
pub fn is_closed(t: &SAutomaton, s: &[usize]) -> Result<bool> {
    check_subset(t, s)?;
    let set: BTreeSet<usize> = s.iter().copied().collect();
    Ok(s
        .iter()
        .all(|&p| (0..t.num_letters()).all(|a| set.contains(&t.step(p, a).1))))
}

/// The smallest closed subset containing `seed`.
pub fn closure(t: &SAutomaton, seed: &[usize]) -> Vec<usize> {
    let mut set: BTreeSet<usize> = seed.iter().copied().collect();
    let mut stack: Vec<usize> = seed.to_vec();
    while let Some(p) = stack.pop() {
        for a in 0..t.num_letters() {
            let q = t.step(p, a).1;
            if set.insert(q) {
                stack.push(q);
            }
        }
    }
    set.into_iter().collect()
}

/// Breadth-first enumeration of the right Cayley graph of `S⁺/=_T`.
///
/// Elements are compared through their minimal transducers, which are equal
/// exactly when the actions agree.
pub fn enumerate_subsemigroup(t: &SAutomaton, s: &[usize], cap: usize) -> Result<Enumeration> {
    if cap == 0 {
        return Err(Error::input("cap must be positive"));
    }
    if s.is_empty() {
        return Err(Error::input("generating set must be nonempty"));
    }
    check_subset(t, s)?;
    let gens: Vec<usize> = s.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut index: HashMap<Machine, usize> = HashMap::new();
    let mut machines: Vec<Machine> = Vec::new();
    let mut elements: Vec<StateWord> = Vec::new();
    let mut right: Vec<Vec<usize>> = Vec::new();

    // Returns the element of `word`, inserting it if new. `None` on overflow.
    let mut lookup = |word: Vec<usize>, m: Machine, elements: &mut Vec<StateWord>, machines: &mut Vec<Machine>| {
        if let Some(&e) = index.get(&m) {
            return Some(e);
        }
        if elements.len() >= cap {
            return None;
        }
        index.insert(m.clone(), elements.len());
        elements.push(StateWord(word));
        machines.push(m);
        Some(elements.len() - 1)
    };

    let mut generator_map = Vec::new();
    for &g in &gens {
        match lookup(vec![g], Machine::of_state(t, g), &mut elements, &mut machines) {
            Some(e) => generator_map.push((g, e)),
            None => return Ok(Enumeration::ExceedsCap),
        }
    }
    let mut i = 0;
    while i < elements.len() {
        let mut row = Vec::with_capacity(gens.len());
        for &g in &gens {
            let word = elements[i].pushed(g).0;
            let m = machines[i].then(t, g);
            match lookup(word, m, &mut elements, &mut machines) {
                Some(e) => row.push(e),
                None => return Ok(Enumeration::ExceedsCap),
            }
        }
        right.push(row);
        i += 1;
    }
    let n = elements.len();
    let gpos: HashMap<usize, usize> = gens.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let table = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| elements[b].iter().fold(a, |cur, g| right[cur][gpos[g]]))
                .collect()
        })
        .collect();
    Ok(Enumeration::Finite(FiniteSemigroup {
        elements,
        table,
        generator_map,
    }))
}

/// A finite semigroup isomorphism test by backtracking over generator images.
pub fn iso_finite_semigroups(a: &FiniteSemigroup, b: &FiniteSemigroup) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    let mut gen_elems: Vec<usize> = a.generator_map.iter().map(|&(_, e)| e).collect();
    gen_elems.sort_unstable();
    gen_elems.dedup();
    // every element as a product of generator elements
    let words: Vec<Vec<usize>> = a
        .elements
        .iter()
        .map(|w| w.iter().map(|&g| a.element_of_generator(g).unwrap()).collect())
        .collect();
    let profile_a: Vec<(usize, usize)> = (0..n).map(|x| a.cyclic_profile(x)).collect();
    let profile_b: Vec<(usize, usize)> = (0..n).map(|x| b.cyclic_profile(x)).collect();
    let candidates: Vec<Vec<usize>> = gen_elems
        .iter()
        .map(|&g| (0..n).filter(|&y| profile_b[y] == profile_a[g]).collect())
        .collect();
    let mut image = vec![0; gen_elems.len()];
    search(a, b, &gen_elems, &words, &candidates, &mut image, 0)
}

fn search(
    a: &FiniteSemigroup,
    b: &FiniteSemigroup,
    gen_elems: &[usize],
    words: &[Vec<usize>],
    candidates: &[Vec<usize>],
    image: &mut Vec<usize>,
    depth: usize,
) -> bool {
    if depth == gen_elems.len() {
        let img_of = |g: usize| image[gen_elems.iter().position(|&h| h == g).unwrap()];
        let f: Vec<usize> = words
            .iter()
            .map(|w| {
                let mut it = w.iter();
                let first = img_of(*it.next().unwrap());
                it.fold(first, |acc, &g| b.table[acc][img_of(g)])
            })
            .collect();
        let distinct: BTreeSet<usize> = f.iter().copied().collect();
        if distinct.len() != f.len() {
            return false;
        }
        let n = a.len();
        return (0..n).all(|x| (0..n).all(|y| f[a.table[x][y]] == b.table[f[x]][f[y]]));
    }
    for &c in &candidates[depth] {
        image[depth] = c;
        if search(a, b, gen_elems, words, candidates, image, depth + 1) {
            return true;
        }
    }
    false
}

/// Every distinct nonempty closed subset together with the (capped)
/// enumeration of the subsemigroup it generates, ordered by size and then
/// lexicographically.
pub fn discover_closed_subsets(t: &SAutomaton, cap: usize) -> Result<Vec<(Vec<usize>, Enumeration)>> {
    let n = t.num_states();
    let mut found: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    if n <= 16 {
        for mask in 1u32..(1u32 << n) {
            let seed: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let c = closure(t, &seed);
            found.insert((c.len(), c));
        }
    } else {
        for p in 0..n {
            let c = closure(t, &[p]);
            found.insert((c.len(), c));
        }
    }
    found
        .into_iter()
        .map(|(_, s)| enumerate_subsemigroup(t, &s, cap).map(|e| (s, e)))
        .collect()
}

/// An automaton in which every element of `S⁺/=_T` is the action of exactly
/// one state of `s_states`, obtained from a union with tuple states for the
/// element representatives followed by minimization.
#[derive(Debug, Clone)]
pub struct SaturatedAutomaton {
    pub automaton: SAutomaton,
    /// `s_states[i]` is the state for element `i` of `semigroup`.
    pub s_states: Vec<usize>,
    /// Inverse of `s_states` on the states of `automaton`.
    pub element_of: Vec<Option<usize>>,
    pub semigroup: FiniteSemigroup,
    /// Image of every original state.
    pub origin_map: Vec<usize>,
    pub original: SAutomaton,
    pub original_s: Vec<usize>,
    machines: HashMap<Machine, usize>,
}

/// Builds the saturated automaton for a closed subset `s` whose generated
/// subsemigroup has at most `cap` elements.
pub fn saturate(t: &SAutomaton, s: &[usize], cap: usize) -> Result<SaturatedAutomaton> {
    if s.is_empty() {
        return Err(Error::precondition("S must be nonempty"));
    }
    if !is_closed(t, s)? {
        return Err(Error::precondition("S is not closed under the dual action"));
    }
    let semigroup = match enumerate_subsemigroup(t, s, cap)? {
        Enumeration::Finite(sg) => sg,
        Enumeration::ExceedsCap => {
            return Err(Error::precondition(format!(
                "the subsemigroup generated by S has more than {cap} elements"
            )))
        }
    };
    let long: Vec<StateWord> = semigroup.elements.iter().filter(|w| w.len() > 1).cloned().collect();
    let (union, long_ids) = if long.is_empty() {
        (t.clone(), Vec::new())
    } else {
        let (closure, roots) = t.tuple_closure(&long)?;
        let off = t.num_states();
        (t.union(&closure)?, roots.into_iter().map(|r| r + off).collect::<Vec<_>>())
    };
    let (automaton, map) = union.minimize();
    let mut long_iter = long_ids.into_iter();
    let s_states: Vec<usize> = semigroup
        .elements
        .iter()
        .map(|w| if w.len() == 1 { map[w[0]] } else { map[long_iter.next().unwrap()] })
        .collect();
    let mut element_of = vec![None; automaton.num_states()];
    for (e, &st) in s_states.iter().enumerate() {
        debug_assert!(element_of[st].is_none());
        element_of[st] = Some(e);
    }
    let origin_map = map[..t.num_states()].to_vec();
    let machines = s_states
        .iter()
        .enumerate()
        .map(|(e, &st)| (Machine::of_state(&automaton, st), e))
        .collect();
    Ok(SaturatedAutomaton {
        automaton,
        s_states,
        element_of,
        semigroup,
        origin_map,
        original: t.clone(),
        original_s: s.to_vec(),
        machines,
    })
}

impl SaturatedAutomaton {
    pub fn is_s_state(&self, p: usize) -> bool {
        self.element_of[p].is_some()
    }

    /// States outside `S`.
    pub fn p_states(&self) -> Vec<usize> {
        (0..self.automaton.num_states()).filter(|&p| !self.is_s_state(p)).collect()
    }

    /// Replaces every maximal block of `S`-states by the state of its element.
    pub fn normal_form(&self, p: &StateWord) -> StateWord {
        let mut out = Vec::with_capacity(p.len());
        let mut block: Option<usize> = None;
        for &x in p.iter() {
            match self.element_of[x] {
                Some(e) => {
                    block = Some(match block {
                        Some(b) => self.semigroup.table[b][e],
                        None => e,
                    })
                }
                None => {
                    if let Some(b) = block.take() {
                        out.push(self.s_states[b]);
                    }
                    out.push(x);
                }
            }
        }
        if let Some(b) = block {
            out.push(self.s_states[b]);
        }
        StateWord(out)
    }

    /// `p ≈ q`.
    pub fn approx_equiv(&self, p: &StateWord, q: &StateWord) -> bool {
        self.normal_form(p) == self.normal_form(q)
    }

    /// The element of `S⁺/=_T` equal to `p`, if any (exact test).
    pub fn splus_element(&self, p: &[usize]) -> Option<usize> {
        if p.is_empty() {
            return None;
        }
        let nf = self.normal_form(&StateWord(p.to_vec()));
        if nf.len() == 1 {
            if let Some(e) = self.element_of[nf[0]] {
                return Some(e);
            }
        }
        Machine::of_word(&self.automaton, p).and_then(|m| self.machines.get(&m).copied())
    }

    /// Same word problem as the original automaton, on the saturated states.
    pub fn lift_word(&self, p: &StateWord) -> StateWord {
        StateWord(p.iter().map(|&q| self.origin_map[q]).collect())
    }

    pub fn act(&self, p: &StateWord, u: &LetterWord) -> Result<LetterWord> {
        self.automaton.act(p, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn set(t: &SAutomaton, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| t.state_index(n).unwrap()).collect()
    }

    #[test]
    fn closedness() {
        let t = corpus::adding_machine();
        assert!(is_closed(&t, &set(&t, &["e"])).unwrap());
        assert!(!is_closed(&t, &set(&t, &["q"])).unwrap());
        let c = corpus::combined();
        assert!(is_closed(&c, &set(&c, &["e", "z"])).unwrap());
        assert!(is_closed(&t, &[9]).is_err());
    }

    #[test]
    fn u1_enumeration() {
        let c = corpus::combined();
        let sg = enumerate_subsemigroup(&c, &set(&c, &["e", "z"]), 10).unwrap();
        let sg = sg.finite().unwrap();
        assert_eq!(sg.len(), 2);
        let e = sg.element_of_generator(c.state_index("e").unwrap()).unwrap();
        let z = sg.element_of_generator(c.state_index("z").unwrap()).unwrap();
        assert_eq!(sg.product(z, z), z);
        assert_eq!(sg.product(e, z), z);
        assert_eq!(sg.product(z, e), z);
        assert_eq!(sg.product(e, e), e);
        assert!(sg.is_associative());
    }

    #[test]
    fn trivial_and_infinite() {
        let t = corpus::adding_machine();
        let sg = enumerate_subsemigroup(&t, &set(&t, &["e"]), 10).unwrap();
        let sg = sg.finite().unwrap();
        assert_eq!(sg.len(), 1);
        assert_eq!(sg.product(0, 0), 0);
        assert_eq!(enumerate_subsemigroup(&t, &set(&t, &["q", "e"]), 5).unwrap(), Enumeration::ExceedsCap);
        assert!(enumerate_subsemigroup(&t, &[0], 0).is_err());
    }

    #[test]
    fn saturation_examples() {
        let t = corpus::adding_machine();
        let sa = saturate(&t, &set(&t, &["e"]), DEFAULT_CAP).unwrap();
        assert_eq!(sa.automaton.num_states(), 2);
        assert_eq!(sa.s_states, vec![1]);
        let c = corpus::combined();
        let sa = saturate(&c, &set(&c, &["e", "z"]), DEFAULT_CAP).unwrap();
        assert_eq!(sa.s_states.len(), 2);
        assert!(is_closed(&sa.automaton, &sa.s_states).unwrap());
        assert!(saturate(&t, &set(&t, &["q"]), DEFAULT_CAP).is_err());
        assert!(matches!(
            saturate(&t, &set(&t, &["q", "e"]), DEFAULT_CAP),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn saturation_adds_power_states() {
        // a state of order three: s --a/b--> s, s --b/c--> s, s --c/c--> s
        let t = SAutomaton::from_fn(
            vec!["s".into()],
            vec!["a".into(), "b".into(), "c".into()],
            |_, x| ((x + 1).min(2), 0),
        )
        .unwrap();
        let sa = saturate(&t, &[0], DEFAULT_CAP).unwrap();
        assert_eq!(sa.semigroup.len(), 2);
        assert_eq!(sa.automaton.num_states(), 2);
        assert_eq!(sa.automaton.state_name(sa.s_states[1]), "s.s");
        let ss = StateWord(vec![sa.s_states[0], sa.s_states[0]]);
        assert_eq!(sa.normal_form(&ss), StateWord(vec![sa.s_states[1]]));
    }

    #[test]
    fn normal_forms() {
        let t = corpus::adding_machine();
        let sa = saturate(&t, &set(&t, &["e"]), DEFAULT_CAP).unwrap();
        let w = |s: &str| sa.automaton.parse_state_word(s).unwrap();
        assert_eq!(sa.normal_form(&w("qeeq")), w("qeq"));
        assert_eq!(sa.normal_form(&w("qq")), w("qq"));
        assert!(sa.approx_equiv(&w("qee"), &w("qe")));
        assert!(!sa.approx_equiv(&w("q"), &w("e")));
        let c = corpus::combined();
        let sa = saturate(&c, &set(&c, &["e", "z"]), DEFAULT_CAP).unwrap();
        let w = |s: &str| sa.automaton.parse_state_word(s).unwrap();
        assert_eq!(sa.normal_form(&w("qzez")), w("qz"));
        assert!(sa.approx_equiv(&w("zez"), &w("z")));
    }

    #[test]
    fn closed_subset_discovery() {
        let t = corpus::adding_machine();
        let found = discover_closed_subsets(&t, 50).unwrap();
        let finite: Vec<_> = found.iter().filter(|(_, e)| e.finite().is_some()).map(|(s, _)| s.clone()).collect();
        assert_eq!(finite, vec![set(&t, &["e"])]);
        assert_eq!(found.len(), 2);
        let c = corpus::combined();
        let found: Vec<Vec<usize>> = discover_closed_subsets(&c, 50).unwrap().into_iter().map(|(s, _)| s).collect();
        for s in [&["e"][..], &["z"], &["e", "z"]] {
            let mut s = set(&c, s);
            s.sort();
            assert!(found.contains(&s));
        }
        let id = corpus::identity();
        let found = discover_closed_subsets(&id, 10).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].1.finite().unwrap().len(), 1);
    }

    #[test]
    fn isomorphism() {
        let u1 = FiniteSemigroup::from_table(vec![vec![0, 1], vec![1, 1]], vec![0, 1]).unwrap();
        let triv = FiniteSemigroup::from_table(vec![vec![0]], vec![0]).unwrap();
        let left_zero = FiniteSemigroup::from_table(vec![vec![0, 0], vec![1, 1]], vec![0, 1]).unwrap();
        assert!(iso_finite_semigroups(&u1, &u1));
        assert!(!iso_finite_semigroups(&triv, &u1));
        assert!(!iso_finite_semigroups(&u1, &left_zero));
        let c = corpus::combined();
        let sg = enumerate_subsemigroup(&c, &set(&c, &["e", "z"]), 10).unwrap();
        assert!(iso_finite_semigroups(sg.finite().unwrap(), &u1));
        // Z/3 with generator 1 vs generator 2
        let z3 = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let a = FiniteSemigroup::from_table(z3.clone(), vec![1]).unwrap();
        let b = FiniteSemigroup::from_table(z3, vec![2]).unwrap();
        assert!(iso_finite_semigroups(&a, &b));
    }
}
