//! The deterministic Büchi acceptor of ω-words with infinite `R`-orbit,
//! emptiness with ultimately periodic witnesses, finiteness decisions and
//! the periodic-word tests behind the torsion questions of the dual.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::activity::{automaton_active_acceptor, growth_class, sccs};
use crate::automaton::{escape, LetterWord, SAutomaton, StateWord};
use crate::canon::nfra_canonical;
use crate::error::{Error, Result};
use crate::expansion::{active_words_of_length, build_nfra_with};
use crate::lang::Dfa;
use crate::machine::Machine;
use crate::orbits::{is_suffix_closed, r_orbit_size, NerodeDfa};
use crate::semigroup::{saturate, SaturatedAutomaton};

/// Cap on the states of a constructed Büchi acceptor.
pub const MAX_BUCHI_STATES: usize = 1 << 12;

/// Cap on transition-monoid elements in [`periodic_word_in_buchi`].
pub const MAX_MONOID_ELEMENTS: usize = 1 << 18;

/// Cap on the elements counted for a finite verdict.
pub const MAX_ORDER: usize = 1 << 20;

/// Edge-accepting Büchi acceptor; `edges[s]` lists `(letter, target,
/// accepting)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAcceptor {
    pub num_letters: usize,
    pub edges: Vec<Vec<(usize, usize, bool)>>,
    pub initial: usize,
    pub deterministic: bool,
}

impl BuchiAcceptor {
    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    /// Successor in a deterministic acceptor.
    pub fn next(&self, s: usize, a: usize) -> (usize, bool) {
        let (_, t, acc) = self.edges[s][a];
        (t, acc)
    }

    fn is_complete_deterministic(&self) -> bool {
        self.edges
            .iter()
            .all(|es| es.len() == self.num_letters && es.iter().enumerate().all(|(a, e)| e.0 == a))
    }

    /// Membership of `u v^ω` by run simulation (deterministic acceptors).
    pub fn accepts_lasso(&self, w: &UltimatelyPeriodicWord) -> bool {
        assert!(self.deterministic && !w.period.is_empty());
        let mut s = w.stem.iter().fold(self.initial, |s, &a| self.next(s, a).0);
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut flags = Vec::new();
        loop {
            if let Some(&i) = seen.get(&s) {
                return flags[i..].iter().any(|&f| f);
            }
            seen.insert(s, flags.len());
            let mut acc = false;
            for &a in w.period.iter() {
                let (t, f) = self.next(s, a);
                acc |= f;
                s = t;
            }
            flags.push(acc);
        }
    }

    pub fn to_dot(&self, letters: &[String], labels: Option<&[String]>) -> String {
        let mut out = String::from("digraph buchi {\n  rankdir=LR;\n  init [shape=point];\n");
        for s in 0..self.num_states() {
            let label = labels.map(|l| l[s].clone()).unwrap_or_else(|| s.to_string());
            let _ = writeln!(out, "  b{s} [label=\"{}\"];", escape(&label));
        }
        let _ = writeln!(out, "  init -> b{};", self.initial);
        for (s, es) in self.edges.iter().enumerate() {
            for &(a, t, acc) in es {
                let style = if acc { ", style=bold, color=red" } else { "" };
                let _ = writeln!(out, "  b{s} -> b{t} [label=\"{}\"{style}];", escape(&letters[a]));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// `u v^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltimatelyPeriodicWord {
    pub stem: LetterWord,
    pub period: LetterWord,
}

/// The acceptor of ω-words with infinite `R`-orbit, with the shortlex least
/// word reaching every state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitBuchi {
    pub buchi: BuchiAcceptor,
    pub representatives: Vec<LetterWord>,
    /// `sup_count` of the activity, the constant in the size bound.
    pub activity_bound: u64,
}

fn activity_bound(sa: &SaturatedAutomaton) -> Result<u64> {
    let report = growth_class(&automaton_active_acceptor(sa).nfa)?;
    match report.sup_count {
        Some(k) if report.bounded => Ok(k),
        _ => Err(Error::precondition("the automaton does not have bounded S-activity")),
    }
}

fn check_language(sa: &SaturatedAutomaton, d: &NerodeDfa) -> Result<()> {
    if d.num_letters() != sa.automaton.num_states() {
        return Err(Error::input("language alphabet does not match the saturated automaton"));
    }
    Ok(())
}

/// Builds the acceptor by exploring `A_w` for representatives `w`,
/// identifying isomorphic acceptors.
pub fn build_orbit_buchi(sa: &SaturatedAutomaton, d: &NerodeDfa) -> Result<OrbitBuchi> {
    check_language(sa, d)?;
    let k = activity_bound(sa)?;
    let t = &sa.automaton;
    let mut active: HashMap<usize, BTreeSet<LetterWord>> = HashMap::new();
    let mut canon_of = |w: &LetterWord| -> Result<Vec<u8>> {
        if !active.contains_key(&w.len()) {
            active.insert(w.len(), active_words_of_length(sa, w.len())?);
        }
        let (nfra, _) = build_nfra_with(sa, w, d, Some(k), &active[&w.len()])?;
        nfra_canonical(&nfra)
    };
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut reps = vec![LetterWord::empty()];
    let mut sizes = vec![r_orbit_size(t, &reps[0], d)?];
    index.insert(canon_of(&reps[0])?, 0);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < reps.len() {
        let mut row = Vec::with_capacity(t.num_letters());
        for a in 0..t.num_letters() {
            let wa = reps[i].pushed(a);
            let size = r_orbit_size(t, &wa, d)?;
            let key = canon_of(&wa)?;
            let target = match index.get(&key) {
                Some(&j) => j,
                None => {
                    if reps.len() >= MAX_BUCHI_STATES {
                        return Err(Error::resource("orbit acceptor exceeds the state limit"));
                    }
                    index.insert(key, reps.len());
                    reps.push(wa);
                    sizes.push(size);
                    reps.len() - 1
                }
            };
            row.push((a, target, sizes[i] < size));
        }
        edges.push(row);
        i += 1;
    }
    Ok(OrbitBuchi {
        buchi: BuchiAcceptor {
            num_letters: t.num_letters(),
            edges,
            initial: 0,
            deterministic: true,
        },
        representatives: reps,
        activity_bound: k,
    })
}

/// Shortlex least path labels from `from` to every state, over edges allowed
/// by `keep`.
fn shortlex_paths(b: &BuchiAcceptor, from: usize, keep: &dyn Fn(usize, usize) -> bool) -> Vec<Option<Vec<usize>>> {
    let mut paths: Vec<Option<Vec<usize>>> = vec![None; b.num_states()];
    paths[from] = Some(Vec::new());
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        let mut es = b.edges[s].clone();
        es.sort();
        for (a, t, _) in es {
            if keep(s, t) && paths[t].is_none() {
                let mut p = paths[s].clone().unwrap();
                p.push(a);
                paths[t] = Some(p);
                queue.push_back(t);
            }
        }
    }
    paths
}

/// A lasso `u v^ω` whose run passes an accepting transition infinitely
/// often, preferring short stems, then short loops, then lexicographically
/// small words.
pub fn buchi_nonempty(b: &BuchiAcceptor) -> Option<UltimatelyPeriodicWord> {
    let n = b.num_states();
    let stems = shortlex_paths(b, b.initial, &|_, _| true);
    let alive: Vec<bool> = stems.iter().map(Option::is_some).collect();
    let succ = |s: usize| b.edges[s].iter().map(|e| e.1).collect::<Vec<_>>();
    let comps = sccs(n, &succ, &alive);
    let mut comp_of = vec![usize::MAX; n];
    for (c, comp) in comps.iter().enumerate() {
        for &s in comp {
            comp_of[s] = c;
        }
    }
    let mut good: HashSet<usize> = HashSet::new();
    for s in (0..n).filter(|&s| alive[s]) {
        if b.edges[s].iter().any(|e| e.2 && comp_of[e.1] == comp_of[s]) {
            good.insert(comp_of[s]);
        }
    }
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for x in (0..n).filter(|&x| alive[x] && good.contains(&comp_of[x])) {
        let stem = stems[x].clone().unwrap();
        if let Some((bs, bl)) = &best {
            if stem.len() > bs.len() || (stem.len() == bs.len() && stem > *bs && bl.len() == 1) {
                continue;
            }
        }
        let Some(period) = accepting_cycle(b, x, &comp_of) else { continue };
        let cand = (stem, period);
        let better = match &best {
            None => true,
            Some((bs, bl)) => (cand.0.len(), cand.1.len(), &cand.0, &cand.1) < (bs.len(), bl.len(), bs, bl),
        };
        if better {
            best = Some(cand);
        }
    }
    best.map(|(s, p)| UltimatelyPeriodicWord {
        stem: LetterWord(s),
        period: LetterWord(p),
    })
}

/// Shortlex least nonempty cycle from `x` to `x` inside its component that
/// uses an accepting transition.
fn accepting_cycle(b: &BuchiAcceptor, x: usize, comp_of: &[usize]) -> Option<Vec<usize>> {
    let c = comp_of[x];
    let mut prev: HashMap<(usize, bool), ((usize, bool), usize)> = HashMap::new();
    let start = (x, false);
    let mut queue = VecDeque::from([start]);
    let mut seen: HashSet<(usize, bool)> = HashSet::from([start]);
    while let Some((s, f)) = queue.pop_front() {
        let mut es = b.edges[s].clone();
        es.sort();
        for (a, t, acc) in es {
            if comp_of[t] != c {
                continue;
            }
            let item = (t, f || acc);
            if item == (x, true) {
                let mut word = vec![a];
                let mut cur = (s, f);
                while cur != start {
                    let (p, l) = prev[&cur];
                    word.push(l);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            if seen.insert(item) {
                prev.insert(item, ((s, f), a));
                queue.push_back(item);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Finite { order: usize },
    Infinite { witness: UltimatelyPeriodicWord },
}

/// Number of distinct elements `[r]` for nonempty `r ∈ R`, where `R` is
/// suffix-closed with a finite image. Words are built from the right so that
/// every intermediate word lies in `R`.
pub fn image_order(t: &SAutomaton, d: &NerodeDfa) -> Result<usize> {
    let rev = &d.reversed;
    let coreach = rev.coreachable();
    let mut seen: HashSet<(usize, Machine)> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut image: HashSet<Machine> = HashSet::new();
    for p in 0..t.num_states() {
        let s = rev.next(rev.initial, p);
        if coreach[s] {
            let item = (s, Machine::of_state(t, p));
            if seen.insert(item.clone()) {
                queue.push_back(item);
            }
        }
    }
    while let Some((s, m)) = queue.pop_front() {
        if rev.accepting[s] {
            image.insert(m.clone());
        }
        if seen.len() > MAX_ORDER {
            return Err(Error::resource("image of R exceeds the counting limit"));
        }
        for p in 0..t.num_states() {
            let s2 = rev.next(s, p);
            if coreach[s2] {
                let item = (s2, m.after(t, p));
                if !seen.contains(&item) {
                    seen.insert(item.clone());
                    queue.push_back(item);
                }
            }
        }
    }
    Ok(image.len())
}

/// Whether the image of `R` in the semigroup is finite; `d` is over the
/// states of the saturated automaton.
pub fn decide_r_finiteness(sa: &SaturatedAutomaton, d: &NerodeDfa) -> Result<Verdict> {
    check_language(sa, d)?;
    if !is_suffix_closed(d) {
        return Err(Error::precondition("R is not suffix-closed"));
    }
    let ob = build_orbit_buchi(sa, d)?;
    match buchi_nonempty(&ob.buchi) {
        Some(witness) => Ok(Verdict::Infinite { witness }),
        None => Ok(Verdict::Finite {
            order: image_order(&sa.automaton, d)?,
        }),
    }
}

pub fn decide_finiteness(sa: &SaturatedAutomaton) -> Result<Verdict> {
    decide_r_finiteness(sa, &NerodeDfa::all(sa.automaton.num_states()))
}

/// Finiteness of the subsemigroup generated by `gens`: every generator
/// becomes a single state of an enlarged automaton and `R` is the free
/// monoid over these states.
pub fn decide_subsemigroup_finiteness(t: &SAutomaton, s: &[usize], gens: &[StateWord], cap: usize) -> Result<Verdict> {
    let (sa, d) = lift_generators(t, s, gens, cap)?;
    decide_r_finiteness(&sa, &d)
}

/// The saturated automaton with one state per generator and the language
/// of products of generators over its states.
pub fn lift_generators(
    t: &SAutomaton,
    s: &[usize],
    gens: &[StateWord],
    cap: usize,
) -> Result<(SaturatedAutomaton, NerodeDfa)> {
    if gens.is_empty() || gens.iter().any(|g| g.is_empty()) {
        return Err(Error::input("generators must be a nonempty set of nonempty words"));
    }
    let (closure, roots) = t.tuple_closure(gens)?;
    let u = t.union(&closure)?;
    let lifted: BTreeSet<usize> = roots.iter().map(|&r| r + t.num_states()).collect();
    let sa = saturate(&u, s, cap)?;
    let nq = sa.automaton.num_states();
    let letters: BTreeSet<usize> = lifted.iter().map(|&g| sa.origin_map[g]).collect();
    let dfa = Dfa {
        num_letters: nq,
        trans: (0..2)
            .flat_map(|st| {
                let letters = &letters;
                (0..nq).map(move |p| if st == 0 && letters.contains(&p) { 0 } else { 1 })
            })
            .collect(),
        initial: 0,
        accepting: vec![true, false],
    };
    let d = NerodeDfa::new(&dfa)?;
    Ok((sa, d))
}

/// Two-copy acceptor of the complement of a complete deterministic
/// acceptor: copy one follows `b` and may jump to copy two, which keeps only
/// the non-accepting transitions of `b`, all of them accepting.
pub fn complement_det_buchi(b: &BuchiAcceptor) -> Result<BuchiAcceptor> {
    if !b.deterministic || !b.is_complete_deterministic() {
        return Err(Error::input("complementation needs a complete deterministic acceptor"));
    }
    let n = b.num_states();
    let mut edges = vec![Vec::new(); 2 * n];
    for (s, es) in b.edges.iter().enumerate() {
        for &(a, t, acc) in es {
            edges[s].push((a, t, false));
            edges[s].push((a, n + t, false));
            if !acc {
                edges[n + s].push((a, n + t, true));
            }
        }
    }
    Ok(BuchiAcceptor {
        num_letters: b.num_letters,
        edges,
        initial: b.initial,
        deterministic: false,
    })
}

/// Flagged transition-monoid element of a deterministic acceptor.
#[derive(Clone, PartialEq, Eq, Hash)]
struct FlaggedMap {
    map: Vec<usize>,
    flag: Vec<bool>,
}

impl FlaggedMap {
    fn then(&self, other: &FlaggedMap) -> FlaggedMap {
        FlaggedMap {
            map: self.map.iter().map(|&z| other.map[z]).collect(),
            flag: (0..self.map.len()).map(|z| self.flag[z] || other.flag[self.map[z]]).collect(),
        }
    }

    fn periodic_accepts(&self, z0: usize) -> bool {
        let mut pos: HashMap<usize, usize> = HashMap::new();
        let mut seq = Vec::new();
        let mut z = z0;
        while !pos.contains_key(&z) {
            pos.insert(z, seq.len());
            seq.push(z);
            z = self.map[z];
        }
        seq[pos[&z]..].iter().any(|&c| self.flag[c])
    }
}

/// Relation element of a nondeterministic acceptor: 0 no path, 1 a path, 2 a
/// path through an accepting transition.
#[derive(Clone, PartialEq, Eq, Hash)]
struct FlaggedRelation {
    n: usize,
    m: Vec<u8>,
}

impl FlaggedRelation {
    fn then(&self, other: &FlaggedRelation) -> FlaggedRelation {
        let n = self.n;
        let mut m = vec![0u8; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.m[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = other.m[k * n + j];
                    if b != 0 {
                        let v = a.max(b);
                        if v > m[i * n + j] {
                            m[i * n + j] = v;
                        }
                    }
                }
            }
        }
        FlaggedRelation { n, m }
    }

    fn periodic_accepts(&self, z0: usize) -> bool {
        let n = self.n;
        let mut powers: Vec<FlaggedRelation> = vec![self.clone()];
        let mut seen: HashSet<FlaggedRelation> = HashSet::from([self.clone()]);
        loop {
            let next = powers.last().unwrap().then(self);
            if !seen.insert(next.clone()) {
                break;
            }
            powers.push(next);
        }
        let mut reach = vec![false; n];
        reach[z0] = true;
        for p in &powers {
            for x in 0..n {
                if p.m[z0 * n + x] != 0 {
                    reach[x] = true;
                }
            }
        }
        (0..n).any(|x| reach[x] && powers.iter().any(|p| p.m[x * n + x] == 2))
    }
}

/// A shortest, then lexicographically least, nonempty `u` with `u^ω`
/// accepted.
pub fn periodic_word_in_buchi(b: &BuchiAcceptor) -> Result<Option<LetterWord>> {
    let n = b.num_states();
    if b.deterministic {
        let letters: Vec<FlaggedMap> = (0..b.num_letters)
            .map(|a| FlaggedMap {
                map: (0..n).map(|s| b.next(s, a).0).collect(),
                flag: (0..n).map(|s| b.next(s, a).1).collect(),
            })
            .collect();
        monoid_search(&letters, |m| m.periodic_accepts(b.initial), FlaggedMap::then)
    } else {
        let letters: Vec<FlaggedRelation> = (0..b.num_letters)
            .map(|a| {
                let mut m = vec![0u8; n * n];
                for (s, es) in b.edges.iter().enumerate() {
                    for &(l, t, acc) in es {
                        if l == a {
                            let v = if acc { 2 } else { 1 };
                            m[s * n + t] = m[s * n + t].max(v);
                        }
                    }
                }
                FlaggedRelation { n, m }
            })
            .collect();
        monoid_search(&letters, |m| m.periodic_accepts(b.initial), FlaggedRelation::then)
    }
}

fn monoid_search<M: Clone + Eq + std::hash::Hash>(
    letters: &[M],
    good: impl Fn(&M) -> bool,
    then: impl Fn(&M, &M) -> M,
) -> Result<Option<LetterWord>> {
    let mut seen: HashSet<M> = HashSet::new();
    let mut queue: VecDeque<(M, Vec<usize>)> = VecDeque::new();
    for (a, m) in letters.iter().enumerate() {
        if seen.insert(m.clone()) {
            queue.push_back((m.clone(), vec![a]));
        }
    }
    while let Some((m, word)) = queue.pop_front() {
        if good(&m) {
            return Ok(Some(LetterWord(word)));
        }
        for (a, l) in letters.iter().enumerate() {
            let next = then(&m, l);
            if !seen.contains(&next) {
                if seen.len() >= MAX_MONOID_ELEMENTS {
                    return Err(Error::resource("transition monoid exceeds the element limit"));
                }
                seen.insert(next.clone());
                let mut w = word.clone();
                w.push(a);
                queue.push_back((next, w));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorsionReport {
    pub has_torsion_element: bool,
    pub has_element_without_torsion: bool,
    pub torsion_free: bool,
}

/// Periodic-word tests on the orbit acceptor with `R = Q*`: the dual has an
/// element without torsion iff some `u^ω` has an infinite orbit, and a
/// torsion element iff some `u^ω` has a finite orbit.
pub fn dual_torsion_checks(sa: &SaturatedAutomaton) -> Result<TorsionReport> {
    let ob = build_orbit_buchi(sa, &NerodeDfa::all(sa.automaton.num_states()))?;
    let without = periodic_word_in_buchi(&ob.buchi)?.is_some();
    let with = periodic_word_in_buchi(&complement_det_buchi(&ob.buchi)?)?.is_some();
    Ok(TorsionReport {
        has_torsion_element: with,
        has_element_without_torsion: without,
        torsion_free: !with,
    })
}
